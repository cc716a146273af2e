#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "care/calibration.hpp"
#include "care/rng.hpp"

using namespace care;

namespace {

// both channels share the same predictions and labels
InstanceVolume labeled_volume(std::vector<double> g, std::vector<std::uint8_t> y) {
    InstanceVolume v;
    v.id = "t";
    v.g_a = g;
    v.g_b = std::move(g);
    v.y_a = y;
    v.y_b = std::move(y);
    return v;
}

InstanceVolume random_labeled(Rng& rng, std::size_t n) {
    InstanceVolume v;
    v.id = "rand";
    v.g_a.resize(n);
    v.g_b.resize(n);
    v.y_a.resize(n);
    v.y_b.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        v.g_b[i] = rng.uniform();
        v.g_a[i] = v.g_b[i] * rng.uniform();
        v.y_b[i] = rng.bernoulli(0.6) ? 1 : 0;
        v.y_a[i] = (v.y_b[i] != 0 && rng.bernoulli(0.5)) ? 1 : 0;
    }
    return v;
}

} // namespace

TEST_CASE("volume bias of a perfect predictor is zero") {
    InstanceVolume v = labeled_volume({1, 0, 1, 0}, {1, 0, 1, 0});
    CHECK(volume_bias(v, Channel::A) == 0.0);
    CHECK(volume_bias(v, Channel::B) == 0.0);
}

TEST_CASE("volume bias of a constant over-predictor") {
    // g constant 0.7 with half the labels positive: bias 0.2
    InstanceVolume v = labeled_volume({0.7, 0.7, 0.7, 0.7}, {1, 0, 1, 0});
    CHECK(volume_bias(v, Channel::B) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK_THROWS_AS(volume_bias(labeled_volume({0.5}, {}), Channel::B), LabelsRequired);
}

TEST_CASE("volume bias matches the mean(g) - mean(y) oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const InstanceVolume v = random_labeled(rng, 100 + rng.below(400));
        for (const Channel c : {Channel::A, Channel::B}) {
            const auto& g = c == Channel::A ? v.g_a : v.g_b;
            const auto& y = c == Channel::A ? v.y_a : v.y_b;
            long double sum_g = 0, sum_y = 0;
            for (double x : g) sum_g += x;
            for (std::uint8_t b : y) sum_y += b;
            const double oracle =
                static_cast<double>(sum_g / g.size() - sum_y / g.size());
            CHECK(volume_bias(v, c) == doctest::Approx(oracle).epsilon(1e-12));
        }
    }
}

TEST_CASE("ece is zero for a sharp correct predictor") {
    InstanceVolume v = labeled_volume({1, 0, 1, 1, 0}, {1, 0, 1, 1, 0});
    CHECK(ece(v, Channel::B).ece == 0.0);
}

TEST_CASE("ece of a constant predictor reduces to one occupied bin") {
    // calibrated constant: conf and acc agree
    InstanceVolume calibrated = labeled_volume(std::vector<double>(10, 0.7),
                                               {1, 1, 1, 1, 1, 1, 1, 0, 0, 0});
    CHECK(ece(calibrated, Channel::B).ece <= 1e-12);
    // miscalibrated constant: |0.7 - 0.5|
    InstanceVolume off = labeled_volume(std::vector<double>(10, 0.7),
                                        {1, 1, 1, 1, 1, 0, 0, 0, 0, 0});
    CHECK(ece(off, Channel::B).ece == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("ece bin accounting is consistent") {
    Rng rng(13);
    const InstanceVolume v = random_labeled(rng, 500);
    const EceResult result = ece(v, Channel::B, 15);
    const BinnedCalibrationStats& s = result.stats;
    std::size_t total = 0;
    for (std::size_t b = 0; b < s.n_bins; ++b) {
        total += s.bin_counts[b];
        if (s.bin_counts[b] == 0) continue;
        CHECK(s.bin_conf[b] >= s.bin_edges[b] - 1e-12);
        CHECK(s.bin_conf[b] <= s.bin_edges[b + 1] + 1e-12);
    }
    CHECK(total == v.n_pixels());
    CHECK(result.ece == ece_from_stats(s));
}

TEST_CASE("ece is invariant to pixel permutation") {
    Rng rng(17);
    InstanceVolume v = random_labeled(rng, 300);
    const double base = ece(v, Channel::B).ece;
    for (int shuffle = 0; shuffle < 5; ++shuffle) {
        for (std::size_t i = v.n_pixels(); i > 1; --i) {
            const std::size_t j = rng.below(i);
            std::swap(v.g_a[i - 1], v.g_a[j]);
            std::swap(v.g_b[i - 1], v.g_b[j]);
            std::swap(v.y_a[i - 1], v.y_a[j]);
            std::swap(v.y_b[i - 1], v.y_b[j]);
        }
        CHECK(ece(v, Channel::B).ece == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("binned |volume bias| <= ece holds exactly, pixelwise within slack") {
    Rng rng(19);
    for (int trial = 0; trial < 200; ++trial) {
        const InstanceVolume v = random_labeled(rng, 20 + rng.below(400));
        for (const Channel c : {Channel::A, Channel::B}) {
            const EceResult result = ece(v, c, 15);
            // same-stats fold: exact in floating point
            CHECK(std::abs(binned_volume_bias(result.stats)) <= ece_from_stats(result.stats));
            // pixelwise statistic differs by summation order only
            CHECK(std::abs(volume_bias(v, c)) <= result.ece + 1e-12);
        }
    }
}

TEST_CASE("fit_calibration_quantiles on perfect and overflow cases") {
    std::vector<InstanceVolume> perfect;
    for (int i = 0; i < 9; ++i)
        perfect.push_back(labeled_volume({1, 0, 1, 0}, {1, 0, 1, 0}));
    // delta = 0.5 -> level 0.75 -> k = ceil(10 * 0.75) = 8 <= 9
    const auto [qa, qb] = fit_calibration_quantiles(perfect, 0.5, BiasSource::VBias);
    CHECK(qa == 0.0);
    CHECK(qb == 0.0);

    // 4 instances at delta = 0.32: level 0.84 -> k = ceil(5 * 0.84) = 5 > 4
    std::vector<InstanceVolume> four;
    for (int i = 0; i < 4; ++i)
        four.push_back(labeled_volume({0.7, 0.7}, {1, 0}));
    const auto [qa4, qb4] = fit_calibration_quantiles(four, 0.32, BiasSource::VBias);
    CHECK(std::isinf(qa4));
    CHECK(std::isinf(qb4));

    CHECK_THROWS_AS(fit_calibration_quantiles(std::vector<InstanceVolume>{}, 0.32,
                                              BiasSource::VBias),
                    EmptyCalibrationSet);
}

TEST_CASE("ece quantiles dominate vbias quantiles at the same level") {
    Rng rng(23);
    std::vector<InstanceVolume> val;
    for (int i = 0; i < 40; ++i) val.push_back(random_labeled(rng, 150));
    const auto [va, vb] = fit_calibration_quantiles(val, 0.3, BiasSource::VBias);
    const auto [ea, eb] = fit_calibration_quantiles(val, 0.3, BiasSource::Ece);
    CHECK(ea >= va);
    CHECK(eb >= vb);
}

TEST_CASE("calibration interval worked example") {
    // means 0.3 / 1.0 with q_a = q_b = 0.1:
    //   lower = 0.2/1.1, upper = 0.4/0.9
    InstanceVolume v;
    v.id = "w";
    v.g_a = {0.3, 0.3};
    v.g_b = {1.0, 1.0};
    const CalibrationBounds cal = calibration_interval(v, 0.1, 0.1);
    CHECK(cal.eps_l == doctest::Approx(0.3 - 0.2 / 1.1).epsilon(1e-9));
    CHECK(cal.eps_u == doctest::Approx(0.4 / 0.9 - 0.3).epsilon(1e-9));
    CHECK_FALSE(cal.degenerate);

    const CalibrationBounds zero = calibration_interval(v, 0.0, 0.0);
    CHECK(zero.eps_l == 0.0);
    CHECK(zero.eps_u == 0.0);
    CHECK_FALSE(zero.degenerate);
}

TEST_CASE("calibration interval clips blow-ups and flags them") {
    InstanceVolume v;
    v.id = "d";
    v.g_a = {0.3, 0.3};
    v.g_b = {0.5, 0.5};
    // q_b >= mean_b: upper denominator nonpositive
    const CalibrationBounds cal = calibration_interval(v, 0.1, 0.6);
    CHECK(cal.degenerate);
    CHECK(cal.eps_u == doctest::Approx(1.0 - 0.6).epsilon(1e-12));

    InstanceVolume zero_den;
    zero_den.id = "z";
    zero_den.g_a = {0, 0};
    zero_den.g_b = {0, 0};
    CHECK_THROWS_AS(calibration_interval(zero_den, 0.1, 0.1), EmptyDenominator);

    const CalibrationBounds inf_q =
        calibration_interval(v, std::numeric_limits<double>::infinity(), 0.1);
    CHECK(inf_q.degenerate);
    CHECK(inf_q.eps_l + inf_q.eps_u == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("calibration interval widths are monotone in the quantiles") {
    Rng rng(29);
    InstanceVolume v;
    v.id = "m";
    v.g_a.resize(50);
    v.g_b.resize(50);
    for (std::size_t i = 0; i < 50; ++i) {
        v.g_b[i] = 0.3 + 0.5 * rng.uniform();
        v.g_a[i] = v.g_b[i] * 0.4;
    }
    double previous = -1.0;
    for (double q = 0.0; q <= 0.2; q += 0.01) {
        const CalibrationBounds cal = calibration_interval(v, q, q);
        CHECK(cal.eps_l >= 0.0);
        CHECK(cal.eps_u >= 0.0);
        const double width = cal.eps_l + cal.eps_u;
        CHECK(width >= previous);
        previous = width;
    }
    // monotone in each quantile separately as well
    previous = -1.0;
    for (double q_a = 0.0; q_a <= 0.2; q_a += 0.01) {
        const CalibrationBounds cal = calibration_interval(v, q_a, 0.05);
        const double width = cal.eps_l + cal.eps_u;
        CHECK(width >= previous);
        previous = width;
    }
    previous = -1.0;
    for (double q_b = 0.0; q_b <= 0.2; q_b += 0.01) {
        const CalibrationBounds cal = calibration_interval(v, 0.05, q_b);
        const double width = cal.eps_l + cal.eps_u;
        CHECK(width >= previous);
        previous = width;
    }
}
