#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "care/conformal.hpp"
#include "care/quantile.hpp"
#include "care/rng.hpp"

using namespace care;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// exchangeable toy population: r_gt is r_hat plus symmetric noise
std::vector<RatioPair> toy_pairs(Rng& rng, std::size_t n, double noise) {
    std::vector<RatioPair> pairs(n);
    for (RatioPair& p : pairs) {
        p.r_hat = 0.2 + 0.6 * rng.uniform();
        p.r_gt = p.r_hat + noise * (rng.uniform() - 0.5);
    }
    return pairs;
}

} // namespace

TEST_CASE("fit_cqr quantile of residuals") {
    std::vector<RatioPair> zeros(6, RatioPair{0.4, 0.4});
    CHECK(fit_cqr(zeros, 0.5) == 0.0);

    // residuals {0.1,0.2,0.3,0.4} at delta = 0.32: level 0.68, k = 4
    std::vector<RatioPair> pairs{{0.5, 0.4}, {0.4, 0.2}, {0.2, 0.5}, {0.1, 0.5}};
    CHECK(fit_cqr(pairs, 0.32) == 0.4);

    CHECK_THROWS_AS(fit_cqr(std::vector<RatioPair>{}, 0.32), EmptyCalibrationSet);
}

TEST_CASE("cqr interval shape") {
    const IntervalEstimate mid = cqr_interval(0.5, 0.1, 0.32);
    CHECK(mid.lower == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(mid.upper == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(mid.method == Method::Cqr);
    CHECK(mid.delta == 0.32);
    CHECK_FALSE(mid.degenerate);

    const IntervalEstimate point = cqr_interval(0.5, 0.0);
    CHECK(point.width() == 0.0);

    const IntervalEstimate full = cqr_interval(0.5, kInf);
    CHECK(full.lower == 0.0);
    CHECK(full.upper == 1.0);
    CHECK(full.degenerate);
}

TEST_CASE("uncertainty measure per kind") {
    InstanceVolume v;
    v.id = "u";
    v.g_a = {0.0, 0.0};
    v.g_b = {0.5, 0.5};  // soft volume 1.0

    UncertaintySpec unit;
    unit.kind = UncertaintyKind::Unit;
    CHECK(uncertainty_measure(v, unit) == 1.0);

    UncertaintySpec scaled;
    scaled.kind = UncertaintyKind::SizeScaled;
    scaled.v_t_max = 10.0;
    // V_T = 0: u = lambda exactly
    const double q = 0.2;
    CHECK(uncertainty_measure_from_size(0.0, scaled, q) ==
          doctest::Approx(1.0 / (2.0 * q)).epsilon(1e-15));
    CHECK_THROWS_AS(uncertainty_measure(v, scaled), ConfigError);  // q missing

    UncertaintySpec no_lambda;
    no_lambda.kind = UncertaintyKind::SizeNoLambda;
    no_lambda.v_t_max = 1.0;
    no_lambda.epsilon = 1e-9;
    // V_T = V_T,max: floors at epsilon
    CHECK(uncertainty_measure(v, no_lambda) == doctest::Approx(1e-9).epsilon(1e-6));

    UncertaintySpec voxel;
    voxel.kind = UncertaintyKind::VoxelFraction;
    voxel.voxel_volume = 16.0;  // denominator 2
    CHECK(uncertainty_measure(v, voxel) == doctest::Approx(0.5).epsilon(1e-12));

    UncertaintySpec invalid;
    invalid.kind = UncertaintyKind::SizeScaled;
    invalid.v_t_max = 0.0;
    CHECK_THROWS_AS(uncertainty_measure(v, invalid, 0.1), ConfigError);
}

TEST_CASE("fit_acqr with the unit measure equals fit_cqr exactly") {
    Rng rng(5);
    std::vector<RatioPair> pairs = toy_pairs(rng, 60, 0.2);
    std::vector<AcqrObservation> obs;
    for (const RatioPair& p : pairs) obs.push_back({p.r_gt, p.r_hat, 5.0});
    UncertaintySpec unit;
    unit.kind = UncertaintyKind::Unit;
    const AcqrFit fit = fit_acqr(obs, 0.32, unit);
    CHECK(fit.q_score == fit_cqr(pairs, 0.32));
    CHECK(fit.lambda == 1.0);
    CHECK_FALSE(fit.lambda_fallback);
}

TEST_CASE("fitted size-scaled lambda makes the widest interval span the full range") {
    Rng rng(7);
    std::vector<AcqrObservation> obs;
    for (int i = 0; i < 120; ++i) {
        const double v_t = 1.0 + 99.0 * rng.uniform();
        const double r_hat = 0.3 + 0.4 * rng.uniform();
        const double r_gt = r_hat + 0.1 * (rng.uniform() - 0.5);
        obs.push_back({r_gt, r_hat, v_t});
    }
    UncertaintySpec spec;
    spec.kind = UncertaintyKind::SizeScaled;
    spec.v_t_max = 100.0;
    const AcqrFit fit = fit_acqr(obs, 0.32, spec);
    REQUIRE(std::isfinite(fit.q_score));
    REQUIRE(fit.q_score > 0.0);
    // V_T -> 0 gives u_max = lambda; width = 2 u_max q = 1
    const double u_max = uncertainty_measure_from_size(0.0, spec, fit.q_score);
    CHECK(2.0 * u_max * fit.q_score == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fit_acqr falls back to lambda 1 when all scores are zero") {
    std::vector<AcqrObservation> obs(10, AcqrObservation{0.4, 0.4, 3.0});
    UncertaintySpec spec;
    spec.kind = UncertaintyKind::SizeScaled;
    spec.v_t_max = 10.0;
    const AcqrFit fit = fit_acqr(obs, 0.5, spec);
    CHECK(fit.q_score == 0.0);
    CHECK(fit.lambda == 1.0);
    CHECK(fit.lambda_fallback);
}

TEST_CASE("acqr interval degrades to cqr bit for bit with u = 1") {
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const double r_hat = rng.uniform();
        const double q = 0.3 * rng.uniform();
        const IntervalEstimate a = acqr_interval(r_hat, 1.0, q, 0.32);
        const IntervalEstimate c = cqr_interval(r_hat, q, 0.32);
        CHECK(a.lower == c.lower);
        CHECK(a.upper == c.upper);
        CHECK(a.r_hat == c.r_hat);
        CHECK(a.degenerate == c.degenerate);
    }
}

TEST_CASE("acqr interval worked example and sentinel") {
    const IntervalEstimate est = acqr_interval(0.5, 0.5, 0.2);
    CHECK(est.lower == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(est.upper == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(est.method == Method::Acqr);

    const IntervalEstimate full = acqr_interval(0.5, 0.5, kInf);
    CHECK(full.lower == 0.0);
    CHECK(full.upper == 1.0);
    CHECK(full.degenerate);

    CHECK_THROWS_AS(acqr_interval(0.5, 0.0, 0.2), ConfigError);
}

TEST_CASE("size-scaled interval width is nonincreasing in tumor size") {
    UncertaintySpec spec;
    spec.kind = UncertaintyKind::SizeScaled;
    spec.v_t_max = 50.0;
    const double q = 0.15;
    double previous = std::numeric_limits<double>::infinity();
    for (double v_t = 0.0; v_t <= 50.0; v_t += 5.0) {
        const double u = uncertainty_measure_from_size(v_t, spec, q);
        const double width = acqr_interval(0.5, u, q).width();
        CHECK(width <= previous + 1e-15);
        previous = width;
    }
}

TEST_CASE("cqr and acqr coverage on exchangeable splits") {
    // Monte Carlo oracle: split an exchangeable population, fit on one half,
    // check coverage on the other; the acceptance suite runs this at scale
    Rng rng(13);
    const double delta = 0.32;
    std::vector<RatioPair> all = toy_pairs(rng, 800, 0.25);
    std::vector<RatioPair> val(all.begin(), all.begin() + 400);
    std::vector<RatioPair> test(all.begin() + 400, all.end());
    const double q = fit_cqr(val, delta);
    std::size_t covered = 0;
    for (const RatioPair& p : test)
        if (cqr_interval(p.r_hat, q).covers(p.r_gt)) ++covered;
    const double coverage = static_cast<double>(covered) / test.size();
    const double slack = 3.0 * std::sqrt(0.68 * 0.32 / 400.0);
    CHECK(coverage >= 1.0 - delta - slack);
}
