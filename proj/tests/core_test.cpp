#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "care/quantile.hpp"
#include "care/rng.hpp"
#include "care/types.hpp"

using namespace care;

namespace {

// sort-based oracle for the rank rule, independent of nth_element
double rank_oracle(std::vector<double> values, std::size_t k) {
    std::sort(values.begin(), values.end());
    return values[k - 1];
}

InstanceVolume make_volume(std::vector<double> g_a, std::vector<double> g_b) {
    InstanceVolume v;
    v.id = "t";
    v.g_a = std::move(g_a);
    v.g_b = std::move(g_b);
    return v;
}

} // namespace

TEST_CASE("conformal quantile follows the ceil((n+1) level) rank rule") {
    const std::vector<double> values{0.1, 0.2, 0.3, 0.4};
    // k = ceil(5 * 0.68) = 4 -> 4th smallest
    CHECK(conformal_quantile(values, 0.68) == 0.4);
    CHECK(conformal_quantile(values, 0.68) == rank_oracle(values, 4));
}

TEST_CASE("conformal quantile returns the infinite sentinel on rank overflow") {
    const std::vector<double> one{0.5};
    // k = ceil(2 * 0.68) = 2 > 1
    CHECK(std::isinf(conformal_quantile(one, 0.68)));
    CHECK(conformal_quantile(one, 0.68) > 0);
}

TEST_CASE("conformal quantile of a constant sequence is that constant") {
    const std::vector<double> values(7, 3.25);
    CHECK(conformal_quantile(values, 0.5) == 3.25);
    CHECK(conformal_quantile(values, 0.1) == 3.25);
}

TEST_CASE("conformal quantile rejects empty input and bad levels") {
    CHECK_THROWS_AS(conformal_quantile(std::vector<double>{}, 0.5), EmptyCalibrationSet);
    const std::vector<double> values{0.1, 0.2};
    CHECK_THROWS_AS(conformal_quantile(values, 0.0), BadConfidenceBudget);
    CHECK_THROWS_AS(conformal_quantile(values, 1.0), BadConfidenceBudget);
}

TEST_CASE("conformal quantile is monotone in level and dominates the uncorrected quantile") {
    Rng rng(12345);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.below(40);
        std::vector<double> values(n);
        for (double& x : values) x = rng.uniform();
        double previous = -std::numeric_limits<double>::infinity();
        for (double level = 0.05; level < 1.0; level += 0.05) {
            const double q = conformal_quantile(values, level);
            CHECK(q >= previous);
            previous = q;
            CHECK(q >= nearest_rank_quantile(values, level));
        }
    }
}

TEST_CASE("conformal quantile is permutation invariant") {
    Rng rng(99);
    std::vector<double> values(21);
    for (double& x : values) x = rng.uniform();
    const double q = conformal_quantile(values, 0.68);
    for (int shuffle = 0; shuffle < 10; ++shuffle) {
        for (std::size_t i = values.size(); i > 1; --i)
            std::swap(values[i - 1], values[rng.below(i)]);
        CHECK(conformal_quantile(values, 0.68) == q);
    }
}

TEST_CASE("soft volume sums the chosen channel") {
    const InstanceVolume ones = make_volume({0, 0, 0, 0}, {1, 1, 1, 1});
    CHECK(soft_volume(ones, Channel::B) == 4.0);
    const InstanceVolume zero = make_volume({0, 0}, {0, 0});
    CHECK(soft_volume(zero, Channel::B) == 0.0);
    const InstanceVolume mixed = make_volume({0, 0, 0}, {0.25, 0.75, 0.5});
    CHECK(soft_volume(mixed, Channel::B) == 1.5);
}

TEST_CASE("soft volume is additive under concatenation") {
    Rng rng(7);
    std::vector<double> left(13), right(29);
    for (double& x : left) x = rng.uniform();
    for (double& x : right) x = rng.uniform();
    std::vector<double> both = left;
    both.insert(both.end(), right.begin(), right.end());
    const auto pad = [](std::size_t n) { return std::vector<double>(n, 0.0); };
    const double combined = soft_volume(make_volume(pad(both.size()), both), Channel::B);
    const double separate = soft_volume(make_volume(pad(left.size()), left), Channel::B) +
                            soft_volume(make_volume(pad(right.size()), right), Channel::B);
    CHECK(combined == doctest::Approx(separate).epsilon(1e-12));
}

TEST_CASE("instance validation catches malformed volumes") {
    InstanceVolume v = make_volume({0.5, 0.5}, {0.5, 0.5});
    CHECK_NOTHROW(validate(v));

    InstanceVolume short_a = v;
    short_a.g_a.pop_back();
    CHECK_THROWS_AS(validate(short_a), CorruptVolume);

    InstanceVolume out_of_range = v;
    out_of_range.g_b[0] = 1.5;
    CHECK_THROWS_AS(validate(out_of_range), CorruptVolume);

    InstanceVolume bad_nesting = v;
    bad_nesting.y_a = {1, 0};
    bad_nesting.y_b = {0, 0};
    CHECK_THROWS_AS(validate(bad_nesting), CorruptVolume);

    InstanceVolume labeled = v;
    labeled.y_a = {0, 1};
    labeled.y_b = {1, 1};
    CHECK_NOTHROW(validate(labeled));
}
