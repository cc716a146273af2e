#include "care/baselines.hpp"

#include <algorithm>
#include <unordered_set>
#include <vector>

#include "care/estimators.hpp"
#include "care/quantile.hpp"
#include "care/rng.hpp"

namespace care {

namespace {

void check_params(const ResampleParams& p) {
    if (p.reps < 2) throw ConfigError("resampling needs at least 2 repetitions");
    if (!(p.lo_q > 0.0 && p.lo_q <= p.hi_q && p.hi_q < 1.0))
        throw ConfigError("resample quantiles must satisfy 0 < lo <= hi < 1");
}

IntervalEstimate interval_from_ratios(const InstanceVolume& v, std::vector<double>& ratios,
                                      const ResampleParams& p, Method method) {
    if (ratios.size() < std::max<std::size_t>(1, p.reps / 2))
        throw EmptyDenominator("instance '" + v.id +
                               "': too many resamples with an empty denominator");
    const double r_hat = point_ratio(v);
    double lower = nearest_rank_quantile(ratios, p.lo_q);
    double upper = nearest_rank_quantile(ratios, p.hi_q);
    IntervalEstimate out;
    out.r_hat = r_hat;
    out.method = method;
    out.alpha = 0.0;
    out.delta = 0.0;
    // empirical quantiles can exclude the full-sample ratio; widen so the
    // interval invariant lower <= r_hat <= upper holds
    if (r_hat < lower) {
        lower = r_hat;
        out.degenerate = true;
    }
    if (r_hat > upper) {
        upper = r_hat;
        out.degenerate = true;
    }
    out.lower = lower;
    out.upper = upper;
    return out;
}

} // namespace

IntervalEstimate bootstrap_interval(const InstanceVolume& v, const ResampleParams& p) {
    check_params(p);
    const std::size_t n = v.n_pixels();
    if (n == 0) throw EmptyDenominator("instance '" + v.id + "' has no pixels");
    std::vector<double> ratios;
    ratios.reserve(p.reps);
    for (std::size_t rep = 0; rep < p.reps; ++rep) {
        Rng rng(derive_seed(p.seed, rep));
        double sum_a = 0.0, sum_b = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t idx = static_cast<std::size_t>(rng.below(n));
            sum_a += v.g_a[idx];
            sum_b += v.g_b[idx];
        }
        if (sum_b > 0.0) ratios.push_back(clip01(sum_a / sum_b));
    }
    return interval_from_ratios(v, ratios, p, Method::Bootstrap);
}

IntervalEstimate subsample_interval(const InstanceVolume& v, double frac,
                                    const ResampleParams& p) {
    check_params(p);
    const std::size_t n = v.n_pixels();
    if (n == 0) throw EmptyDenominator("instance '" + v.id + "' has no pixels");
    if (!(frac > 0.0 && frac <= 1.0))
        throw ConfigError("subsample fraction must lie in (0,1]");
    const std::size_t k = static_cast<std::size_t>(frac * static_cast<double>(n));
    if (k < 1) throw ConfigError("subsample fraction selects no pixels for this instance");

    std::vector<double> ratios;
    ratios.reserve(p.reps);
    std::vector<std::size_t> chosen;
    chosen.reserve(k);
    for (std::size_t rep = 0; rep < p.reps; ++rep) {
        Rng rng(derive_seed(p.seed, rep));
        // Floyd's sampling: k distinct indices out of n
        std::unordered_set<std::size_t> seen;
        seen.reserve(k * 2);
        chosen.clear();
        for (std::size_t j = n - k; j < n; ++j) {
            const std::size_t t = static_cast<std::size_t>(rng.below(j + 1));
            if (seen.insert(t).second) {
                chosen.push_back(t);
            } else {
                seen.insert(j);
                chosen.push_back(j);
            }
        }
        std::sort(chosen.begin(), chosen.end());  // fixed summation order
        double sum_a = 0.0, sum_b = 0.0;
        for (std::size_t idx : chosen) {
            sum_a += v.g_a[idx];
            sum_b += v.g_b[idx];
        }
        if (sum_b > 0.0) ratios.push_back(clip01(sum_a / sum_b));
    }
    return interval_from_ratios(v, ratios, p, Method::Subsample);
}

} // namespace care
