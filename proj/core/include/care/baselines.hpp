#pragma once

#include <cstdint>

#include "care/types.hpp"

namespace care {

// Resampling configuration. The defaults ([0.16, 0.84] from 100 repetitions)
// correspond to the 0.68 confidence level.
struct ResampleParams {
    std::size_t reps = 100;
    double lo_q = 0.16;
    double hi_q = 0.84;
    std::uint64_t seed = 0;
};

// Empirical [lo_q, hi_q] quantile interval of ratios over resamples of N
// pixels drawn with replacement. Per-resample streams are derived from
// (seed, resample index), so parallel and serial execution agree bit for
// bit. Zero-denominator resamples are skipped; fewer than reps/2 valid
// resamples raises EmptyDenominator.
IntervalEstimate bootstrap_interval(const InstanceVolume& v, const ResampleParams& params = {});

// Same, but each resample takes floor(frac * N) distinct pixels without
// replacement.
IntervalEstimate subsample_interval(const InstanceVolume& v, double frac = 0.1,
                                    const ResampleParams& params = {});

} // namespace care
