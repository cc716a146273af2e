#pragma once

#include <span>

#include "care/types.hpp"

namespace care {

// Rank-rule conformal quantile: the ceil((n+1)*level)-th smallest value.
// Returns +infinity when the rank exceeds n; callers map the sentinel to a
// full-width interval instead of silently under-covering. The rank rule
// (rather than an interpolated quantile) is what carries the finite-sample
// guarantee.
double conformal_quantile(std::span<const double> values, double level);

// Plain nearest-rank empirical quantile, no (n+1)/n correction. Used by the
// resampling baselines and the size terciles.
double nearest_rank_quantile(std::span<const double> values, double level);

// Sum of predicted probabilities of one channel; needs no labels.
double soft_volume(const InstanceVolume& v, Channel channel);

} // namespace care
