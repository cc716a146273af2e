#pragma once

#include <cstddef>

#include "care/types.hpp"

namespace care {

// Sample moments of the pixel pair (x, y) = (g_b, g_a), n-1 normalized.
// The cov_* fields are the plug-ins used by the second-order bias
// correction.
struct RatioMoments {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double var_x = 0.0;
    double var_y = 0.0;
    double cov_xy = 0.0;
    double cov_x2_x = 0.0;  // Cov(x^2, x)
    double cov_x2_y = 0.0;  // Cov(x^2, y)
    double cov_y2_x = 0.0;  // Cov(y^2, x)
    std::size_t n = 0;
};

// Predicted ratio sum(g_a)/sum(g_b), clipped to [0,1].
double point_ratio(const InstanceVolume& v);

// Labeled ratio sum(y_a)/sum(y_b); inside [0,1] by the nesting invariant.
double labeled_ratio(const InstanceVolume& v);

RatioMoments ratio_moments(const InstanceVolume& v);

// Delta-method estimate of E[(r_hat - r)^2], floored at zero (the truncated
// Taylor expansion can dip slightly negative).
double squared_error_estimate(const RatioMoments& m);

// Distribution-free interval of half-width sqrt(se)/sqrt(alpha) around
// r_hat, clipped to [0,1].
IntervalEstimate markov_interval(double r_hat, double se, double alpha);

// Second-order debiased ratio estimate; unclipped, diagnostics value.
double debiased_ratio(const InstanceVolume& v);
double debiased_ratio_clipped(const InstanceVolume& v);

} // namespace care
