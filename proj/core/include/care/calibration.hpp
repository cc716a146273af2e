#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "care/types.hpp"

namespace care {

inline constexpr std::size_t kDefaultEceBins = 15;

// Equal-width binning of predicted probabilities over [0,1].
struct BinnedCalibrationStats {
    std::size_t n_bins = kDefaultEceBins;
    std::vector<double> bin_edges;        // n_bins + 1 edges
    std::vector<std::size_t> bin_counts;  // pixels per bin
    std::vector<double> bin_conf;         // mean predicted probability (0 if empty)
    std::vector<double> bin_acc;          // mean label (0 if empty)
    std::size_t n = 0;                    // total pixels binned
};

// Mean over pixels of (g - y) for one channel; signed, in [-1, 1].
double volume_bias(const InstanceVolume& v, Channel c);

struct EceResult {
    double ece = 0.0;
    BinnedCalibrationStats stats;
};

// Binned expected calibration error: sum_b (count_b/n) * |conf_b - acc_b|.
EceResult ece(const InstanceVolume& v, Channel c, std::size_t n_bins = kDefaultEceBins);

// The two sides of the binned |volume bias| <= ece identity. Both fold the
// bins in the same order, which makes the inequality hold in floating point
// and not only in exact arithmetic.
double ece_from_stats(const BinnedCalibrationStats& s);
double binned_volume_bias(const BinnedCalibrationStats& s);

// Per-channel conformal quantiles of the per-instance statistic
// (|volume_bias| or ece), each at level 1 - delta/2. Either value may be the
// +infinity sentinel when the rank overflows.
std::pair<double, double> fit_calibration_quantiles(std::span<const InstanceVolume> val,
                                                    double delta,
                                                    BiasSource source,
                                                    std::size_t n_bins = kDefaultEceBins);

struct CalibrationBounds {
    double eps_l = 0.0;      // r_hat - lower bound
    double eps_u = 0.0;      // upper bound - r_hat
    bool degenerate = false;
};

// Asymmetric calibration bounds around the point ratio:
//   lower = (mean_a - q_a) / (mean_b + q_b)
//   upper = (mean_a + q_a) / (mean_b - q_b)
// Bounds leaving [0,1] (or a nonpositive upper denominator) are clipped and
// flagged rather than raised, so batch runs never abort mid-way.
CalibrationBounds calibration_interval(const InstanceVolume& v, double q_a, double q_b);

// Same computation from precomputed channel means; r_hat is the already
// clipped point ratio the widths are measured from.
CalibrationBounds calibration_bounds_from_means(double mean_a, double mean_b,
                                                double q_a, double q_b, double r_hat);

} // namespace care
