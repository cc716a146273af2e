#pragma once

#include <span>

#include "care/calibration.hpp"
#include "care/types.hpp"

namespace care {

// Partition of the allowed miscoverage 1-C between the estimation bound
// (alpha) and the calibration bound (delta).
struct BudgetSplit {
    double alpha = 0.0;
    double delta = 0.0;
    double confidence = 0.0;
};

BudgetSplit make_budget_split(double alpha, double delta);
void validate(const BudgetSplit& split);  // throws BadConfidenceBudget

// The combined interval: [r_hat - eps_l - beta, r_hat + eps_u + beta]
// clipped to [0,1], where beta is the Markov half-width at split.alpha and
// (eps_l, eps_u) come from the profile's calibration quantiles.
IntervalEstimate care_interval(const InstanceVolume& v, const CalibrationProfile& profile,
                               const BudgetSplit& split);

struct GridSearchResult {
    BudgetSplit split;
    double val_coverage = 0.0;
    double val_mean_width = 0.0;
    bool coverage_met = false;  // false: no split reached the target, best coverage returned
};

// Enumerates alpha in {step, 2 step, ...} with alpha + delta = 1 - confidence,
// refits the calibration quantiles per candidate, and returns the narrowest
// split whose validation coverage reaches the confidence target.
GridSearchResult grid_search(std::span<const InstanceVolume> val, double confidence,
                             double grid_step, BiasSource source,
                             std::size_t n_bins = kDefaultEceBins);

struct UncertaintyDecomposition {
    double i_est = 0.0;      // width of the Markov interval alone
    double i_vbias = 0.0;    // width of the V-Bias calibration interval alone
    double i_ece = 0.0;      // width of the ECE calibration interval alone
    double i_overall = 0.0;  // width of the composed interval (ECE quantiles)
};

UncertaintyDecomposition decompose_uncertainty(const InstanceVolume& v,
                                               const CalibrationProfile& vbias_profile,
                                               const CalibrationProfile& ece_profile,
                                               const BudgetSplit& split);

enum class AlarmFlag { ClearBelow, ClearAbove, Review };

std::string_view to_string(AlarmFlag f);

// Review whenever the interval touches the threshold; boundary equality is
// treated as a review case.
AlarmFlag threshold_alarm(const IntervalEstimate& interval, double threshold);

} // namespace care
