#pragma once

#include <span>
#include <string>
#include <vector>

#include "care/baselines.hpp"
#include "care/conformal.hpp"
#include "care/pipeline.hpp"
#include "care/types.hpp"

namespace care {

struct EvalPair {
    IntervalEstimate interval;
    double r_gt = 0.0;
};

struct StratumReport {
    std::string label;  // "S", "M", "L"
    std::size_t n = 0;
    double coverage = 0.0;
    double mean_width = 0.0;
    double mse_r = 0.0;
};

struct CoverageReport {
    Method method = Method::Cqr;
    std::size_t n = 0;
    double coverage = 0.0;
    double mean_width = 0.0;
    double median_width = 0.0;
    double mse_r = 0.0;
    std::vector<StratumReport> strata;
    bool single_stratum = false;  // fewer than 3 instances, everything in "L"
};

// Fraction of pairs with lower <= r_gt <= upper (closed at the boundaries).
double coverage_rate(std::span<const EvalPair> pairs);

// Size terciles of soft_volume(B) define S/M/L; boundary ties go to the
// lower stratum. Fewer than 3 instances collapse into a single "L" stratum.
std::vector<StratumReport> stratify_by_size(std::span<const InstanceVolume> instances,
                                            std::span<const EvalPair> pairs,
                                            bool* single_stratum = nullptr);

CoverageReport make_report(Method method, std::span<const InstanceVolume> instances,
                           std::span<const EvalPair> pairs);

// Everything needed to build intervals for one method; the dispatcher below
// is shared by compare_methods and the command-line tool.
struct MethodConfig {
    Method method = Method::Cqr;
    CalibrationProfile profile;
    BudgetSplit split;            // care / markov budgets
    UncertaintySpec uncertainty;  // acqr
    double subsample_frac = 0.1;
    ResampleParams resample;
};

IntervalEstimate compute_interval(const InstanceVolume& v, const MethodConfig& cfg,
                                  double confidence);

// One report per method over identical instances, ordered by method enum.
std::vector<CoverageReport> compare_methods(std::span<const InstanceVolume> test,
                                            std::span<const MethodConfig> methods,
                                            double confidence);

struct FitOptions {
    double confidence = 0.68;
    BiasSource source = BiasSource::VBias;
    std::size_t n_bins = kDefaultEceBins;
    double grid_step = 0.02;
    UncertaintyKind u_kind = UncertaintyKind::SizeScaled;
    double epsilon = 1e-6;
    double voxel_volume = 0.0;
};

struct FitResult {
    CalibrationProfile profile;
    BudgetSplit split;
    double lambda = 1.0;
    bool lambda_fallback = false;
    bool coverage_met = true;
    double val_coverage = 0.0;
    double val_mean_width = 0.0;
};

// Full fitting pass over a labeled validation set: grid search for the
// budget split, calibration quantiles at the chosen delta, and the CQR/ACQR
// quantiles at delta = 1 - confidence.
FitResult fit_profile(std::span<const InstanceVolume> val, const FitOptions& options);

} // namespace care
