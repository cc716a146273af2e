#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "care/types.hpp"

namespace care {

enum class UncertaintyKind { Unit, SizeScaled, SizeNoLambda, VoxelFraction };

std::string_view to_string(UncertaintyKind k);
UncertaintyKind parse_uncertainty_kind(std::string_view name);

// Size-based uncertainty measure u(x). SizeScaled multiplies the size term
// by lambda = 1/(2 q_score) so the widest possible interval spans the full
// ratio range; VoxelFraction divides by voxel_volume/8.
struct UncertaintySpec {
    UncertaintyKind kind = UncertaintyKind::Unit;
    double v_t_max = 0.0;       // SizeScaled / SizeNoLambda
    double voxel_volume = 0.0;  // VoxelFraction
    double epsilon = 1e-6;      // floor; keeps u strictly positive
};

struct RatioPair {
    double r_gt = 0.0;
    double r_hat = 0.0;
};

// Conformal quantile of absolute residuals |r_gt - r_hat| at level 1-delta.
double fit_cqr(std::span<const RatioPair> val_pairs, double delta);

// [r_hat - q, r_hat + q] clipped to [0,1]; the infinite sentinel maps to
// the full-width interval. delta is only recorded in the result.
IntervalEstimate cqr_interval(double r_hat, double q_residual, double delta = 0.0);

// u(x) for one instance; v_t is the predicted soft volume of channel B, so
// the measure is computable at test time without labels.
double uncertainty_measure(const InstanceVolume& v, const UncertaintySpec& spec,
                           std::optional<double> q_score_for_lambda = std::nullopt);
double uncertainty_measure_from_size(double v_t, const UncertaintySpec& spec,
                                     std::optional<double> q_score_for_lambda = std::nullopt);

struct AcqrObservation {
    double r_gt = 0.0;
    double r_hat = 0.0;
    double v_t = 0.0;  // soft volume of channel B
};

struct AcqrFit {
    double q_score = 0.0;
    double lambda = 1.0;
    // set when all validation scores were zero (or the rank overflowed) and
    // lambda fell back to 1
    bool lambda_fallback = false;
};

// Two passes: scores are fitted with lambda = 1, then lambda = 1/(2 q) is
// chosen so that u_max * 2q = 1 (full ratio range). The paper's definition
// is circular (q depends on u which depends on lambda which depends on q);
// this is the fixed break of that cycle.
AcqrFit fit_acqr(std::span<const AcqrObservation> val, double delta, const UncertaintySpec& spec);

// [r_hat - u q, r_hat + u q] clipped to [0,1].
IntervalEstimate acqr_interval(double r_hat, double u, double q_score, double delta = 0.0);

} // namespace care
