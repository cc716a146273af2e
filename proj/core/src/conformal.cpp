#include "care/conformal.hpp"

#include <cmath>
#include <vector>

#include "care/quantile.hpp"

namespace care {

namespace {

void validate_spec(const UncertaintySpec& spec) {
    if (!(spec.epsilon > 0.0))
        throw ConfigError("uncertainty epsilon must be positive");
    switch (spec.kind) {
        case UncertaintyKind::Unit:
            break;
        case UncertaintyKind::SizeScaled:
        case UncertaintyKind::SizeNoLambda:
            if (!(spec.v_t_max > 0.0))
                throw ConfigError("size-based uncertainty needs v_t_max > 0");
            break;
        case UncertaintyKind::VoxelFraction:
            if (!(spec.voxel_volume > 0.0))
                throw ConfigError("voxel-fraction uncertainty needs voxel_volume > 0");
            break;
    }
}

// The size term before any lambda scaling.
double raw_size_term(double v_t, const UncertaintySpec& spec) {
    switch (spec.kind) {
        case UncertaintyKind::Unit:
            return 1.0;
        case UncertaintyKind::SizeScaled:
        case UncertaintyKind::SizeNoLambda:
            return 1.0 - v_t / (spec.v_t_max + spec.epsilon);
        case UncertaintyKind::VoxelFraction:
            return 1.0 - v_t / (spec.voxel_volume / 8.0);
    }
    return 1.0;
}

double lambda_from_q(double q_score) {
    // zero or overflowing quantiles fall back to lambda = 1
    return (std::isfinite(q_score) && q_score > 0.0) ? 1.0 / (2.0 * q_score) : 1.0;
}

} // namespace

std::string_view to_string(UncertaintyKind k) {
    switch (k) {
        case UncertaintyKind::Unit: return "unit";
        case UncertaintyKind::SizeScaled: return "size_scaled";
        case UncertaintyKind::SizeNoLambda: return "size_no_lambda";
        case UncertaintyKind::VoxelFraction: return "voxel_fraction";
    }
    return "unknown";
}

UncertaintyKind parse_uncertainty_kind(std::string_view name) {
    if (name == "unit") return UncertaintyKind::Unit;
    if (name == "size_scaled") return UncertaintyKind::SizeScaled;
    if (name == "size_no_lambda") return UncertaintyKind::SizeNoLambda;
    if (name == "voxel_fraction") return UncertaintyKind::VoxelFraction;
    throw ConfigError("unknown uncertainty kind '" + std::string(name) + "'");
}

double fit_cqr(std::span<const RatioPair> val_pairs, double delta) {
    if (val_pairs.empty()) throw EmptyCalibrationSet();
    std::vector<double> residuals;
    residuals.reserve(val_pairs.size());
    for (const RatioPair& p : val_pairs)
        residuals.push_back(std::abs(p.r_gt - p.r_hat));
    return conformal_quantile(residuals, 1.0 - delta);
}

IntervalEstimate cqr_interval(double r_hat, double q_residual, double delta) {
    IntervalEstimate out;
    out.r_hat = r_hat;
    out.method = Method::Cqr;
    out.alpha = 0.0;
    out.delta = delta;
    if (!std::isfinite(q_residual)) {
        out.lower = 0.0;
        out.upper = 1.0;
        out.degenerate = true;
        return out;
    }
    const double lo_raw = r_hat - q_residual;
    const double hi_raw = r_hat + q_residual;
    out.lower = clip01(lo_raw);
    out.upper = clip01(hi_raw);
    out.degenerate = lo_raw < 0.0 || hi_raw > 1.0;
    return out;
}

double uncertainty_measure_from_size(double v_t, const UncertaintySpec& spec,
                                     std::optional<double> q_score_for_lambda) {
    validate_spec(spec);
    double u = raw_size_term(v_t, spec);
    if (spec.kind == UncertaintyKind::SizeScaled) {
        if (!q_score_for_lambda)
            throw ConfigError("size-scaled uncertainty needs the fitted score quantile");
        u *= lambda_from_q(*q_score_for_lambda);
    }
    return std::max(u, spec.epsilon);
}

double uncertainty_measure(const InstanceVolume& v, const UncertaintySpec& spec,
                           std::optional<double> q_score_for_lambda) {
    return uncertainty_measure_from_size(soft_volume(v, Channel::B), spec, q_score_for_lambda);
}

AcqrFit fit_acqr(std::span<const AcqrObservation> val, double delta, const UncertaintySpec& spec) {
    if (val.empty()) throw EmptyCalibrationSet();
    validate_spec(spec);
    // pass 1: scores with lambda = 1
    std::vector<double> scores;
    scores.reserve(val.size());
    for (const AcqrObservation& obs : val) {
        const double u = std::max(raw_size_term(obs.v_t, spec), spec.epsilon);
        scores.push_back(std::abs(obs.r_gt - obs.r_hat) / u);
    }
    AcqrFit fit;
    fit.q_score = conformal_quantile(scores, 1.0 - delta);
    // pass 2: scale so the widest interval spans the full ratio range
    if (spec.kind == UncertaintyKind::SizeScaled) {
        if (std::isfinite(fit.q_score) && fit.q_score > 0.0) {
            fit.lambda = 1.0 / (2.0 * fit.q_score);
        } else {
            fit.lambda = 1.0;
            fit.lambda_fallback = true;
        }
    }
    return fit;
}

IntervalEstimate acqr_interval(double r_hat, double u, double q_score, double delta) {
    if (!(u > 0.0)) throw ConfigError("uncertainty measure must be positive");
    IntervalEstimate out;
    out.r_hat = r_hat;
    out.method = Method::Acqr;
    out.alpha = 0.0;
    out.delta = delta;
    if (!std::isfinite(q_score)) {
        out.lower = 0.0;
        out.upper = 1.0;
        out.degenerate = true;
        return out;
    }
    const double half = u * q_score;
    const double lo_raw = r_hat - half;
    const double hi_raw = r_hat + half;
    out.lower = clip01(lo_raw);
    out.upper = clip01(hi_raw);
    out.degenerate = lo_raw < 0.0 || hi_raw > 1.0;
    return out;
}

} // namespace care
