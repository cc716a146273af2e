#include "care/pipeline.hpp"

#include <cmath>
#include <vector>

#include "care/estimators.hpp"
#include "care/quantile.hpp"

namespace care {

namespace {

IntervalEstimate compose_care(double r_hat, const CalibrationBounds& cal, double beta,
                              const BudgetSplit& split, BiasSource source) {
    const double lo_raw = r_hat - cal.eps_l - beta;
    const double hi_raw = r_hat + cal.eps_u + beta;
    IntervalEstimate out;
    out.r_hat = r_hat;
    out.lower = clip01(lo_raw);
    out.upper = clip01(hi_raw);
    out.method = source == BiasSource::VBias ? Method::CareVBias : Method::CareEce;
    out.alpha = split.alpha;
    out.delta = split.delta;
    out.degenerate = cal.degenerate || lo_raw < 0.0 || hi_raw > 1.0;
    return out;
}

} // namespace

BudgetSplit make_budget_split(double alpha, double delta) {
    BudgetSplit split{alpha, delta, 1.0 - alpha - delta};
    validate(split);
    return split;
}

void validate(const BudgetSplit& split) {
    if (!(split.alpha > 0.0) || !(split.delta > 0.0) || !(split.alpha + split.delta < 1.0))
        throw BadConfidenceBudget("budget split needs alpha > 0, delta > 0, alpha + delta < 1");
    if (std::abs(split.alpha + split.delta - (1.0 - split.confidence)) > 1e-12)
        throw BadConfidenceBudget("budget split does not add up to 1 - confidence");
}

IntervalEstimate care_interval(const InstanceVolume& v, const CalibrationProfile& profile,
                               const BudgetSplit& split) {
    validate(split);
    if (std::abs(profile.delta - split.delta) > 1e-9)
        throw ProfileMismatch("profile was fitted at delta=" + std::to_string(profile.delta) +
                              ", split wants delta=" + std::to_string(split.delta));
    const double r_hat = point_ratio(v);
    const double se = squared_error_estimate(ratio_moments(v));
    const double beta = std::sqrt(se) / std::sqrt(split.alpha);
    const CalibrationBounds cal = calibration_interval(v, profile.q_a, profile.q_b);
    return compose_care(r_hat, cal, beta, split, profile.source);
}

GridSearchResult grid_search(std::span<const InstanceVolume> val, double confidence,
                             double grid_step, BiasSource source, std::size_t n_bins) {
    if (val.empty()) throw EmptyCalibrationSet();
    if (!(confidence > 0.0 && confidence < 1.0))
        throw BadConfidenceBudget("confidence must lie in (0,1)");
    const double budget = 1.0 - confidence;
    if (!(grid_step > 0.0) || grid_step > budget / 2.0 + 1e-12)
        throw BadConfidenceBudget("grid step does not fit the confidence budget");

    // per-instance state reused by every candidate split
    const std::size_t n = val.size();
    std::vector<double> r_gt(n), r_hat(n), se(n), mean_a(n), mean_b(n);
    std::vector<double> stat_a(n), stat_b(n);
    for (std::size_t i = 0; i < n; ++i) {
        const InstanceVolume& v = val[i];
        r_gt[i] = labeled_ratio(v);
        r_hat[i] = point_ratio(v);
        se[i] = squared_error_estimate(ratio_moments(v));
        const double dn = static_cast<double>(v.n_pixels());
        mean_a[i] = soft_volume(v, Channel::A) / dn;
        mean_b[i] = soft_volume(v, Channel::B) / dn;
        if (source == BiasSource::VBias) {
            stat_a[i] = std::abs(volume_bias(v, Channel::A));
            stat_b[i] = std::abs(volume_bias(v, Channel::B));
        } else {
            stat_a[i] = ece(v, Channel::A, n_bins).ece;
            stat_b[i] = ece(v, Channel::B, n_bins).ece;
        }
    }

    GridSearchResult best;
    GridSearchResult fallback;  // highest coverage if nothing qualifies
    bool have_best = false, have_fallback = false;
    const double dn_val = static_cast<double>(n);

    for (std::size_t i = 1;; ++i) {
        const double alpha = static_cast<double>(i) * grid_step;
        if (alpha > budget - grid_step + 1e-12) break;
        const double delta = budget - alpha;
        const double level = 1.0 - delta / 2.0;
        const double q_a = conformal_quantile(stat_a, level);
        const double q_b = conformal_quantile(stat_b, level);

        std::size_t covered = 0;
        double width_sum = 0.0;
        const double sqrt_alpha = std::sqrt(alpha);
        for (std::size_t j = 0; j < n; ++j) {
            const double beta = std::sqrt(se[j]) / sqrt_alpha;
            const CalibrationBounds cal =
                calibration_bounds_from_means(mean_a[j], mean_b[j], q_a, q_b, r_hat[j]);
            const double lower = clip01(r_hat[j] - cal.eps_l - beta);
            const double upper = clip01(r_hat[j] + cal.eps_u + beta);
            if (lower <= r_gt[j] && r_gt[j] <= upper) ++covered;
            width_sum += upper - lower;
        }
        GridSearchResult cand;
        cand.split = BudgetSplit{alpha, delta, confidence};
        cand.val_coverage = static_cast<double>(covered) / dn_val;
        cand.val_mean_width = width_sum / dn_val;
        cand.coverage_met = cand.val_coverage >= confidence - 1e-12;

        if (cand.coverage_met) {
            if (!have_best || cand.val_mean_width < best.val_mean_width) {
                best = cand;
                have_best = true;
            }
        }
        if (!have_fallback || cand.val_coverage > fallback.val_coverage ||
            (cand.val_coverage == fallback.val_coverage &&
             cand.val_mean_width < fallback.val_mean_width)) {
            fallback = cand;
            have_fallback = true;
        }
    }
    if (have_best) return best;
    return fallback;  // coverage_met stays false
}

UncertaintyDecomposition decompose_uncertainty(const InstanceVolume& v,
                                               const CalibrationProfile& vbias_profile,
                                               const CalibrationProfile& ece_profile,
                                               const BudgetSplit& split) {
    validate(split);
    if (vbias_profile.source != BiasSource::VBias || ece_profile.source != BiasSource::Ece)
        throw ProfileMismatch("decompose expects a v-bias profile and an ece profile");
    const double r_hat = point_ratio(v);
    const double se = squared_error_estimate(ratio_moments(v));
    const double beta = std::sqrt(se) / std::sqrt(split.alpha);
    const IntervalEstimate est = markov_interval(r_hat, se, split.alpha);
    const CalibrationBounds cal_v = calibration_interval(v, vbias_profile.q_a, vbias_profile.q_b);
    const CalibrationBounds cal_e = calibration_interval(v, ece_profile.q_a, ece_profile.q_b);
    const IntervalEstimate overall = compose_care(r_hat, cal_e, beta, split, BiasSource::Ece);
    UncertaintyDecomposition out;
    out.i_est = est.width();
    out.i_vbias = cal_v.eps_l + cal_v.eps_u;
    out.i_ece = cal_e.eps_l + cal_e.eps_u;
    out.i_overall = overall.width();
    return out;
}

std::string_view to_string(AlarmFlag f) {
    switch (f) {
        case AlarmFlag::ClearBelow: return "CLEAR_BELOW";
        case AlarmFlag::ClearAbove: return "CLEAR_ABOVE";
        case AlarmFlag::Review: return "REVIEW";
    }
    return "unknown";
}

AlarmFlag threshold_alarm(const IntervalEstimate& interval, double threshold) {
    if (interval.upper < threshold) return AlarmFlag::ClearBelow;
    if (interval.lower > threshold) return AlarmFlag::ClearAbove;
    return AlarmFlag::Review;
}

} // namespace care
