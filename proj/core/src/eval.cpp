#include "care/eval.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "care/estimators.hpp"
#include "care/quantile.hpp"

namespace care {

namespace {

double mean_or_zero(double sum, std::size_t n) {
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

StratumReport aggregate_stratum(std::string label, std::span<const EvalPair> pairs,
                                std::span<const std::size_t> members) {
    StratumReport s;
    s.label = std::move(label);
    s.n = members.size();
    std::size_t covered = 0;
    double width_sum = 0.0, sq_err_sum = 0.0;
    for (std::size_t idx : members) {
        const EvalPair& p = pairs[idx];
        if (p.interval.covers(p.r_gt)) ++covered;
        width_sum += p.interval.width();
        const double err = p.interval.r_hat - p.r_gt;
        sq_err_sum += err * err;
    }
    s.coverage = mean_or_zero(static_cast<double>(covered), s.n);
    s.mean_width = mean_or_zero(width_sum, s.n);
    s.mse_r = mean_or_zero(sq_err_sum, s.n);
    return s;
}

} // namespace

double coverage_rate(std::span<const EvalPair> pairs) {
    if (pairs.empty()) throw EmptyTestSet();
    std::size_t covered = 0;
    for (const EvalPair& p : pairs)
        if (p.interval.covers(p.r_gt)) ++covered;
    return static_cast<double>(covered) / static_cast<double>(pairs.size());
}

std::vector<StratumReport> stratify_by_size(std::span<const InstanceVolume> instances,
                                            std::span<const EvalPair> pairs,
                                            bool* single_stratum) {
    if (instances.size() != pairs.size())
        throw ConfigError("stratify_by_size needs instances aligned with pairs");
    if (pairs.empty()) throw EmptyTestSet();
    const std::size_t n = instances.size();
    std::vector<double> sizes(n);
    for (std::size_t i = 0; i < n; ++i) sizes[i] = soft_volume(instances[i], Channel::B);

    if (single_stratum) *single_stratum = n < 3;
    if (n < 3) {
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        return {aggregate_stratum("L", pairs, all)};
    }

    const double t1 = nearest_rank_quantile(sizes, 1.0 / 3.0);
    const double t2 = nearest_rank_quantile(sizes, 2.0 / 3.0);
    std::vector<std::size_t> small, medium, large;
    for (std::size_t i = 0; i < n; ++i) {
        if (sizes[i] <= t1)
            small.push_back(i);
        else if (sizes[i] <= t2)
            medium.push_back(i);
        else
            large.push_back(i);
    }
    return {aggregate_stratum("S", pairs, small), aggregate_stratum("M", pairs, medium),
            aggregate_stratum("L", pairs, large)};
}

CoverageReport make_report(Method method, std::span<const InstanceVolume> instances,
                           std::span<const EvalPair> pairs) {
    CoverageReport r;
    r.method = method;
    r.n = pairs.size();
    r.coverage = coverage_rate(pairs);
    std::vector<double> widths;
    widths.reserve(pairs.size());
    double width_sum = 0.0, sq_err_sum = 0.0;
    for (const EvalPair& p : pairs) {
        widths.push_back(p.interval.width());
        width_sum += p.interval.width();
        const double err = p.interval.r_hat - p.r_gt;
        sq_err_sum += err * err;
    }
    r.mean_width = width_sum / static_cast<double>(pairs.size());
    std::sort(widths.begin(), widths.end());
    const std::size_t mid = widths.size() / 2;
    r.median_width = widths.size() % 2 == 1 ? widths[mid]
                                            : 0.5 * (widths[mid - 1] + widths[mid]);
    r.mse_r = sq_err_sum / static_cast<double>(pairs.size());
    r.strata = stratify_by_size(instances, pairs, &r.single_stratum);
    return r;
}

IntervalEstimate compute_interval(const InstanceVolume& v, const MethodConfig& cfg,
                                  double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0))
        throw BadConfidenceBudget("confidence must lie in (0,1)");
    const double delta_conf = 1.0 - confidence;
    switch (cfg.method) {
        case Method::Cqr:
            return cqr_interval(point_ratio(v), cfg.profile.q_residual, delta_conf);
        case Method::Acqr: {
            const double u = uncertainty_measure(v, cfg.uncertainty, cfg.profile.q_score);
            IntervalEstimate est =
                acqr_interval(point_ratio(v), u, cfg.profile.q_score, delta_conf);
            // with the unit measure the scores are plain residuals and the
            // interval is the CQR interval; tag it as such
            if (cfg.uncertainty.kind == UncertaintyKind::Unit) est.method = Method::Cqr;
            return est;
        }
        case Method::CareVBias:
            if (cfg.profile.source != BiasSource::VBias)
                throw ProfileMismatch("care_vbias needs a v-bias profile");
            return care_interval(v, cfg.profile, cfg.split);
        case Method::CareEce:
            if (cfg.profile.source != BiasSource::Ece)
                throw ProfileMismatch("care_ece needs an ece profile");
            return care_interval(v, cfg.profile, cfg.split);
        case Method::MarkovOnly: {
            const double r_hat = point_ratio(v);
            const double se = squared_error_estimate(ratio_moments(v));
            return markov_interval(r_hat, se, delta_conf);
        }
        case Method::Bootstrap:
            return bootstrap_interval(v, cfg.resample);
        case Method::Subsample:
            return subsample_interval(v, cfg.subsample_frac, cfg.resample);
    }
    throw ConfigError("unhandled method");
}

std::vector<CoverageReport> compare_methods(std::span<const InstanceVolume> test,
                                            std::span<const MethodConfig> methods,
                                            double confidence) {
    std::vector<CoverageReport> reports;
    reports.reserve(methods.size());
    for (const MethodConfig& cfg : methods) {
        std::vector<EvalPair> pairs;
        pairs.reserve(test.size());
        for (const InstanceVolume& v : test)
            pairs.push_back({compute_interval(v, cfg, confidence), labeled_ratio(v)});
        const Method effective = pairs.empty() ? cfg.method : pairs.front().interval.method;
        reports.push_back(make_report(effective, test, pairs));
    }
    std::stable_sort(reports.begin(), reports.end(),
                     [](const CoverageReport& a, const CoverageReport& b) {
                         return static_cast<int>(a.method) < static_cast<int>(b.method);
                     });
    return reports;
}

FitResult fit_profile(std::span<const InstanceVolume> val, const FitOptions& options) {
    if (val.empty()) throw EmptyCalibrationSet();
    const GridSearchResult grid =
        grid_search(val, options.confidence, options.grid_step, options.source, options.n_bins);
    const auto [q_a, q_b] =
        fit_calibration_quantiles(val, grid.split.delta, options.source, options.n_bins);

    std::vector<RatioPair> pairs;
    std::vector<AcqrObservation> observations;
    pairs.reserve(val.size());
    observations.reserve(val.size());
    double v_t_max = 0.0;
    for (const InstanceVolume& v : val) {
        const double rg = labeled_ratio(v);
        const double rh = point_ratio(v);
        const double vt = soft_volume(v, Channel::B);
        pairs.push_back({rg, rh});
        observations.push_back({rg, rh, vt});
        v_t_max = std::max(v_t_max, vt);
    }
    const double delta_conf = 1.0 - options.confidence;
    const double q_residual = fit_cqr(pairs, delta_conf);
    const UncertaintySpec spec{options.u_kind, v_t_max, options.voxel_volume, options.epsilon};
    const AcqrFit acqr = fit_acqr(observations, delta_conf, spec);

    FitResult out;
    out.profile.q_a = q_a;
    out.profile.q_b = q_b;
    out.profile.source = options.source;
    out.profile.q_residual = q_residual;
    out.profile.q_score = acqr.q_score;
    out.profile.v_t_max = v_t_max;
    out.profile.delta = grid.split.delta;
    out.profile.n_val = val.size();
    out.split = grid.split;
    out.lambda = acqr.lambda;
    out.lambda_fallback = acqr.lambda_fallback;
    out.coverage_met = grid.coverage_met;
    out.val_coverage = grid.val_coverage;
    out.val_mean_width = grid.val_mean_width;
    return out;
}

} // namespace care
