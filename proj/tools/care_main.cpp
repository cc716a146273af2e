// care: confidence intervals for ratio-based biomarkers computed from
// per-pixel segmentation probabilities.
//
// Subcommands: synth, fit, estimate, eval, decompose, alarm.
// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 computation
// error. Errors mention the instance id where one applies.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "care/care.hpp"
#include "care/parallel.hpp"

namespace fs = std::filesystem;

namespace {

struct LoadedDataset {
    care::io::DatasetManifest manifest;
    std::vector<care::InstanceVolume> volumes;
};

LoadedDataset load_dataset(const fs::path& manifest_path, bool need_labels) {
    LoadedDataset data;
    data.manifest = care::io::read_manifest(manifest_path);
    const fs::path dir = manifest_path.parent_path();
    data.volumes.reserve(data.manifest.instances.size());
    for (const care::io::ManifestEntry& entry : data.manifest.instances) {
        care::InstanceVolume v = care::io::load_instance(dir, entry);
        if (need_labels && !v.has_labels())
            throw care::LabelsRequired("instance '" + entry.id + "' has no labels");
        data.volumes.push_back(std::move(v));
    }
    return data;
}

std::string format_metric(double value) { return care::io::format_double(value); }

int run_synth(const fs::path& config_path, const fs::path& out_dir) {
    const care::SynthConfig config = care::io::read_synth_config(config_path);
    fs::create_directories(out_dir);
    const std::vector<care::SynthInstance> instances = care::generate(config);
    care::io::DatasetManifest manifest;
    for (const care::SynthInstance& inst : instances) {
        const std::string file = inst.volume.id + ".cvol";
        care::io::write_volume(out_dir / file, inst.volume);
        care::io::ManifestEntry entry;
        entry.id = inst.volume.id;
        entry.file = file;
        entry.n_pixels = inst.volume.n_pixels();
        entry.has_labels = inst.volume.has_labels();
        entry.metadata["true_ratio"] = care::io::format_double(inst.true_ratio);
        entry.metadata["prevalence"] = care::io::format_double(inst.prevalence);
        manifest.instances.push_back(std::move(entry));
    }
    care::io::write_manifest(out_dir / "manifest.json", manifest);
    std::cout << "wrote " << instances.size() << " instances to " << out_dir.string() << "\n";
    return 0;
}

int run_fit(const fs::path& val_path, const care::FitOptions& options, const fs::path& out_path) {
    const LoadedDataset val = load_dataset(val_path, /*need_labels=*/true);
    const care::FitResult fit = care::fit_profile(val.volumes, options);
    care::io::ProfileFile file;
    file.profile = fit.profile;
    file.split = fit.split;
    file.lambda = fit.lambda;
    file.lambda_fallback = fit.lambda_fallback;
    file.u_kind = options.u_kind;
    file.epsilon = options.epsilon;
    file.voxel_volume = options.voxel_volume;
    file.n_bins = options.n_bins;
    file.coverage_met = fit.coverage_met;
    care::io::write_profile(out_path, file);
    std::cout << "fit " << to_string(options.source) << " profile on " << val.volumes.size()
              << " instances: alpha=" << format_metric(fit.split.alpha)
              << " delta=" << format_metric(fit.split.delta)
              << " val_coverage=" << format_metric(fit.val_coverage)
              << " val_mean_width=" << format_metric(fit.val_mean_width) << "\n";
    if (!fit.coverage_met)
        std::cerr << "warning: no grid split reached the confidence target; "
                     "kept the best-covering split\n";
    if (fit.lambda_fallback)
        std::cerr << "warning: degenerate score quantile, lambda fell back to 1\n";
    return 0;
}

care::MethodConfig method_config_from_profile(const std::string& method_name,
                                              const care::io::ProfileFile& profile,
                                              double subsample_frac,
                                              const care::ResampleParams& resample) {
    care::MethodConfig cfg;
    cfg.profile = profile.profile;
    cfg.split = profile.split;
    cfg.subsample_frac = subsample_frac;
    cfg.resample = resample;
    cfg.uncertainty = care::UncertaintySpec{profile.u_kind, profile.profile.v_t_max,
                                            profile.voxel_volume, profile.epsilon};
    if (method_name == "acqr_unit") {
        // unit-measure ACQR is definitionally CQR; rows come out tagged cqr
        cfg.method = care::Method::Acqr;
        cfg.uncertainty.kind = care::UncertaintyKind::Unit;
    } else if (method_name == "markov") {
        cfg.method = care::Method::MarkovOnly;
    } else {
        cfg.method = care::parse_method(method_name);
    }
    return cfg;
}

int run_estimate(const fs::path& in_path, const fs::path& profile_path,
                 const std::string& method_name, double subsample_frac,
                 const care::ResampleParams& resample, const fs::path& out_path) {
    const care::io::ProfileFile profile = care::io::read_profile(profile_path);
    const care::MethodConfig cfg =
        method_config_from_profile(method_name, profile, subsample_frac, resample);
    const LoadedDataset data = load_dataset(in_path, /*need_labels=*/false);

    const std::size_t n = data.volumes.size();
    std::vector<std::optional<care::io::ResultRow>> rows(n);
    std::vector<std::string> errors(n);
    care::parallel_for(n, [&](std::size_t i) {
        try {
            care::io::ResultRow row;
            row.id = data.volumes[i].id;
            row.interval = care::compute_interval(data.volumes[i], cfg, profile.split.confidence);
            rows[i] = std::move(row);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    std::vector<care::io::ResultRow> ok;
    ok.reserve(n);
    std::size_t failed = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i]) {
            ok.push_back(std::move(*rows[i]));
        } else {
            ++failed;
            std::cerr << "error: instance '" << data.volumes[i].id << "': " << errors[i] << "\n";
        }
    }
    if (!ok.empty() || n == 0) {
        std::stable_sort(ok.begin(), ok.end(),
                         [](const care::io::ResultRow& a, const care::io::ResultRow& b) {
                             return a.id < b.id;
                         });
        care::io::write_results(out_path, ok);
    }
    if (failed == n && n > 0)
        throw care::Error("estimation failed on every instance");
    std::cout << "estimated " << ok.size() << " instances with " << method_name;
    if (failed > 0) std::cout << " (" << failed << " failed)";
    std::cout << "\n";
    return 0;
}

int run_eval(const fs::path& in_path, const fs::path& results_path, const fs::path& out_path) {
    const LoadedDataset data = load_dataset(in_path, /*need_labels=*/true);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < data.volumes.size(); ++i) index[data.volumes[i].id] = i;

    const std::vector<care::io::ResultRow> rows = care::io::read_results(results_path);
    if (rows.empty()) throw care::EmptyTestSet("results file has no rows");

    // group rows by method, keep file order within a group
    std::map<care::Method, std::vector<const care::io::ResultRow*>> by_method;
    for (const care::io::ResultRow& row : rows) {
        if (!index.count(row.id))
            throw care::FormatError("results reference unknown instance id '" + row.id + "'");
        by_method[row.interval.method].push_back(&row);
    }

    std::string text;
    std::string csv = "method,stratum,n,coverage,mean_width,mse_r\n";
    for (const auto& [method, group] : by_method) {
        std::vector<care::InstanceVolume> instances;
        std::vector<care::EvalPair> pairs;
        instances.reserve(group.size());
        pairs.reserve(group.size());
        for (const care::io::ResultRow* row : group) {
            const care::InstanceVolume& v = data.volumes[index[row->id]];
            instances.push_back(v);
            pairs.push_back({row->interval, care::labeled_ratio(v)});
        }
        const care::CoverageReport report = care::make_report(method, instances, pairs);
        text += "method: " + std::string(to_string(report.method)) + "\n";
        text += "n: " + std::to_string(report.n) + "\n";
        text += "coverage: " + format_metric(report.coverage) + "\n";
        text += "mean_width: " + format_metric(report.mean_width) + "\n";
        text += "median_width: " + format_metric(report.median_width) + "\n";
        text += "mse_r: " + format_metric(report.mse_r) + "\n";
        if (report.single_stratum)
            text += "note: fewer than 3 instances, single stratum\n";
        text += "strata:\n";
        for (const care::StratumReport& s : report.strata) {
            text += "  " + s.label + " n=" + std::to_string(s.n) +
                    " coverage=" + format_metric(s.coverage) +
                    " mean_width=" + format_metric(s.mean_width) +
                    " mse_r=" + format_metric(s.mse_r) + "\n";
            csv += std::string(to_string(report.method)) + "," + s.label + "," +
                   std::to_string(s.n) + "," + format_metric(s.coverage) + "," +
                   format_metric(s.mean_width) + "," + format_metric(s.mse_r) + "\n";
        }
        csv += std::string(to_string(report.method)) + ",ALL," + std::to_string(report.n) + "," +
               format_metric(report.coverage) + "," + format_metric(report.mean_width) + "," +
               format_metric(report.mse_r) + "\n";
        text += "\n";
    }
    {
        std::ofstream out(out_path);
        if (!out) throw care::FormatError("cannot open '" + out_path.string() + "' for writing");
        out << text;
    }
    {
        const fs::path csv_path = out_path.string() + ".csv";
        std::ofstream out(csv_path);
        if (!out) throw care::FormatError("cannot open '" + csv_path.string() + "' for writing");
        out << csv;
    }
    std::cout << text;
    return 0;
}

int run_decompose(const fs::path& in_path, const std::string& profiles_arg,
                  const fs::path& out_path) {
    const std::size_t comma = profiles_arg.find(',');
    if (comma == std::string::npos)
        throw CLI::ValidationError("--profiles", "expected two comma-separated paths: vbias,ece");
    const care::io::ProfileFile vbias = care::io::read_profile(profiles_arg.substr(0, comma));
    const care::io::ProfileFile ece_p = care::io::read_profile(profiles_arg.substr(comma + 1));
    if (vbias.profile.source != care::BiasSource::VBias ||
        ece_p.profile.source != care::BiasSource::Ece)
        throw care::ProfileMismatch("--profiles expects the v-bias profile first, then ece");

    const LoadedDataset data = load_dataset(in_path, /*need_labels=*/false);
    std::string csv = "id,i_est,i_vbias,i_ece,i_overall\n";
    std::size_t failed = 0;
    for (const care::InstanceVolume& v : data.volumes) {
        try {
            // beta comes from the ece profile's split, matching i_overall
            const care::UncertaintyDecomposition d =
                care::decompose_uncertainty(v, vbias.profile, ece_p.profile, ece_p.split);
            csv += v.id + "," + format_metric(d.i_est) + "," + format_metric(d.i_vbias) + "," +
                   format_metric(d.i_ece) + "," + format_metric(d.i_overall) + "\n";
        } catch (const care::Error& e) {
            ++failed;
            std::cerr << "error: instance '" << v.id << "': " << e.what() << "\n";
        }
    }
    if (failed == data.volumes.size() && failed > 0)
        throw care::Error("decomposition failed on every instance");
    std::ofstream out(out_path);
    if (!out) throw care::FormatError("cannot open '" + out_path.string() + "' for writing");
    out << csv;
    return 0;
}

int run_alarm(const fs::path& results_path, double threshold, const fs::path& out_path) {
    const std::vector<care::io::ResultRow> rows = care::io::read_results(results_path);
    std::string csv = "id,lower,upper,threshold,flag\n";
    for (const care::io::ResultRow& row : rows) {
        const care::AlarmFlag flag = care::threshold_alarm(row.interval, threshold);
        csv += row.id + "," + format_metric(row.interval.lower) + "," +
               format_metric(row.interval.upper) + "," + format_metric(threshold) + "," +
               std::string(to_string(flag)) + "\n";
    }
    std::ofstream out(out_path);
    if (!out) throw care::FormatError("cannot open '" + out_path.string() + "' for writing");
    out << csv;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"confidence intervals for ratio-based biomarkers"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic labeled dataset");
    std::string synth_config, synth_out;
    synth->add_option("--config", synth_config, "key=value generator config")->required();
    synth->add_option("--out", synth_out, "output dataset directory")->required();

    // fit
    auto* fit = app.add_subcommand("fit", "fit calibration quantiles and the budget split");
    std::string fit_val, fit_out, fit_source = "vbias", fit_ukind = "size_scaled";
    care::FitOptions fit_options;
    fit->add_option("--val", fit_val, "validation manifest (labeled)")->required();
    fit->add_option("--confidence", fit_options.confidence, "target confidence level")
        ->check(CLI::Range(0.0, 1.0));
    fit->add_option("--source", fit_source, "per-instance statistic: vbias|ece")
        ->check(CLI::IsMember({"vbias", "ece"}));
    fit->add_option("--bins", fit_options.n_bins, "ece bin count");
    fit->add_option("--grid-step", fit_options.grid_step, "alpha grid step");
    fit->add_option("--u-kind", fit_ukind,
                    "acqr uncertainty: unit|size_scaled|size_no_lambda|voxel_fraction")
        ->check(CLI::IsMember({"unit", "size_scaled", "size_no_lambda", "voxel_fraction"}));
    fit->add_option("--epsilon", fit_options.epsilon, "uncertainty floor");
    fit->add_option("--voxel-volume", fit_options.voxel_volume,
                    "voxel volume for the voxel_fraction measure");
    fit->add_option("--out", fit_out, "output profile file")->required();

    // estimate
    auto* estimate = app.add_subcommand("estimate", "per-instance intervals to a results table");
    std::string est_in, est_profile, est_method, est_out;
    double est_frac = 0.1;
    care::ResampleParams est_resample;
    estimate->add_option("--in", est_in, "input manifest")->required();
    estimate->add_option("--profile", est_profile, "fitted profile file")->required();
    estimate
        ->add_option("--method", est_method,
                     "cqr|acqr|acqr_unit|care_vbias|care_ece|markov|bootstrap|subsample")
        ->required()
        ->check(CLI::IsMember({"cqr", "acqr", "acqr_unit", "care_vbias", "care_ece", "markov",
                               "markov_only", "bootstrap", "subsample"}));
    estimate->add_option("--out", est_out, "output results table")->required();
    estimate->add_option("--reps", est_resample.reps, "resampling repetitions");
    estimate->add_option("--lo-q", est_resample.lo_q, "lower resample quantile");
    estimate->add_option("--hi-q", est_resample.hi_q, "upper resample quantile");
    estimate->add_option("--frac", est_frac, "subsample fraction");
    estimate->add_option("--seed", est_resample.seed, "resampling seed");

    // eval
    auto* eval = app.add_subcommand("eval", "coverage report for a results table");
    std::string eval_in, eval_results, eval_out;
    eval->add_option("--in", eval_in, "input manifest (labeled)")->required();
    eval->add_option("--results", eval_results, "results table from estimate")->required();
    eval->add_option("--out", eval_out, "output report (a .csv sibling is written too)")
        ->required();

    // decompose
    auto* decompose = app.add_subcommand("decompose", "per-instance uncertainty decomposition");
    std::string dec_in, dec_profiles, dec_out;
    decompose->add_option("--in", dec_in, "input manifest")->required();
    decompose->add_option("--profiles", dec_profiles, "vbias,ece profile paths")->required();
    decompose->add_option("--out", dec_out, "output table")->required();

    // alarm
    auto* alarm = app.add_subcommand("alarm", "flag intervals that cross a clinical threshold");
    std::string alarm_results, alarm_out;
    double alarm_threshold = 0.25;
    alarm->add_option("--results", alarm_results, "results table from estimate")->required();
    alarm->add_option("--threshold", alarm_threshold, "decision threshold")
        ->check(CLI::Range(0.0, 1.0));
    alarm->add_option("--out", alarm_out, "output flags table")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        return 1;
    }

    try {
        if (*synth) return run_synth(synth_config, synth_out);
        if (*fit) {
            fit_options.source = care::parse_bias_source(fit_source);
            fit_options.u_kind = care::parse_uncertainty_kind(fit_ukind);
            return run_fit(fit_val, fit_options, fit_out);
        }
        if (*estimate)
            return run_estimate(est_in, est_profile, est_method, est_frac, est_resample, est_out);
        if (*eval) return run_eval(eval_in, eval_results, eval_out);
        if (*decompose) return run_decompose(dec_in, dec_profiles, dec_out);
        if (*alarm) return run_alarm(alarm_results, alarm_threshold, alarm_out);
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const care::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const care::CorruptVolume& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const care::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const care::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
