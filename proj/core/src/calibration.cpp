#include "care/calibration.hpp"

#include <cmath>

#include "care/quantile.hpp"

namespace care {

namespace {

const std::vector<double>& channel_g(const InstanceVolume& v, Channel c) {
    return c == Channel::A ? v.g_a : v.g_b;
}

const std::vector<std::uint8_t>& channel_y(const InstanceVolume& v, Channel c) {
    return c == Channel::A ? v.y_a : v.y_b;
}

void require_labels(const InstanceVolume& v) {
    if (!v.has_labels())
        throw LabelsRequired("instance '" + v.id + "' has no labels");
}

} // namespace

double volume_bias(const InstanceVolume& v, Channel c) {
    require_labels(v);
    const auto& g = channel_g(v, c);
    const auto& y = channel_y(v, c);
    double total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        total += g[i] - static_cast<double>(y[i]);
    return total / static_cast<double>(g.size());
}

EceResult ece(const InstanceVolume& v, Channel c, std::size_t n_bins) {
    require_labels(v);
    if (n_bins < 1) throw ConfigError("ece needs at least one bin");
    const auto& g = channel_g(v, c);
    const auto& y = channel_y(v, c);

    BinnedCalibrationStats s;
    s.n_bins = n_bins;
    s.n = g.size();
    s.bin_edges.resize(n_bins + 1);
    for (std::size_t b = 0; b <= n_bins; ++b)
        s.bin_edges[b] = static_cast<double>(b) / static_cast<double>(n_bins);
    s.bin_edges[n_bins] = 1.0;
    s.bin_counts.assign(n_bins, 0);

    std::vector<double> sum_g(n_bins, 0.0);
    std::vector<double> sum_y(n_bins, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::size_t b = static_cast<std::size_t>(g[i] * static_cast<double>(n_bins));
        if (b >= n_bins) b = n_bins - 1;  // g == 1 lands in the last bin
        s.bin_counts[b] += 1;
        sum_g[b] += g[i];
        sum_y[b] += static_cast<double>(y[i]);
    }
    s.bin_conf.assign(n_bins, 0.0);
    s.bin_acc.assign(n_bins, 0.0);
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (s.bin_counts[b] == 0) continue;
        const double count = static_cast<double>(s.bin_counts[b]);
        s.bin_conf[b] = sum_g[b] / count;
        s.bin_acc[b] = sum_y[b] / count;
    }
    EceResult out;
    out.stats = std::move(s);
    out.ece = ece_from_stats(out.stats);
    return out;
}

// Both folds visit bins in the same order, and |round(w*d)| == round(w*|d|)
// for round-to-nearest, so |binned_volume_bias| <= ece_from_stats holds in
// floating point for the same stats.
double ece_from_stats(const BinnedCalibrationStats& s) {
    const double n = static_cast<double>(s.n);
    double total = 0.0;
    for (std::size_t b = 0; b < s.n_bins; ++b) {
        if (s.bin_counts[b] == 0) continue;
        const double w = static_cast<double>(s.bin_counts[b]) / n;
        const double gap = s.bin_conf[b] - s.bin_acc[b];
        total += w * std::abs(gap);
    }
    return total;
}

double binned_volume_bias(const BinnedCalibrationStats& s) {
    const double n = static_cast<double>(s.n);
    double total = 0.0;
    for (std::size_t b = 0; b < s.n_bins; ++b) {
        if (s.bin_counts[b] == 0) continue;
        const double w = static_cast<double>(s.bin_counts[b]) / n;
        const double gap = s.bin_conf[b] - s.bin_acc[b];
        total += w * gap;
    }
    return total;
}

std::pair<double, double> fit_calibration_quantiles(std::span<const InstanceVolume> val,
                                                    double delta, BiasSource source,
                                                    std::size_t n_bins) {
    if (val.empty()) throw EmptyCalibrationSet();
    if (!(delta > 0.0 && delta < 1.0))
        throw BadConfidenceBudget("calibration delta must lie in (0,1)");
    std::vector<double> stat_a, stat_b;
    stat_a.reserve(val.size());
    stat_b.reserve(val.size());
    for (const InstanceVolume& v : val) {
        if (source == BiasSource::VBias) {
            stat_a.push_back(std::abs(volume_bias(v, Channel::A)));
            stat_b.push_back(std::abs(volume_bias(v, Channel::B)));
        } else {
            stat_a.push_back(ece(v, Channel::A, n_bins).ece);
            stat_b.push_back(ece(v, Channel::B, n_bins).ece);
        }
    }
    const double level = 1.0 - delta / 2.0;
    return {conformal_quantile(stat_a, level), conformal_quantile(stat_b, level)};
}

CalibrationBounds calibration_bounds_from_means(double mean_a, double mean_b,
                                                double q_a, double q_b, double r_hat) {
    if (!(mean_b > 0.0))
        throw EmptyDenominator("calibration interval needs a positive denominator mean");
    CalibrationBounds out;
    if (!(std::isfinite(q_a) && std::isfinite(q_b))) {
        // rank overflow sentinel: full-width interval
        out.eps_l = r_hat;
        out.eps_u = 1.0 - r_hat;
        out.degenerate = true;
        return out;
    }
    const double lower_raw = (mean_a - q_a) / (mean_b + q_b);
    double upper_raw;
    bool degenerate = false;
    const double upper_den = mean_b - q_b;
    if (upper_den <= 0.0) {
        upper_raw = 1.0;
        degenerate = true;
    } else {
        upper_raw = (mean_a + q_a) / upper_den;
    }
    if (lower_raw < 0.0 || lower_raw > 1.0 || upper_raw > 1.0) degenerate = true;
    const double lower = clip01(lower_raw);
    const double upper = clip01(upper_raw);
    out.eps_l = std::max(0.0, r_hat - lower);
    out.eps_u = std::max(0.0, upper - r_hat);
    out.degenerate = degenerate;
    return out;
}

CalibrationBounds calibration_interval(const InstanceVolume& v, double q_a, double q_b) {
    const std::size_t n = v.n_pixels();
    if (n == 0) throw EmptyDenominator("instance '" + v.id + "' has no pixels");
    double sum_a = 0.0, sum_b = 0.0;
    for (double x : v.g_a) sum_a += x;
    for (double x : v.g_b) sum_b += x;
    if (!(sum_b > 0.0))
        throw EmptyDenominator("instance '" + v.id + "': predicted denominator volume is zero");
    const double dn = static_cast<double>(n);
    const double r_hat = clip01(sum_a / sum_b);
    return calibration_bounds_from_means(sum_a / dn, sum_b / dn, q_a, q_b, r_hat);
}

} // namespace care
