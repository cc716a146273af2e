#include "care/estimators.hpp"

#include <cmath>

namespace care {

namespace {

struct ChannelSums {
    double sum_a = 0.0;
    double sum_b = 0.0;
};

ChannelSums channel_sums(const InstanceVolume& v) {
    ChannelSums s;
    for (double x : v.g_a) s.sum_a += x;
    for (double x : v.g_b) s.sum_b += x;
    return s;
}

// Expanded form of eq. r_corr,2: the printed multiplicative r_a*/r_b* hit
// 0/0 when a variance or covariance vanishes; multiplying the quotients out
// is identical wherever they are defined and stays finite at zero.
double debiased_from_moments(const RatioMoments& m) {
    const double mx = m.mean_x;
    const double my = m.mean_y;
    const double r_hat = my / mx;
    // y constant zero kills every correction term
    if (my == 0.0) return r_hat;

    const double n = static_cast<double>(m.n);
    const double mx2 = mx * mx;
    const double mx3 = mx2 * mx;
    const double mx4 = mx3 * mx;
    const double my2 = my * my;
    const double my3 = my2 * my;

    const double r_a = m.cov_xy / (mx * my);
    const double r_a_star =
        r_a
        + (my * m.cov_x2_y + mx * m.cov_y2_x) / ((n - 1.0) * mx2 * my2)
        - 4.0 * r_a / (n - 1.0)
        - (m.cov_xy * m.var_x / (mx3 * my)
           + m.cov_xy * m.var_y / (mx * my3)
           + 2.0 * m.cov_xy * m.cov_xy / (mx2 * my2)) / (n - 1.0);

    const double r_b = m.var_x / mx2;
    const double r_b_star =
        r_b
        + 2.0 * m.cov_x2_x / ((n - 1.0) * mx3)
        - 4.0 * (r_b + r_b * r_b) / (n - 1.0);

    const double second_order =
        (m.cov_x2_y - 2.0 * mx * m.cov_xy) / (mx2 * my)
        - (m.cov_x2_x - 2.0 * mx * m.var_x) / mx3
        - 3.0 * m.var_x * m.cov_xy / (mx3 * my)
        + 3.0 * m.var_x * m.var_x / mx4;

    return r_hat * (1.0 - (r_b_star - r_a_star) / n - second_order / (n * n));
}

} // namespace

double point_ratio(const InstanceVolume& v) {
    const ChannelSums s = channel_sums(v);
    if (!(s.sum_b > 0.0))
        throw EmptyDenominator("instance '" + v.id + "': predicted denominator volume is zero");
    return clip01(s.sum_a / s.sum_b);
}

double labeled_ratio(const InstanceVolume& v) {
    if (!v.has_labels())
        throw LabelsRequired("instance '" + v.id + "' has no labels");
    double sum_a = 0.0, sum_b = 0.0;
    for (std::uint8_t y : v.y_a) sum_a += y;
    for (std::uint8_t y : v.y_b) sum_b += y;
    if (!(sum_b > 0.0))
        throw EmptyDenominator("instance '" + v.id + "': labeled denominator volume is zero");
    return sum_a / sum_b;
}

RatioMoments ratio_moments(const InstanceVolume& v) {
    const std::size_t n = v.n_pixels();
    if (n < 2) throw TooFewPixels("ratio moments need at least 2 pixels");

    // x is the denominator channel (g_b), y the numerator channel (g_a)
    double sx = 0.0, sy = 0.0, sx2 = 0.0, sy2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = v.g_b[i];
        const double y = v.g_a[i];
        sx += x;
        sy += y;
        sx2 += x * x;
        sy2 += y * y;
    }
    const double dn = static_cast<double>(n);
    RatioMoments m;
    m.n = n;
    m.mean_x = sx / dn;
    m.mean_y = sy / dn;
    const double mean_x2 = sx2 / dn;
    const double mean_y2 = sy2 / dn;

    double vxx = 0.0, vyy = 0.0, vxy = 0.0;
    double cx2x = 0.0, cx2y = 0.0, cy2x = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = v.g_b[i] - m.mean_x;
        const double dy = v.g_a[i] - m.mean_y;
        const double dx2 = v.g_b[i] * v.g_b[i] - mean_x2;
        const double dy2 = v.g_a[i] * v.g_a[i] - mean_y2;
        vxx += dx * dx;
        vyy += dy * dy;
        vxy += dx * dy;
        cx2x += dx2 * dx;
        cx2y += dx2 * dy;
        cy2x += dy2 * dx;
    }
    const double norm = dn - 1.0;
    m.var_x = vxx / norm;
    m.var_y = vyy / norm;
    m.cov_xy = vxy / norm;
    m.cov_x2_x = cx2x / norm;
    m.cov_x2_y = cx2y / norm;
    m.cov_y2_x = cy2x / norm;
    return m;
}

double squared_error_estimate(const RatioMoments& m) {
    if (!(m.mean_x > 0.0))
        throw EmptyDenominator("squared error estimate needs a positive denominator mean");
    // Factored so the three terms cancel exactly when x = y: with t = 1 the
    // inner bracket is var_x - 2 cov_xy = -var and var_y - var = 0.
    const double t = m.mean_y / m.mean_x;
    const double combo = m.var_y + t * (m.var_x * t - 2.0 * m.cov_xy);
    const double se = combo / (static_cast<double>(m.n) * m.mean_x * m.mean_x);
    return se > 0.0 ? se : 0.0;
}

IntervalEstimate markov_interval(double r_hat, double se, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw BadConfidenceBudget("markov alpha must lie in (0,1)");
    if (!(se >= 0.0)) se = 0.0;
    const double beta = std::sqrt(se) / std::sqrt(alpha);
    const double lo_raw = r_hat - beta;
    const double hi_raw = r_hat + beta;
    IntervalEstimate out;
    out.r_hat = r_hat;
    out.lower = clip01(lo_raw);
    out.upper = clip01(hi_raw);
    out.method = Method::MarkovOnly;
    out.alpha = alpha;
    out.delta = 0.0;
    out.degenerate = lo_raw < 0.0 || hi_raw > 1.0;
    return out;
}

double debiased_ratio(const InstanceVolume& v) {
    if (v.n_pixels() < 3) throw TooFewPixels("debiased ratio needs at least 3 pixels");
    const RatioMoments m = ratio_moments(v);
    if (!(m.mean_x > 0.0))
        throw EmptyDenominator("instance '" + v.id + "': predicted denominator volume is zero");
    return debiased_from_moments(m);
}

double debiased_ratio_clipped(const InstanceVolume& v) {
    return clip01(debiased_ratio(v));
}

} // namespace care
