#include "care/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace care {

namespace {

double kth_smallest(std::span<const double> values, std::size_t k) {
    // k is 1-based
    std::vector<double> tmp(values.begin(), values.end());
    std::nth_element(tmp.begin(), tmp.begin() + (k - 1), tmp.end());
    return tmp[k - 1];
}

} // namespace

double conformal_quantile(std::span<const double> values, double level) {
    if (values.empty()) throw EmptyCalibrationSet();
    if (!(level > 0.0 && level < 1.0))
        throw BadConfidenceBudget("quantile level must lie in (0,1)");
    const std::size_t n = values.size();
    const double rank = std::ceil(static_cast<double>(n + 1) * level);
    if (rank > static_cast<double>(n)) return std::numeric_limits<double>::infinity();
    return kth_smallest(values, static_cast<std::size_t>(rank));
}

double nearest_rank_quantile(std::span<const double> values, double level) {
    if (values.empty()) throw EmptyCalibrationSet();
    if (!(level > 0.0 && level < 1.0))
        throw BadConfidenceBudget("quantile level must lie in (0,1)");
    const std::size_t n = values.size();
    const double rank = std::ceil(static_cast<double>(n) * level);
    const std::size_t k = std::min<std::size_t>(n, std::max<std::size_t>(1, static_cast<std::size_t>(rank)));
    return kth_smallest(values, k);
}

double soft_volume(const InstanceVolume& v, Channel channel) {
    const auto& g = channel == Channel::A ? v.g_a : v.g_b;
    double total = 0.0;
    for (double x : g) total += x;
    return total;
}

} // namespace care
