#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "care/errors.hpp"

namespace care {

enum class Channel { A, B };

// Interval construction methods, in canonical report order.
enum class Method { Cqr, Acqr, CareVBias, CareEce, MarkovOnly, Bootstrap, Subsample };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

// Which per-instance statistic the calibration quantiles summarize.
enum class BiasSource { VBias, Ece };

std::string_view to_string(BiasSource s);
BiasSource parse_bias_source(std::string_view name);

// Per-pixel predicted probabilities and optional binary labels for the
// numerator (A) and denominator (B) channels of one case. Pixels are flat
// sequences; spatial layout is outside this type.
struct InstanceVolume {
    std::string id;
    std::vector<double> g_a;        // predicted probability of A per pixel
    std::vector<double> g_b;        // predicted probability of B per pixel
    std::vector<std::uint8_t> y_a;  // labels; empty at pure inference time
    std::vector<std::uint8_t> y_b;

    std::size_t n_pixels() const { return g_b.size(); }
    bool has_labels() const { return !y_a.empty() || !y_b.empty(); }
};

// Throws CorruptVolume if lengths disagree, probabilities leave [0,1],
// labels are not 0/1, or the A-inside-B nesting is violated.
void validate(const InstanceVolume& v);

// Point ratio plus bounds and the budget that produced them.
struct IntervalEstimate {
    double r_hat = 0.0;
    double lower = 0.0;
    double upper = 1.0;
    Method method = Method::Cqr;
    double alpha = 0.0;       // estimation budget; 0 when unused
    double delta = 0.0;       // calibration budget; 0 when unused
    bool degenerate = false;  // a bound was clipped from an out-of-range value

    double width() const { return upper - lower; }
    bool covers(double r) const { return lower <= r && r <= upper; }
};

// Fitted validation-set state reused at test time.
struct CalibrationProfile {
    double q_a = 0.0;         // quantile of per-instance |error|, channel A
    double q_b = 0.0;         // quantile of per-instance |error|, channel B
    BiasSource source = BiasSource::VBias;
    double q_residual = 0.0;  // CQR residual quantile
    double q_score = 0.0;     // ACQR score quantile
    double v_t_max = 0.0;     // largest soft volume of channel B on validation
    double delta = 0.0;       // level q_a / q_b were fitted at
    std::size_t n_val = 0;
};

inline double clip01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

} // namespace care
