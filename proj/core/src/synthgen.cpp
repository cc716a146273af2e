#include "care/synthgen.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "care/parallel.hpp"
#include "care/rng.hpp"

namespace care {

namespace {

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

SynthInstance generate_one(const SynthConfig& c, std::size_t index) {
    Rng rng(derive_seed(c.seed, index));

    // pixel counts are log-uniform over [pixels_min, pixels_max]: instance
    // sizes span orders of magnitude, so size terciles separate cleanly
    const double log_n =
        rng.uniform(std::log(static_cast<double>(c.pixels_min)),
                    std::log(static_cast<double>(c.pixels_max)));
    const std::size_t n =
        std::min(c.pixels_max,
                 std::max(c.pixels_min, static_cast<std::size_t>(std::llround(std::exp(log_n)))));
    const double p_b = rng.uniform(c.p_b_min, c.p_b_max);
    const double r = rng.uniform(c.ratio_min, c.ratio_max);
    const double base_logit = logit(p_b);
    const double inv_t = 1.0 / c.temperature;

    SynthInstance inst;
    inst.true_ratio = r;
    inst.prevalence = p_b;
    InstanceVolume& v = inst.volume;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "synth-%06zu", index);
    v.id = buf;
    v.g_a.reserve(n);
    v.g_b.reserve(n);
    v.y_a.reserve(n);
    v.y_b.reserve(n);

    for (std::size_t start = 0; start < n; start += c.block_size) {
        // one latent probability draw per correlated block
        const double eps = rng.normal(0.0, c.noise_sd);
        const double block_logit = base_logit + eps;
        const double p_true_b = sigmoid(block_logit);
        const double p_true_a = p_true_b * r;
        const double logit_a = p_true_a > 0.0 ? logit(p_true_a) : 0.0;
        const std::size_t stop = std::min(n, start + c.block_size);
        for (std::size_t i = start; i < stop; ++i) {
            const double u_b = rng.uniform();
            const double u_a = rng.uniform();
            const std::uint8_t yb = u_b < p_true_b ? 1 : 0;
            const std::uint8_t ya = (yb != 0 && u_a < r) ? 1 : 0;
            const double eta_a = rng.normal(0.0, c.noise_sd);
            const double eta_b = rng.normal(0.0, c.noise_sd);
            const double gb = sigmoid(block_logit * inv_t + eta_b);
            const double ga = p_true_a > 0.0 ? sigmoid(logit_a * inv_t + eta_a) : 0.0;
            v.y_b.push_back(yb);
            v.y_a.push_back(ya);
            v.g_b.push_back(gb);
            v.g_a.push_back(ga);
        }
    }
    return inst;
}

} // namespace

void validate(const SynthConfig& c) {
    if (c.pixels_min < 1 || c.pixels_max < c.pixels_min)
        throw ConfigError("pixel count range is invalid");
    if (!(c.p_b_min > 0.0 && c.p_b_max >= c.p_b_min && c.p_b_max < 1.0))
        throw ConfigError("p_b range must lie inside (0,1)");
    if (!(c.ratio_min >= 0.0 && c.ratio_max >= c.ratio_min && c.ratio_max <= 1.0))
        throw ConfigError("ratio range must lie inside [0,1]");
    if (!(c.temperature > 0.0)) throw ConfigError("temperature must be positive");
    if (!(c.noise_sd >= 0.0)) throw ConfigError("noise_sd must be nonnegative");
    if (c.block_size < 1) throw ConfigError("block_size must be >= 1");
}

std::vector<SynthInstance> generate(const SynthConfig& config) {
    validate(config);
    std::vector<SynthInstance> out(config.n_instances);
    parallel_for(config.n_instances,
                 [&](std::size_t i) { out[i] = generate_one(config, i); });
    return out;
}

double true_ratio(const SynthInstance& instance) { return instance.true_ratio; }

} // namespace care
