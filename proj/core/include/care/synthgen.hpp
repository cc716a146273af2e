#pragma once

#include <cstdint>
#include <vector>

#include "care/types.hpp"

namespace care {

// Generator parameters for simulated miscalibrated segmentation outputs.
// temperature = 1 yields calibrated predictions; T != 1 distorts logits.
// block_size > 1 makes pixels within a block share one latent probability
// draw, breaking pixel independence.
struct SynthConfig {
    std::size_t n_instances = 0;
    std::size_t pixels_min = 1;   // per-instance count drawn log-uniformly
    std::size_t pixels_max = 1;
    double p_b_min = 0.5;     // per-instance denominator prevalence range, in (0,1)
    double p_b_max = 0.5;
    double ratio_min = 0.5;   // per-instance true ratio range, in [0,1]
    double ratio_max = 0.5;
    double temperature = 1.0;
    double noise_sd = 0.0;    // logit-space noise scale
    std::size_t block_size = 1;
    std::uint64_t seed = 0;
};

void validate(const SynthConfig& config);  // throws ConfigError

struct SynthInstance {
    InstanceVolume volume;
    double true_ratio = 0.0;  // latent r used at generation
    double prevalence = 0.0;  // latent p_b
};

// Deterministic per (config.seed, instance index): generating [0..k) then a
// longer run reproduces the shared prefix exactly, and parallel generation
// matches serial output.
std::vector<SynthInstance> generate(const SynthConfig& config);

// Oracle for coverage tests; the realized label ratio converges to this as
// the pixel count grows.
double true_ratio(const SynthInstance& instance);

} // namespace care
