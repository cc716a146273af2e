#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace care {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Derives an independent sub-stream seed for (seed, index). Used so
// per-instance / per-resample streams can run in parallel and still
// reproduce serial output bit for bit.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed + 0x9e3779b97f4a7c15ull * (index + 1);
    return splitmix64(s);
}

// Small deterministic PRNG. Distributions are hand-rolled so streams are
// identical across standard libraries and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // unbiased uniform integer in [0, bound); bound must be >= 1
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t x = next_u64();
            if (x >= threshold) return x % bound;
        }
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller; consumes exactly two uniforms so streams stay aligned.
    double normal(double mean = 0.0, double sd = 1.0) {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        return mean + sd * (mag * std::cos(2.0 * std::numbers::pi * u2));
    }

private:
    std::uint64_t state_;
};

} // namespace care
