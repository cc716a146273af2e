#include <benchmark/benchmark.h>

#include <vector>

#include "care/baselines.hpp"
#include "care/calibration.hpp"
#include "care/estimators.hpp"
#include "care/pipeline.hpp"
#include "care/quantile.hpp"
#include "care/rng.hpp"
#include "care/synthgen.hpp"

namespace {

care::InstanceVolume make_instance(std::size_t n, std::uint64_t seed) {
    care::Rng rng(seed);
    care::InstanceVolume v;
    v.id = "bench";
    v.g_a.resize(n);
    v.g_b.resize(n);
    v.y_a.resize(n);
    v.y_b.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        v.g_b[i] = 0.2 + 0.6 * rng.uniform();
        v.g_a[i] = v.g_b[i] * rng.uniform();
        v.y_b[i] = rng.bernoulli(v.g_b[i]) ? 1 : 0;
        v.y_a[i] = (v.y_b[i] != 0 && rng.bernoulli(0.4)) ? 1 : 0;
    }
    return v;
}

void bm_point_ratio(benchmark::State& state) {
    const care::InstanceVolume v = make_instance(state.range(0), 1);
    for (auto _ : state) benchmark::DoNotOptimize(care::point_ratio(v));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_point_ratio)->Arg(1 << 10)->Arg(1 << 17);

void bm_ratio_moments(benchmark::State& state) {
    const care::InstanceVolume v = make_instance(state.range(0), 2);
    for (auto _ : state) benchmark::DoNotOptimize(care::ratio_moments(v));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_ratio_moments)->Arg(1 << 10)->Arg(1 << 17);

void bm_ece(benchmark::State& state) {
    const care::InstanceVolume v = make_instance(state.range(0), 3);
    for (auto _ : state) benchmark::DoNotOptimize(care::ece(v, care::Channel::B).ece);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_ece)->Arg(1 << 10)->Arg(1 << 17);

void bm_care_interval(benchmark::State& state) {
    const care::InstanceVolume v = make_instance(state.range(0), 4);
    const care::BudgetSplit split = care::make_budget_split(0.16, 0.16);
    care::CalibrationProfile profile;
    profile.q_a = 0.02;
    profile.q_b = 0.03;
    profile.delta = split.delta;
    profile.n_val = 100;
    for (auto _ : state) benchmark::DoNotOptimize(care::care_interval(v, profile, split));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_care_interval)->Arg(1 << 10)->Arg(1 << 17);

void bm_conformal_quantile(benchmark::State& state) {
    care::Rng rng(5);
    std::vector<double> values(state.range(0));
    for (double& x : values) x = rng.uniform();
    for (auto _ : state) benchmark::DoNotOptimize(care::conformal_quantile(values, 0.68));
}
BENCHMARK(bm_conformal_quantile)->Arg(1 << 8)->Arg(1 << 14);

void bm_bootstrap(benchmark::State& state) {
    const care::InstanceVolume v = make_instance(state.range(0), 6);
    for (auto _ : state) benchmark::DoNotOptimize(care::bootstrap_interval(v));
}
BENCHMARK(bm_bootstrap)->Arg(1 << 10)->Arg(1 << 14);

void bm_generate(benchmark::State& state) {
    care::SynthConfig config;
    config.n_instances = 20;
    config.pixels_min = state.range(0);
    config.pixels_max = state.range(0);
    config.p_b_min = 0.3;
    config.p_b_max = 0.6;
    config.ratio_min = 0.2;
    config.ratio_max = 0.5;
    config.noise_sd = 0.6;
    config.temperature = 1.3;
    config.seed = 7;
    for (auto _ : state) benchmark::DoNotOptimize(care::generate(config));
    state.SetItemsProcessed(state.iterations() * 20 * state.range(0));
}
BENCHMARK(bm_generate)->Arg(1 << 10)->Arg(1 << 14);

} // namespace

BENCHMARK_MAIN();
