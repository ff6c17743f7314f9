#include <benchmark/benchmark.h>

#include "heavytail/bpre.hpp"
#include "heavytail/env_model.hpp"
#include "heavytail/rwre.hpp"

using namespace heavytail;

static void BM_SampleGeometric(benchmark::State& state) {
  const double a = 1.0 / static_cast<double>(state.range(0));
  RngStream rng(1, domain::kBpre, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_geometric(a, rng.uniform()));
  }
}
BENCHMARK(BM_SampleGeometric)->Arg(2)->Arg(1000)->Arg(1000000);

static void BM_StepGeneration(benchmark::State& state) {
  const Magnitude z = Magnitude::exact(static_cast<std::uint64_t>(state.range(0)));
  RngStream rng(2, domain::kBpre, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(step_generation(z, 0.3, rng));
  }
  state.SetLabel(state.range(0) < static_cast<std::int64_t>(kExactModeCutoff) ? "exact"
                                                                               : "asymptotic");
}
BENCHMARK(BM_StepGeneration)->Arg(10)->Arg(500)->Arg(50000)->Arg(10000000);

static void BM_SampleLogZ2(benchmark::State& state) {
  const EnvironmentSpec spec = reference_spec();
  RngStream rng(3, domain::kBpre, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_log_zl(spec, 2, rng));
  }
}
BENCHMARK(BM_SampleLogZ2);

static void BM_CollapsedWalk(benchmark::State& state) {
  const EnvironmentSpec spec = reference_spec();
  RngStream rng(4, domain::kWalk, 0);
  WalkOptions options;
  options.collapse_left_excursions = true;
  options.right_sum_stop = 1'000'000;
  for (auto _ : state) {
    SiteEnvironment env(spec, rng);
    benchmark::DoNotOptimize(simulate_walk(env, state.range(0), options, rng));
  }
}
BENCHMARK(BM_CollapsedWalk)->Arg(2)->Arg(5);

static void BM_DirectWalk(benchmark::State& state) {
  const EnvironmentSpec spec = reference_spec();
  RngStream rng(5, domain::kWalk, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_walk(spec, state.range(0), 100'000, 0, rng));
  }
}
BENCHMARK(BM_DirectWalk)->Arg(2)->Arg(5);
