#include <benchmark/benchmark.h>

#include <cmath>

#include "heavytail/asymptotics.hpp"

using namespace heavytail;

static void BM_Z1TailQuadrature(benchmark::State& state) {
  const EnvironmentSpec spec = reference_spec();
  const Magnitude m = Magnitude::log_scale(static_cast<double>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(z1_tail_quadrature(spec, m, 1e-10));
  }
}
BENCHMARK(BM_Z1TailQuadrature)->Arg(2)->Arg(20)->Arg(200);

static void BM_Z1TailUForm(benchmark::State& state) {
  const EnvironmentSpec spec = reference_spec();
  for (auto _ : state) {
    benchmark::DoNotOptimize(z1_tail_part_uform(spec, std::log(100.0), 1e-10));
  }
}
BENCHMARK(BM_Z1TailUForm);

static void BM_NagaevCheck(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(nagaev_bound_check(n, 0.9, nagaev_min_x(n, 0.9, 0.1) + 10, 0.1));
  }
}
BENCHMARK(BM_NagaevCheck)->Arg(2)->Arg(100);
