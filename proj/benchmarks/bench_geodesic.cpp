#include <benchmark/benchmark.h>

#include "geocert/spd.hpp"

using namespace geocert;

static void BM_Geodesic(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  const spd::SPDMatrix a = spd::random_spd(d, 100.0, 1);
  const spd::SPDMatrix b = spd::random_spd(d, 100.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(spd::geodesic(a, b, 0.3));
}
BENCHMARK(BM_Geodesic)->RangeMultiplier(2)->Range(2, 64)->Unit(benchmark::kMicrosecond);

static void BM_Distance(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  const spd::SPDMatrix a = spd::random_spd(d, 100.0, 3);
  const spd::SPDMatrix b = spd::random_spd(d, 100.0, 4);
  for (auto _ : state) benchmark::DoNotOptimize(spd::distance(a, b));
}
BENCHMARK(BM_Distance)->RangeMultiplier(2)->Range(2, 64)->Unit(benchmark::kMicrosecond);

static void BM_SymEig(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  const spd::SPDMatrix a = spd::random_spd(d, 100.0, 5);
  for (auto _ : state) benchmark::DoNotOptimize(spd::sym_eig(a.matrix()));
}
BENCHMARK(BM_SymEig)->RangeMultiplier(2)->Range(2, 64)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
