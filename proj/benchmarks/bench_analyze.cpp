#include <benchmark/benchmark.h>

#include "geocert/analysis.hpp"

#include <vector>

using namespace geocert;

// Karcher objective sum_i distance(A_i, X)^2 with range(0) anchors.
static Expression karcher(Eigen::Index d, int anchors) {
  const Expression x = make_variable("X", Manifold::spd(d));
  std::vector<Expression> terms;
  for (int i = 0; i < anchors; ++i) {
    const spd::SPDMatrix a = spd::random_spd(d, 100.0, static_cast<std::uint64_t>(i));
    terms.push_back(apply_atom("pow", {apply_atom("distance", {Param(a.matrix()), x}), Param(2.0)}));
  }
  return make_add(std::move(terms));
}

static void BM_AnalyzeKarcher(benchmark::State& state) {
  const Expression e = karcher(5, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(analyze(e, Manifold::spd(5)));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AnalyzeKarcher)->RangeMultiplier(4)->Range(1, 1024)->Complexity()->Unit(benchmark::kMicrosecond);

static void BM_EvaluateKarcher(benchmark::State& state) {
  const Expression e = karcher(5, static_cast<int>(state.range(0)));
  const Bindings b{{"X", spd::random_spd(5, 100.0, 99).matrix()}};
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_scalar(e, b));
}
BENCHMARK(BM_EvaluateKarcher)->RangeMultiplier(4)->Range(1, 256)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
