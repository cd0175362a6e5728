#include <benchmark/benchmark.h>

#include "geocert/oracle.hpp"
#include "geocert/spd_atoms.hpp"

using namespace geocert;

static void BM_CheckGconvexLogdet(benchmark::State& state) {
  oracle::FuzzConfig cfg;
  cfg.trials = 100;
  cfg.dim = static_cast<Eigen::Index>(state.range(0));
  const oracle::SpdFunction f = oracle::scalar_function(spd::logdet_atom);
  for (auto _ : state) benchmark::DoNotOptimize(oracle::check_gconvex(f, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.trials));
}
BENCHMARK(BM_CheckGconvexLogdet)->DenseRange(2, 10, 4)->Unit(benchmark::kMillisecond);

static void BM_CrossValidateBrascampLieb(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  const Expression x = make_variable("X", Manifold::spd(d));
  spd::Matrix a = spd::Matrix::Identity(d, d).leftCols(d - 1);
  const Expression e = apply_atom("logdet", {apply_atom("conjugation", {x, Param(a)})}) - apply_atom("logdet", {x});
  oracle::FuzzConfig cfg;
  cfg.trials = 100;
  cfg.dim = d;
  for (auto _ : state) benchmark::DoNotOptimize(oracle::cross_validate(e, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.trials));
}
BENCHMARK(BM_CrossValidateBrascampLieb)->DenseRange(2, 10, 4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
