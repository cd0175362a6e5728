#include <benchmark/benchmark.h>

#include "geocert/solver.hpp"

#include <vector>

using namespace geocert;

static void BM_MatrixSqrt(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  const solver::Objective obj = solver::make_matrix_sqrt_problem(spd::random_spd(d, 100.0, 7));
  for (auto _ : state) benchmark::DoNotOptimize(solver::gradient_descent(obj, spd::SPDMatrix::identity(d)));
}
BENCHMARK(BM_MatrixSqrt)->Arg(3)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_Karcher(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  std::vector<spd::SPDMatrix> as;
  for (std::uint64_t i = 0; i < 5; ++i) as.push_back(spd::random_spd(d, 100.0, i));
  const solver::Objective obj = solver::make_karcher_problem(as, std::vector<double>(5, 0.2));
  for (auto _ : state) benchmark::DoNotOptimize(solver::gradient_descent(obj, spd::SPDMatrix::identity(d)));
}
BENCHMARK(BM_Karcher)->Arg(3)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_Tyler(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  const spd::Matrix samples = spd::random_spd(4 * d, 10.0, 11).matrix().leftCols(d).transpose();
  std::vector<spd::Vector> xs;
  for (Eigen::Index i = 0; i < samples.cols(); ++i) xs.push_back(samples.col(i));
  const solver::Objective obj = solver::make_tyler_problem(xs);
  for (auto _ : state) benchmark::DoNotOptimize(solver::gradient_descent(obj, spd::SPDMatrix::identity(d)));
}
BENCHMARK(BM_Tyler)->Arg(3)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
