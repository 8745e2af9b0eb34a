#include <benchmark/benchmark.h>

#include "ccmv/backtest.hpp"
#include "ccmv/kernels.hpp"
#include "ccmv/oracle.hpp"
#include "ccmv/padm.hpp"
#include "ccmv/pd_solver.hpp"
#include "ccmv/synthetic.hpp"

using namespace ccmv;

namespace {

Exec exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Exec::Serial : Exec::Parallel;
}

void BM_SampleCovariance(benchmark::State& state) {
  const ReturnsMatrix r = synthetic_returns(120, static_cast<int>(state.range(1)), 1);
  const Vector means = kernels::column_means(r.values);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::sample_covariance(r.values, means, exec_of(state)));
}
BENCHMARK(BM_SampleCovariance)->ArgsProduct({{0, 1}, {226, 476}})->ArgNames({"parallel", "n"});

void BM_OracleBruteForce(benchmark::State& state) {
  const ProblemSpec spec = synthetic_factor_problem(static_cast<int>(state.range(1)), 3, 0.5, 2);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_solve(spec, exec_of(state)));
}
BENCHMARK(BM_OracleBruteForce)
    ->ArgsProduct({{0, 1}, {20, 40}})
    ->ArgNames({"parallel", "n"})
    ->Unit(benchmark::kMillisecond);

void BM_RollingHorizon(benchmark::State& state) {
  const ReturnsMatrix r = synthetic_returns(96, static_cast<int>(state.range(1)), 3);
  BacktestConfig cfg;
  cfg.window = 48;
  cfg.k = 10;
  for (auto _ : state) benchmark::DoNotOptimize(rolling_horizon(r, cfg, exec_of(state)));
}
BENCHMARK(BM_RollingHorizon)
    ->ArgsProduct({{0, 1}, {50, 133}})
    ->ArgNames({"parallel", "n"})
    ->Unit(benchmark::kMillisecond);

void BM_PdSolve(benchmark::State& state) {
  const ProblemSpec spec = synthetic_factor_problem(static_cast<int>(state.range(0)), 10, 0.5, 4);
  for (auto _ : state) benchmark::DoNotOptimize(ccmv_pd_solve(spec));
}
BENCHMARK(BM_PdSolve)->Arg(226)->Arg(476)->ArgName("n")->Unit(benchmark::kMillisecond);

void BM_PadmSolve(benchmark::State& state) {
  const ProblemSpec spec = synthetic_factor_problem(static_cast<int>(state.range(0)), 10, 0.5, 4);
  for (auto _ : state) benchmark::DoNotOptimize(ccmv_padm_solve(spec));
}
BENCHMARK(BM_PadmSolve)->Arg(226)->Arg(476)->ArgName("n")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
