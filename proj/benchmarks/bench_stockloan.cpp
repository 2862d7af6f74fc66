#include <benchmark/benchmark.h>

#include "stockloan/finite_horizon.hpp"
#include "stockloan/oracle.hpp"
#include "stockloan/perpetual.hpp"

using namespace stockloan;

namespace {

StockLoanModel perpetual_model(double principal) {
  ModelParameters p;
  p.r = p.alpha = 0.05;
  p.sigma2 = 0.15;
  p.delta = 0.05;
  p.rho = 0.9;
  p.gamma = 0.01;
  p.principal = principal;
  p.horizon = Perpetual{};
  return p.build();
}

void BM_PerpetualThreshold(benchmark::State& state) {
  const auto model = perpetual_model(90.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_threshold(model).v_star);
}
BENCHMARK(BM_PerpetualThreshold);

void BM_PerpetualFee(benchmark::State& state) {
  const auto model = perpetual_model(110.0);
  for (auto _ : state) benchmark::DoNotOptimize(fee(model).fee);
}
BENCHMARK(BM_PerpetualFee);

void BM_IndifferenceLcp(benchmark::State& state) {
  const auto model = ModelParameters{}.build();
  GridConfig cfg;
  cfg.v_intervals = static_cast<std::size_t>(state.range(0));
  cfg.t_steps = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(solve_indifference(model, cfg).p0);
}
BENCHMARK(BM_IndifferenceLcp)->Args({200, 500})->Args({800, 2000})->Unit(benchmark::kMillisecond);

void BM_FiniteFee(benchmark::State& state) {
  const auto model = ModelParameters{}.build();
  for (auto _ : state) benchmark::DoNotOptimize(fee_finite(model).fee);
}
BENCHMARK(BM_FiniteFee)->Unit(benchmark::kMillisecond);

void BM_TreeStopping(benchmark::State& state) {
  const auto model = ModelParameters{}.build();
  for (auto _ : state) {
    benchmark::DoNotOptimize(tree_stopping_F(model, static_cast<std::size_t>(state.range(0))).f0);
  }
}
BENCHMARK(BM_TreeStopping)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
