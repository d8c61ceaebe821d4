#include <benchmark/benchmark.h>

#include "mfg/diagnostics.hpp"
#include "mfg/equilibria.hpp"
#include "mfg/mac.hpp"
#include "mfg/payoff.hpp"

namespace {

using namespace mfg;

void BM_PayoffEvaluate(benchmark::State& state) {
  const GameSpec g = build_mac(default_params());
  const auto pol = enumerate_policies(g);
  const PayoffEvaluator eval(g, pol);
  const StatePolicyDist mu = random_interior(g, pol, 1);
  for (auto _ : state) benchmark::DoNotOptimize(eval.evaluate(mu));
}
BENCHMARK(BM_PayoffEvaluate);

void BM_DiscountedValues(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Matrix P = Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  const Vector r = Vector::LinSpaced(n, 0.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(discounted_values(P, r, 0.9));
}
BENCHMARK(BM_DiscountedValues)->RangeMultiplier(4)->Range(4, 256);

void BM_SolveMsneMac(benchmark::State& state) {
  const GameSpec g = build_mac(default_params());
  const auto pol = enumerate_policies(g);
  for (auto _ : state) benchmark::DoNotOptimize(solve_msne(g, pol));
}
BENCHMARK(BM_SolveMsneMac)->Unit(benchmark::kMillisecond);

}  // namespace
