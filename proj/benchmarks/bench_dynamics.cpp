#include <benchmark/benchmark.h>

#include <string>

#include "mfg/diagnostics.hpp"
#include "mfg/mac.hpp"
#include "mfg/meanfield.hpp"
#include "mfg/population.hpp"

namespace {

using namespace mfg;

const ProtocolKind kKinds[] = {ProtocolKind::ImitativePPI, ProtocolKind::BNN, ProtocolKind::Smith};

void BM_VectorField(benchmark::State& state) {
  const GameSpec g = build_mac(default_params());
  const auto pol = enumerate_policies(g);
  const MeanDynamics dyn(g, pol, {kKinds[state.range(0)], 1.0});
  const StatePolicyDist mu = random_interior(g, pol, 2);
  for (auto _ : state) benchmark::DoNotOptimize(dyn.field(mu));
  state.SetLabel(std::string(protocol_name(kKinds[state.range(0)])));
}
BENCHMARK(BM_VectorField)->DenseRange(0, 2);

void BM_IntegrateUnitTime(benchmark::State& state) {
  const GameSpec g = build_mac(default_params());
  const auto pol = enumerate_policies(g);
  const StatePolicyDist mu0 = random_interior(g, pol, 3);
  for (auto _ : state) benchmark::DoNotOptimize(integrate(g, pol, {ProtocolKind::Smith, 1.0}, mu0, 1.0));
}
BENCHMARK(BM_IntegrateUnitTime)->Unit(benchmark::kMillisecond);

void BM_SimulatePopulation(benchmark::State& state) {
  const GameSpec g = build_mac(default_params());
  const auto pol = enumerate_policies(g);
  const StatePolicyDist mu0 = random_interior(g, pol, 4);
  const auto N = static_cast<std::size_t>(state.range(0));
  SimConfig cfg;
  cfg.t_end = 0.5;
  cfg.seed = 9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulate(g, pol, {ProtocolKind::ImitativePPI, 1.0}, init_population(g, mu0, N, 1), cfg));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_SimulatePopulation)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
