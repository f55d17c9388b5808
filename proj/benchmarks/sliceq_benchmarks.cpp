#include <benchmark/benchmark.h>

#include <vector>

#include "sliceq/gateway.hpp"
#include "sliceq/sarsa_agent.hpp"
#include "sliceq/scenario.hpp"

namespace {

using namespace sliceq;

void BM_GatewayStep(benchmark::State& state) {
  GatewaySizing sizing;
  sizing.queue_count = static_cast<std::size_t>(state.range(0));
  Gateway gateway(sizing);
  Rng rng(1);
  const std::vector<double> lambda(sizing.queue_count, 90.0);
  for (auto _ : state) benchmark::DoNotOptimize(gateway.step(0.1, lambda, rng));
}
BENCHMARK(BM_GatewayStep)->Arg(3)->Arg(8);

void BM_ApplyAction(benchmark::State& state) {
  Gateway gateway(GatewaySizing{});
  Rng rng(2);
  for (auto _ : state) {
    const auto action = Action::from_index(rng.uniform_index(action_count(3)));
    gateway.set_flush_rates(apply_action(gateway, action, 0.1));
  }
}
BENCHMARK(BM_ApplyAction);

void BM_SarsaUpdate(benchmark::State& state) {
  QTable table(3);
  Rng rng(3);
  for (auto _ : state) {
    sarsa_update(table, rng.uniform_index(8), rng.uniform_index(7), rng.uniform(), rng.uniform_index(8),
                 rng.uniform_index(7), 0.2, 0.8);
  }
  benchmark::DoNotOptimize(table.values().data());
}
BENCHMARK(BM_SarsaUpdate);

void BM_ScenarioRun(benchmark::State& state) {
  const auto spec = ScenarioSpec::standard(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(spec));
}
BENCHMARK(BM_ScenarioRun)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
