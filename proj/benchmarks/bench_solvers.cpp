#include <benchmark/benchmark.h>

#include <string>

#include "aeq/active_solver.hpp"
#include "aeq/chain_engine.hpp"
#include "aeq/scenario_io.hpp"

namespace {

aeq::LoadedScenario load(const std::string& name) {
  return aeq::read_scenario(std::string(AEQ_SCENARIO_DIR) + "/" + name);
}

void BM_ChainEvaluator(benchmark::State& state) {
  const auto s = load("bach_stravinsky.json");
  const aeq::ChainEvaluator evaluator(s.game);
  for (auto _ : state) benchmark::DoNotOptimize(evaluator.evaluate(s.candidate->profile, 0));
}
BENCHMARK(BM_ChainEvaluator);

void BM_DeviationSearch(benchmark::State& state) {
  const auto s = load("prisoners_dilemma.json");
  const auto domain = state.range(0) ? aeq::UpdateDomain::kFull : aeq::UpdateDomain::kJointActionOnly;
  const auto spaces = aeq::make_strategy_space(s.game, domain);
  auto profile = s.candidate->profile;
  if (domain == aeq::UpdateDomain::kFull) {
    for (int i = 0; i < 2; ++i) profile.agents[i].rule = aeq::lift_to_full(s.game, i, profile.agents[i].rule);
  }
  for (auto _ : state) benchmark::DoNotOptimize(aeq::best_active_deviation(s.game, profile, 0, spaces));
}
BENCHMARK(BM_DeviationSearch)->Arg(0)->Arg(1);

void BM_EnumeratePd(benchmark::State& state) {
  const auto s = load("prisoners_dilemma.json");
  const auto domain = state.range(0) ? aeq::UpdateDomain::kFull : aeq::UpdateDomain::kJointActionOnly;
  const auto spaces = aeq::make_strategy_space(s.game, domain);
  for (auto _ : state) benchmark::DoNotOptimize(aeq::enumerate_active_equilibria(s.game, spaces));
}
BENCHMARK(BM_EnumeratePd)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
