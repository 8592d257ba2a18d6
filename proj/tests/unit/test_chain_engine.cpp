#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "aeq/active_solver.hpp"
#include "aeq/chain_engine.hpp"
#include "aeq/scenario_io.hpp"
#include "aeq/simulator.hpp"
#include "fixtures.hpp"

namespace aeq {
namespace {

constexpr double kTwoFormTolerance = 1e-12;
constexpr double kBalanceTolerance = 1e-9;

void expect_rho(const RewardVector& rho, std::vector<double> expected, double tol = 1e-12) {
  ASSERT_EQ(rho.size(), expected.size());
  for (std::size_t i = 0; i < rho.size(); ++i) EXPECT_NEAR(rho[i], expected[i], tol) << "agent " << i;
}

TEST(InduceChain, AlwaysDefectIsSelfLoop) {
  const auto g = test::pd_game();
  const auto chain = induce_chain(g, test::stationary(g, {"D", "D"}));
  ASSERT_EQ(chain.nodes.size(), 1u);
  EXPECT_EQ(chain.successor[0], 0u);
  EXPECT_EQ(chain.node_reward[0], (RewardVector{-2, -2}));
  const auto dec = cycle_decomposition(chain);
  EXPECT_TRUE(dec.prefix.empty());
  EXPECT_EQ(dec.cycle, (std::vector<std::size_t>{0}));
}

TEST(InduceChain, TitForTatFromCooperationIsSelfLoop) {
  const auto g = test::pd_game();
  const auto chain = induce_chain(g, test::tit_for_tat(g));
  ASSERT_EQ(chain.nodes.size(), 1u);
  EXPECT_EQ(chain.nodes[0].policies, (std::vector<int>{0, 0}));
  EXPECT_EQ(chain.successor[0], 0u);
}

TEST(InduceChain, BachStravinskyAlternationIsTwoCycle) {
  const auto g = test::bos_game();
  const auto chain = induce_chain(g, test::bos_alternation(g));
  ASSERT_EQ(chain.nodes.size(), 2u);
  EXPECT_EQ(chain.nodes[0].policies, (std::vector<int>{0, 0}));
  EXPECT_EQ(chain.nodes[1].policies, (std::vector<int>{1, 1}));
  EXPECT_EQ(chain.successor[0], 1u);
  EXPECT_EQ(chain.successor[1], 0u);
  const auto dec = cycle_decomposition(chain);
  EXPECT_TRUE(dec.prefix.empty());
  EXPECT_EQ(dec.cycle.size(), 2u);
}

TEST(InduceChain, TransientPrefixMatchesReplay) {
  const auto g = test::pd_game();
  // Agent 1 starts with D and switches to C after (D,D), then stays on C;
  // agent 2 always defects.
  StrategyProfile p;
  p.agents.push_back({test::constant_policy(g, 0, "D"),
                      test::own_first_rule(g, 0, {{{"C", "C"}, "C"}, {{"C", "D"}, "C"}, {{"D", "C"}, "C"}, {{"D", "D"}, "C"}})});
  p.agents.push_back(test::stationary(g, {"D", "D"}).agents[1]);
  const auto chain = induce_chain(g, p);
  const auto dec = cycle_decomposition(chain);
  ASSERT_EQ(dec.prefix.size(), 1u);
  ASSERT_EQ(dec.cycle.size(), 1u);
  const auto traj = rollout(g, p, 10);
  EXPECT_EQ(traj.steps[0].policies, chain.nodes[dec.prefix[0]].policies);
  for (std::size_t t = 1; t < traj.steps.size(); ++t) EXPECT_EQ(traj.steps[t].policies, chain.nodes[dec.cycle[0]].policies);
  expect_rho(average_reward(g, p).rho, {-3, 0});
}

TEST(AverageReward, BundledProfiles) {
  const auto pd = test::pd_game();
  expect_rho(average_reward(pd, test::stationary(pd, {"D", "D"})).rho, {-2, -2});
  expect_rho(average_reward(pd, test::tit_for_tat(pd)).rho, {-1, -1});
  const auto bos = test::bos_game();
  expect_rho(average_reward(bos, test::bos_alternation(bos)).rho, {1.5, 1.5});
  const auto per = test::periodic_game();
  expect_rho(average_reward(per, test::periodic_alternation(per)).rho, {2, 2});
  expect_rho(average_reward(per, test::periodic_alternation(per), 1).rho, {1, 1});
}

TEST(PeriodicDistribution, BundledProfiles) {
  const auto pd = test::pd_game();
  const auto fixed = periodic_distribution(pd, test::stationary(pd, {"D", "D"}));
  EXPECT_EQ(fixed.k, 1u);
  EXPECT_EQ(fixed.phase_mass, (std::vector<std::vector<double>>{{1.0}}));
  EXPECT_EQ(verify_balance(pd, test::stationary(pd, {"D", "D"}), fixed), 0.0);

  const auto bos = test::bos_game();
  const auto alt = test::bos_alternation(bos);
  const auto dist = periodic_distribution(bos, alt);
  ASSERT_EQ(dist.k, 2u);
  EXPECT_EQ(dist.phase_mass[0], (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(dist.phase_mass[1], (std::vector<double>{0.0, 1.0}));
  EXPECT_LE(verify_balance(bos, alt, dist), kBalanceTolerance);
  EXPECT_TRUE(has_minimal_period(dist));

  const auto per = test::periodic_game();
  const auto pdist = periodic_distribution(per, test::periodic_alternation(per));
  EXPECT_EQ(pdist.k, 2u);
  EXPECT_EQ(pdist.entry_length, 0u);
}

TEST(VerifyBalance, PerturbedMassIsRejected) {
  const auto bos = test::bos_game();
  const auto alt = test::bos_alternation(bos);
  auto dist = periodic_distribution(bos, alt);
  dist.phase_mass[0] = {0.9, 0.1};
  dist.phase_mass[1] = {0.9, 0.1};
  EXPECT_GT(verify_balance(bos, alt, dist), 0.1);
  EXPECT_NEAR(verify_balance(bos, alt, dist), 0.8, 1e-12);
}

TEST(VerifyBalance, DimensionMismatchThrows) {
  const auto bos = test::bos_game();
  const auto alt = test::bos_alternation(bos);
  auto dist = periodic_distribution(bos, alt);
  dist.phase_mass[1].push_back(0.0);
  EXPECT_THROW(verify_balance(bos, alt, dist), ValidationError);
  auto wrong_k = periodic_distribution(bos, alt);
  wrong_k.k = 3;
  EXPECT_THROW(verify_balance(bos, alt, wrong_k), ValidationError);
}

TEST(MinimalPeriod, RepeatedPhasesAreNotMinimal) {
  PeriodicDistribution d;
  d.k = 2;
  d.phase_mass = {{1.0, 0.0}, {1.0, 0.0}};
  EXPECT_FALSE(has_minimal_period(d));
  d.phase_mass = {{1.0, 0.0}, {0.0, 1.0}};
  EXPECT_TRUE(has_minimal_period(d));
}

// Every joint profile of the PD joint-action space: 32 x 32 = 1024.
TEST(ExhaustivePd, BalanceAndTwoFormsOnAllProfiles) {
  const auto g = test::pd_game();
  const auto spaces = make_strategy_space(g, UpdateDomain::kJointActionOnly);
  ASSERT_EQ(spaces[0].size() * spaces[1].size(), 1024u);
  std::size_t checked = 0;
  for (std::size_t a = 0; a < spaces[0].size(); ++a) {
    for (std::size_t b = 0; b < spaces[1].size(); ++b) {
      const StrategyProfile p{{spaces[0].strategy(a), spaces[1].strategy(b)}};
      const auto dist = periodic_distribution(g, p);
      ASSERT_LE(verify_balance(g, p, dist), kBalanceTolerance) << a << "," << b;
      ASSERT_TRUE(has_minimal_period(dist));
      const auto rho = average_reward(g, p).rho;
      const auto weighted = phase_weighted_reward(g, p, dist);
      for (int i = 0; i < 2; ++i) ASSERT_NEAR(rho[i], weighted[i], kTwoFormTolerance);
      for (const auto& mass : dist.phase_mass) {
        double total = 0.0;
        for (double m : mass) total += m;
        ASSERT_NEAR(total, 1.0, kEpsilon);
      }
      ++checked;
    }
  }
  EXPECT_EQ(checked, 1024u);
}

class BundledScenario : public ::testing::TestWithParam<std::string> {};

TEST_P(BundledScenario, RandomProfilesAgreeWithOracle) {
  const auto loaded = read_scenario(test::scenario_path(GetParam()));
  const auto& g = loaded.game;
  const ChainEvaluator evaluator(g);
  std::mt19937_64 rng(20261014);
  for (auto domain : {UpdateDomain::kJointActionOnly, UpdateDomain::kFull}) {
    for (int trial = 0; trial < 300; ++trial) {
      const auto p = test::random_profile(g, domain, rng);
      for (int s = 0; s < g.num_states(); ++s) {
        const auto oracle = test::oracle_cycle(g, p, s);
        const auto chain = induce_chain(g, p, s);
        const auto dec = cycle_decomposition(chain);
        const auto fast = evaluator.evaluate(p, s);
        const auto rho = average_reward(g, p, s).rho;
        ASSERT_EQ(dec.cycle.size(), oracle.period);
        ASSERT_EQ(dec.prefix.size(), oracle.entry_length);
        ASSERT_EQ(fast.period, oracle.period);
        ASSERT_EQ(fast.entry_length, oracle.entry_length);
        for (int i = 0; i < g.num_agents(); ++i) {
          ASSERT_NEAR(rho[i], oracle.rho[i], 1e-12);
          ASSERT_NEAR(fast.rho[i], oracle.rho[i], 1e-12);
          ASSERT_GE(rho[i], g.min_payoff() - kEpsilon);
          ASSERT_LE(rho[i], g.max_payoff() + kEpsilon);
        }
        // Closure and node bound.
        std::size_t bound = static_cast<std::size_t>(g.num_states());
        for (int i = 0; i < g.num_agents(); ++i) bound *= policy_count(g, i);
        ASSERT_LE(chain.nodes.size(), bound);
        for (auto succ : chain.successor) ASSERT_LT(succ, chain.nodes.size());
        ASSERT_LE(dec.prefix.size() + dec.cycle.size(), chain.nodes.size());

        const auto dist = periodic_distribution(g, p, s);
        ASSERT_LE(verify_balance(g, p, dist), kBalanceTolerance);
        ASSERT_TRUE(has_minimal_period(dist));
        const auto weighted = phase_weighted_reward(g, p, dist);
        for (int i = 0; i < g.num_agents(); ++i) ASSERT_NEAR(weighted[i], rho[i], kTwoFormTolerance);

        // Restarting from a cycle node leaves rho unchanged.
        const auto& entry = chain.nodes[dec.cycle.front()];
        auto restarted = p;
        for (int i = 0; i < g.num_agents(); ++i) restarted.agents[i].initial = policy_from_index(g, i, entry.policies[i]);
        const auto again = average_reward(g, restarted, entry.state).rho;
        for (int i = 0; i < g.num_agents(); ++i) ASSERT_NEAR(again[i], rho[i], 1e-12);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Scenarios, BundledScenario, ::testing::ValuesIn(test::bundled_scenarios()),
                         [](const auto& info) { return info.param.substr(0, info.param.find('.')); });

TEST(ChainEvaluator, MatchesExplicitChainOnVisiblePhaseGame) {
  const auto g = test::periodic_game(false);
  const ChainEvaluator evaluator(g);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = test::random_profile(g, UpdateDomain::kFull, rng);
    for (int s = 0; s < 2; ++s) {
      const auto fast = evaluator.evaluate(p, s);
      const auto oracle = test::oracle_cycle(g, p, s);
      ASSERT_EQ(fast.period, oracle.period);
      ASSERT_EQ(fast.entry_length, oracle.entry_length);
      for (int i = 0; i < 2; ++i) ASSERT_NEAR(fast.rho[i], oracle.rho[i], 1e-12);
    }
  }
}

}  // namespace
}  // namespace aeq
