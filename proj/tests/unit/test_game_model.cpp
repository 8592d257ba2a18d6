#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "aeq/chain_engine.hpp"
#include "aeq/game_model.hpp"
#include "aeq/simulator.hpp"
#include "fixtures.hpp"

namespace aeq {
namespace {

using test::bos_game;
using test::pd_game;
using test::periodic_game;

int joint(const ActiveMarkovGame& g, std::vector<int> actions) { return g.joint_index(actions); }

TEST(RepeatedGame, PrisonersDilemmaHasOneSelfLoopState) {
  const auto g = pd_game();
  EXPECT_EQ(g.num_states(), 1);
  EXPECT_EQ(g.num_observations(), 1);
  EXPECT_EQ(g.num_joint_actions(), 4);
  for (int j = 0; j < 4; ++j) EXPECT_EQ(g.next_state(0, j), 0);
  EXPECT_EQ(g.rewards(0, joint(g, {1, 1})), (RewardVector{-2, -2}));
  EXPECT_EQ(g.rewards(0, joint(g, {0, 0})), (RewardVector{-1, -1}));
  EXPECT_EQ(g.rewards(0, joint(g, {0, 1})), (RewardVector{-3, 0}));
  EXPECT_EQ(g.rewards(0, joint(g, {1, 0})), (RewardVector{0, -3}));
  EXPECT_DOUBLE_EQ(g.min_payoff(), -3);
  EXPECT_DOUBLE_EQ(g.max_payoff(), 0);
}

TEST(RepeatedGame, BachStravinskyRewardAtBB) {
  const auto g = bos_game();
  EXPECT_EQ(g.rewards(0, joint(g, {0, 0})), (RewardVector{2, 1}));
}

TEST(RepeatedGame, SingleActionGameRewardsEveryStep) {
  const auto g = build_repeated_game(test::stage2({"x"}, {"y"}, {{{5, 5}}}));
  const auto p = test::stationary(g, {"x", "y"});
  const auto traj = rollout(g, p, 25);
  for (const auto& s : traj.steps) EXPECT_EQ(s.reward, (RewardVector{5, 5}));
  EXPECT_EQ(traj.empirical_avg, (RewardVector{5, 5}));
}

TEST(RepeatedGame, MissingJointActionIsNamed) {
  auto stage = test::pd_stage();
  stage.payoff.erase({0, 1});
  try {
    build_repeated_game(stage);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("(C,D)"), std::string::npos) << e.what();
  }
}

TEST(RepeatedGame, RejectsMalformedStages) {
  auto stage = test::pd_stage();
  stage.payoff[{0, 0}] = {1.0};
  EXPECT_THROW(build_repeated_game(stage), ValidationError);
  auto dup = test::pd_stage();
  dup.action_labels[0] = {"C", "C"};
  EXPECT_THROW(build_repeated_game(dup), ValidationError);
  auto empty = test::pd_stage();
  empty.action_labels[1].clear();
  EXPECT_THROW(build_repeated_game(empty), ValidationError);
}

TEST(PeriodicGame, HiddenPhaseCyclesThroughStages) {
  const auto g = periodic_game(true);
  EXPECT_EQ(g.num_states(), 2);
  EXPECT_EQ(g.num_observations(), 1);
  EXPECT_EQ(g.rewards(0, joint(g, {0, 0})), (RewardVector{2, 2}));
  EXPECT_EQ(g.rewards(1, joint(g, {0, 0})), (RewardVector{1, 1}));
  EXPECT_EQ(g.rewards(1, joint(g, {1, 1})), (RewardVector{2, 2}));
  for (int s = 0; s < 2; ++s) {
    for (int j = 0; j < 4; ++j) EXPECT_EQ(g.next_state(s, j), (s + 1) % 2);
  }
  EXPECT_EQ(g.observe(0), g.observe(1));
}

TEST(PeriodicGame, SingleStageMatchesRepeated) {
  const auto periodic = build_periodic_game({test::pd_stage()}, false);
  const auto repeated = pd_game();
  EXPECT_EQ(periodic.definition().transition, repeated.definition().transition);
  EXPECT_EQ(periodic.definition().rewards, repeated.definition().rewards);
  EXPECT_EQ(periodic.num_observations(), repeated.num_observations());
  for (const auto& p : {test::tit_for_tat(repeated), test::stationary(repeated, {"D", "D"})}) {
    EXPECT_EQ(average_reward(periodic, p).rho, average_reward(repeated, p).rho);
  }
}

TEST(PeriodicGame, VisiblePhaseAllowsPhaseDependentPolicy) {
  const auto g = periodic_game(false);
  EXPECT_EQ(g.num_observations(), 2);
  EXPECT_NE(g.observe(0), g.observe(1));
  // A at phase 0 and B at phase 1 for both agents.
  const PolicyParameter track{{0, 1}};
  const auto p = stationary_profile(g, {track, track});
  const auto rho = average_reward(g, p).rho;
  EXPECT_DOUBLE_EQ(rho[0], 2.0);
  EXPECT_DOUBLE_EQ(rho[1], 2.0);
  for (const auto& step : rollout(g, p, 10).steps) EXPECT_EQ(step.reward, (RewardVector{2, 2}));
}

TEST(PeriodicGame, MismatchedActionSetsThrow) {
  auto other = test::periodic_even_stage();
  other.action_labels[1] = {"A", "C"};
  EXPECT_THROW(build_periodic_game({test::periodic_odd_stage(), other}, true), ValidationError);
  EXPECT_THROW(build_periodic_game({}, true), ValidationError);
}

TEST(Builders, EveryStateJointPairHasOneSuccessorAndReward) {
  for (const auto& g : {pd_game(), bos_game(), periodic_game(true), periodic_game(false)}) {
    const auto& def = g.definition();
    ASSERT_EQ(static_cast<int>(def.transition.size()), g.num_states());
    ASSERT_EQ(static_cast<int>(def.rewards.size()), g.num_states());
    for (int s = 0; s < g.num_states(); ++s) {
      ASSERT_EQ(static_cast<int>(def.transition[s].size()), g.num_joint_actions());
      ASSERT_EQ(static_cast<int>(def.rewards[s].size()), g.num_joint_actions());
      for (int j = 0; j < g.num_joint_actions(); ++j) {
        EXPECT_GE(g.next_state(s, j), 0);
        EXPECT_LT(g.next_state(s, j), g.num_states());
        EXPECT_EQ(static_cast<int>(g.rewards(s, j).size()), g.num_agents());
      }
    }
  }
}

TEST(Policies, CountsAndLexicographicOrder) {
  EXPECT_EQ(enumerate_policies(pd_game(), 0).size(), 2u);
  EXPECT_EQ(enumerate_policies(periodic_game(true), 0).size(), 2u);
  const auto visible = enumerate_policies(periodic_game(false), 0);
  ASSERT_EQ(visible.size(), 4u);
  EXPECT_TRUE(std::is_sorted(visible.begin(), visible.end()));
  EXPECT_EQ(visible[1].table, (std::vector<int>{0, 1}));
  const auto g = periodic_game(false);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(policy_index(g, 0, visible[i]), i);
    EXPECT_EQ(policy_from_index(g, 0, i), visible[i]);
    EXPECT_EQ(policy_from_label(g, 0, policy_label(g, 0, visible[i])), visible[i]);
  }
  EXPECT_EQ(policy_label(g, 0, visible[1]), "A/B");
}

TEST(Policies, RejectsInvalidTables) {
  const auto g = pd_game();
  EXPECT_THROW(validate_policy(g, 0, PolicyParameter{{2}}), ValidationError);
  EXPECT_THROW(validate_policy(g, 0, PolicyParameter{{0, 0}}), ValidationError);
  EXPECT_THROW(enumerate_policies(g, 2), ValidationError);
  EXPECT_THROW(policy_from_label(g, 0, "X"), ValidationError);
}

TEST(UpdateRules, JointActionCountIncludesIdentityOnce) {
  const auto g = pd_game();
  const auto rules = enumerate_update_rules(g, 0, UpdateDomain::kJointActionOnly);
  EXPECT_EQ(rules.size(), 16u);
  const auto id = identity_update_rule(g, 0, UpdateDomain::kJointActionOnly);
  EXPECT_EQ(std::count(rules.begin(), rules.end(), id), 1);
  EXPECT_TRUE(std::is_sorted(rules.begin(), rules.end()));
}

TEST(UpdateRules, FullCountIncludesIdentityOnce) {
  const auto g = pd_game();
  const auto rules = enumerate_update_rules(g, 1, UpdateDomain::kFull);
  EXPECT_EQ(rules.size(), 256u);
  EXPECT_EQ(update_key_count(g, 1, UpdateDomain::kFull), 8u);
  const auto id = identity_update_rule(g, 1, UpdateDomain::kFull);
  EXPECT_EQ(std::count(rules.begin(), rules.end(), id), 1);
}

TEST(UpdateRules, CountIsPolicyCountToTheKeyCount) {
  for (const auto& g : {pd_game(), bos_game(), periodic_game(true), periodic_game(false)}) {
    for (int i = 0; i < g.num_agents(); ++i) {
      for (auto d : {UpdateDomain::kJointActionOnly, UpdateDomain::kFull}) {
        std::size_t expected = 1;
        bool fits = true;
        for (std::size_t k = 0; k < update_key_count(g, i, d); ++k) {
          expected *= policy_count(g, i);
          if (expected > (std::size_t{1} << 20)) fits = false;
        }
        if (!fits) continue;
        const auto rules = enumerate_update_rules(g, i, d);
        EXPECT_EQ(rules.size(), expected);
        EXPECT_EQ(update_rule_count_text(g, i, d), std::to_string(expected));
        EXPECT_EQ(std::adjacent_find(rules.begin(), rules.end()), rules.end());
      }
    }
  }
}

TEST(UpdateRules, CapErrorCarriesExactCount) {
  try {
    enumerate_update_rules(pd_game(), 0, UpdateDomain::kJointActionOnly, 15);
    FAIL() << "expected EnumerationCapError";
  } catch (const EnumerationCapError& e) {
    EXPECT_EQ(e.count(), "16");
    EXPECT_EQ(e.cap(), 15u);
  }
  // Visible-phase full domain: 4 policies, 4 * 2 * 4 * 2 = 64 keys.
  try {
    enumerate_update_rules(periodic_game(false), 0, UpdateDomain::kFull);
    FAIL() << "expected EnumerationCapError";
  } catch (const EnumerationCapError& e) {
    EXPECT_EQ(e.count(), "4^64");
    EXPECT_EQ(e.cap(), kDefaultRuleCap);
  }
}

TEST(UpdateRules, IdentityIsIdempotent) {
  for (const auto& g : {pd_game(), periodic_game(true), periodic_game(false)}) {
    for (auto d : {UpdateDomain::kJointActionOnly, UpdateDomain::kFull}) {
      const auto id = identity_update_rule(g, 0, d);
      EXPECT_TRUE(is_identity_rule(g, 0, id));
      for (int p = 0; p < static_cast<int>(policy_count(g, 0)); ++p) {
        for (int s = 0; s < g.num_states(); ++s) {
          // With one observation the policy is the action played.
          for (int j = 0; j < g.num_joint_actions(); ++j) {
            if (d == UpdateDomain::kJointActionOnly && g.num_observations() == 1 && g.agent_action(j, 0) != p) continue;
            const int s2 = g.next_state(s, j);
            const int once = apply_rule(g, 0, id, p, s, j, s2);
            EXPECT_EQ(once, p);
            EXPECT_EQ(apply_rule(g, 0, id, once, s, j, s2), once);
          }
        }
      }
    }
  }
}

TEST(UpdateRules, IdentityProfileKeepsParametersConstant) {
  std::mt19937_64 rng(7);
  for (const auto& g : {pd_game(), bos_game(), periodic_game(true), periodic_game(false)}) {
    for (int trial = 0; trial < 8; ++trial) {
      JointParameters params;
      for (int i = 0; i < 2; ++i) {
        std::uniform_int_distribution<int> pick(0, static_cast<int>(policy_count(g, i)) - 1);
        params.push_back(policy_from_index(g, i, pick(rng)));
      }
      for (auto d : {UpdateDomain::kJointActionOnly, UpdateDomain::kFull}) {
        const auto chain = induce_chain(g, stationary_profile(g, params, d));
        for (const auto& node : chain.nodes) {
          for (int i = 0; i < 2; ++i) EXPECT_EQ(node.policies[i], policy_index(g, i, params[i]));
        }
      }
    }
  }
}

TEST(UpdateRules, LiftToFullPreservesDynamics) {
  std::mt19937_64 rng(11);
  for (const auto& g : {pd_game(), periodic_game(true)}) {
    const auto spaces = make_strategy_space(g, UpdateDomain::kJointActionOnly);
    for (int trial = 0; trial < 50; ++trial) {
      auto p = test::random_space_profile(spaces, rng);
      auto lifted = p;
      for (int i = 0; i < 2; ++i) lifted.agents[i].rule = lift_to_full(g, i, p.agents[i].rule);
      for (int s = 0; s < g.num_states(); ++s) {
        EXPECT_EQ(average_reward(g, p, s).rho, average_reward(g, lifted, s).rho);
      }
    }
  }
}

TEST(UpdateRules, ValidationRejectsPartialTables) {
  const auto g = pd_game();
  UpdateRule short_rule{UpdateDomain::kJointActionOnly, false, {0, 1, 0}};
  EXPECT_THROW(validate_rule(g, 0, short_rule), ValidationError);
  UpdateRule bad_value{UpdateDomain::kJointActionOnly, false, {0, 1, 0, 5}};
  EXPECT_THROW(validate_rule(g, 0, bad_value), ValidationError);
  StrategyProfile one_agent{{{PolicyParameter{{0}}, identity_update_rule(g, 0, UpdateDomain::kFull)}}};
  EXPECT_THROW(validate_profile(g, one_agent), ValidationError);
  EXPECT_THROW(induce_chain(g, one_agent), ValidationError);
}

TEST(KeyOrder, OwnFirstRoundTripIsIdentity) {
  for (int agents : {2, 3}) {
    std::vector<int> joint(agents, 0);
    for (int code = 0; code < (1 << agents) * 3; ++code) {
      int rest = code;
      for (int i = agents - 1; i >= 0; --i) {
        joint[i] = rest % 3;
        rest /= 3;
      }
      for (int i = 0; i < agents; ++i) {
        const auto own_first = global_to_own_first(i, joint);
        EXPECT_EQ(own_first[0], joint[i]);
        EXPECT_EQ(own_first_to_global(i, own_first), joint);
      }
    }
  }
}

TEST(KeyOrder, SecondAgentTableIsNormalized) {
  const auto g = pd_game();
  const auto tft = test::tit_for_tat(g);
  // Global (agent 1, agent 2) keys: each agent copies the other's action.
  for (int j = 0; j < 4; ++j) {
    EXPECT_EQ(tft.agents[0].rule.table[j], g.agent_action(j, 1));
    EXPECT_EQ(tft.agents[1].rule.table[j], g.agent_action(j, 0));
  }
}

TEST(StrategySpace, IndexingAndLookup) {
  const auto g = pd_game();
  const auto spaces = make_strategy_space(g, UpdateDomain::kJointActionOnly);
  ASSERT_EQ(spaces.size(), 2u);
  EXPECT_EQ(spaces[0].size(), 32u);
  for (std::size_t idx = 0; idx < spaces[0].size(); ++idx) {
    EXPECT_EQ(spaces[0].find(g, 0, spaces[0].strategy(idx)), static_cast<std::ptrdiff_t>(idx));
  }
  const auto tft = test::tit_for_tat(g);
  EXPECT_GE(spaces[1].find(g, 1, tft.agents[1]), 0);
  // A full-domain identity from D matches the constant-to-D rule of a full space.
  const auto full = make_strategy_space(g, UpdateDomain::kFull);
  const auto id = test::stationary(g, {"D", "D"}, UpdateDomain::kFull);
  EXPECT_GE(full[0].find(g, 0, id.agents[0]), 0);
  EXPECT_EQ(spaces[0].find(g, 0, id.agents[0]), -1);
}

}  // namespace
}  // namespace aeq
