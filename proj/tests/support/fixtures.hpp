#pragma once

#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "aeq/chain_engine.hpp"
#include "aeq/game_model.hpp"

namespace aeq::test {

using Cell = std::pair<double, double>;

// Two-player stage game from a row-major payoff grid.
inline StageGame stage2(std::vector<std::string> rows, std::vector<std::string> cols,
                        const std::vector<std::vector<Cell>>& grid) {
  StageGame g;
  g.num_agents = 2;
  g.action_labels = {std::move(rows), std::move(cols)};
  for (int r = 0; r < static_cast<int>(grid.size()); ++r) {
    for (int c = 0; c < static_cast<int>(grid[r].size()); ++c) {
      g.payoff[{r, c}] = {grid[r][c].first, grid[r][c].second};
    }
  }
  return g;
}

inline StageGame pd_stage() {
  return stage2({"C", "D"}, {"C", "D"}, {{{-1, -1}, {-3, 0}}, {{0, -3}, {-2, -2}}});
}
inline StageGame bos_stage() {
  return stage2({"B", "S"}, {"B", "S"}, {{{2, 1}, {0, 0}}, {{0, 0}, {1, 2}}});
}
inline StageGame periodic_odd_stage() {
  return stage2({"A", "B"}, {"A", "B"}, {{{2, 2}, {0, 0}}, {{0, 0}, {1, 1}}});
}
inline StageGame periodic_even_stage() {
  return stage2({"A", "B"}, {"A", "B"}, {{{1, 1}, {0, 0}}, {{0, 0}, {2, 2}}});
}
inline StageGame matching_pennies_stage() {
  return stage2({"H", "T"}, {"H", "T"}, {{{1, -1}, {-1, 1}}, {{-1, 1}, {1, -1}}});
}

inline ActiveMarkovGame pd_game() { return build_repeated_game(pd_stage()); }
inline ActiveMarkovGame bos_game() { return build_repeated_game(bos_stage()); }
inline ActiveMarkovGame periodic_game(bool hidden = true) {
  return build_periodic_game({periodic_odd_stage(), periodic_even_stage()}, hidden);
}

// Joint-action rule of a two-player single-observation game written as
// {(own label, other label) -> next action label}.
using OwnFirstTable = std::map<std::pair<std::string, std::string>, std::string>;

inline UpdateRule own_first_rule(const ActiveMarkovGame& game, int agent, const OwnFirstTable& t) {
  UpdateRule rule;
  rule.domain = UpdateDomain::kJointActionOnly;
  const int other = 1 - agent;
  for (int j = 0; j < game.num_joint_actions(); ++j) {
    const auto& own = game.action_labels(agent)[game.agent_action(j, agent)];
    const auto& opp = game.action_labels(other)[game.agent_action(j, other)];
    rule.table.push_back(game.action_index(agent, t.at({own, opp})));
  }
  return rule;
}

inline PolicyParameter constant_policy(const ActiveMarkovGame& game, int agent, const std::string& label) {
  return PolicyParameter{std::vector<int>(game.num_observations(), game.action_index(agent, label))};
}

inline StrategyProfile symmetric_profile(const ActiveMarkovGame& game, const std::string& initial,
                                         const OwnFirstTable& t) {
  StrategyProfile p;
  for (int i = 0; i < 2; ++i) p.agents.push_back({constant_policy(game, i, initial), own_first_rule(game, i, t)});
  return p;
}

inline StrategyProfile tit_for_tat(const ActiveMarkovGame& pd) {
  return symmetric_profile(pd, "C", {{{"C", "C"}, "C"}, {{"C", "D"}, "D"}, {{"D", "C"}, "C"}, {{"D", "D"}, "D"}});
}
inline StrategyProfile bos_alternation(const ActiveMarkovGame& bos) {
  return symmetric_profile(bos, "B", {{{"B", "B"}, "S"}, {{"B", "S"}, "S"}, {{"S", "B"}, "B"}, {{"S", "S"}, "B"}});
}
inline StrategyProfile periodic_alternation(const ActiveMarkovGame& g) {
  return symmetric_profile(g, "A", {{{"A", "A"}, "B"}, {{"A", "B"}, "B"}, {{"B", "A"}, "A"}, {{"B", "B"}, "A"}});
}

// Constant policies with identity rules in the given domain.
inline StrategyProfile stationary(const ActiveMarkovGame& game, const std::vector<std::string>& labels,
                                  UpdateDomain domain = UpdateDomain::kJointActionOnly) {
  JointParameters params;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) params.push_back(constant_policy(game, i, labels[i]));
  return stationary_profile(game, params, domain);
}

inline std::string scenario_path(const std::string& name) {
  return std::string(AEQ_SCENARIO_DIR) + "/" + name;
}
inline std::string test_data_path(const std::string& name) {
  return std::string(AEQ_TEST_DATA_DIR) + "/" + name;
}
inline const std::vector<std::string>& bundled_scenarios() {
  static const std::vector<std::string> names{"prisoners_dilemma.json", "bach_stravinsky.json",
                                              "periodic_game.json"};
  return names;
}

// Independent reference for the induced dynamics: steps the game table by
// table, compares whole nodes by linear search and averages the cycle.
struct OracleCycle {
  RewardVector rho;
  std::size_t period = 0;
  std::size_t entry_length = 0;
  std::vector<std::pair<int, std::vector<int>>> path;  // prefix then cycle
};

inline int oracle_next_policy(const ActiveMarkovGame& g, const UpdateRule& rule, int current, int state,
                              int joint, int next_state) {
  if (rule.keep_current) return current;
  if (rule.domain == UpdateDomain::kJointActionOnly) return rule.table.at(joint);
  const auto s = static_cast<std::size_t>(g.num_states());
  const auto a = static_cast<std::size_t>(g.num_joint_actions());
  const auto key = ((static_cast<std::size_t>(current) * s + state) * a + joint) * s + next_state;
  return rule.table.at(key);
}

inline OracleCycle oracle_cycle(const ActiveMarkovGame& g, const StrategyProfile& p, int initial_state) {
  const int n = g.num_agents();
  std::vector<int> policies;
  for (int i = 0; i < n; ++i) policies.push_back(policy_index(g, i, p.agents[i].initial));
  int state = initial_state;
  OracleCycle out;
  std::vector<RewardVector> rewards;
  while (true) {
    for (std::size_t k = 0; k < out.path.size(); ++k) {
      if (out.path[k].first == state && out.path[k].second == policies) {
        out.entry_length = k;
        out.period = out.path.size() - k;
        out.rho.assign(n, 0.0);
        for (std::size_t m = k; m < out.path.size(); ++m) {
          for (int i = 0; i < n; ++i) out.rho[i] += rewards[m][i];
        }
        for (auto& r : out.rho) r /= static_cast<double>(out.period);
        return out;
      }
    }
    out.path.emplace_back(state, policies);
    std::vector<int> actions;
    for (int i = 0; i < n; ++i) {
      actions.push_back(policy_from_index(g, i, policies[i]).table[g.observe(state)]);
    }
    const int joint = g.joint_index(actions);
    rewards.push_back(g.rewards(state, joint));
    const int next = g.next_state(state, joint);
    for (int i = 0; i < n; ++i) {
      policies[i] = oracle_next_policy(g, p.agents[i].rule, policies[i], state, joint, next);
    }
    state = next;
  }
}

// Uniform random rule over the domain.
inline UpdateRule random_rule(const ActiveMarkovGame& g, int agent, UpdateDomain domain, std::mt19937_64& rng) {
  UpdateRule rule;
  rule.domain = domain;
  std::uniform_int_distribution<int> pick(0, static_cast<int>(policy_count(g, agent)) - 1);
  const auto keys = update_key_count(g, agent, domain);
  for (std::size_t k = 0; k < keys; ++k) rule.table.push_back(pick(rng));
  return rule;
}

inline StrategyProfile random_profile(const ActiveMarkovGame& g, UpdateDomain domain, std::mt19937_64& rng) {
  StrategyProfile p;
  for (int i = 0; i < g.num_agents(); ++i) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(policy_count(g, i)) - 1);
    p.agents.push_back({policy_from_index(g, i, pick(rng)), random_rule(g, i, domain, rng)});
  }
  return p;
}

// Profile drawn from the joint product of enumerated spaces.
inline StrategyProfile random_space_profile(const StrategySpace& spaces, std::mt19937_64& rng) {
  StrategyProfile p;
  for (const auto& s : spaces) {
    std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
    p.agents.push_back(s.strategy(pick(rng)));
  }
  return p;
}

// Random two-player stage game with small integer payoffs.
inline StageGame random_stage(int rows, int cols, std::mt19937_64& rng, int lo = -3, int hi = 3) {
  std::uniform_int_distribution<int> pay(lo, hi);
  std::vector<std::string> r, c;
  for (int i = 0; i < rows; ++i) r.push_back("r" + std::to_string(i));
  for (int i = 0; i < cols; ++i) c.push_back("c" + std::to_string(i));
  std::vector<std::vector<Cell>> grid(rows, std::vector<Cell>(cols));
  for (auto& row : grid) {
    for (auto& cell : row) cell = {pay(rng), pay(rng)};
  }
  return stage2(r, c, grid);
}

}  // namespace aeq::test
