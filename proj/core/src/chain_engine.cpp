#include "aeq/chain_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace aeq {
namespace {

void check_state(const ActiveMarkovGame& game, int state) {
  if (state < 0 || state >= game.num_states()) {
    throw ValidationError("initial state " + std::to_string(state) + " out of range");
  }
}

}  // namespace

InducedChain induce_chain(const ActiveMarkovGame& game, const StrategyProfile& profile) {
  return induce_chain(game, profile, game.initial_state());
}

InducedChain induce_chain(const ActiveMarkovGame& game, const StrategyProfile& profile,
                          int initial_state) {
  validate_profile(game, profile);
  check_state(game, initial_state);
  const int n = game.num_agents();

  InducedChain chain;
  std::map<ChainNode, std::size_t> index;
  ChainNode node{initial_state, {}};
  for (int i = 0; i < n; ++i) node.policies.push_back(policy_index(game, i, profile.agents[i].initial));

  std::vector<int> actions(n);
  while (true) {
    const auto [it, inserted] = index.emplace(node, chain.nodes.size());
    if (!chain.nodes.empty()) chain.successor.back() = it->second;
    if (!inserted) break;

    const int obs = game.observe(node.state);
    for (int i = 0; i < n; ++i) {
      actions[i] = policy_from_index(game, i, node.policies[i]).table[obs];
    }
    const int joint = game.joint_index(actions);
    const int next_state = game.next_state(node.state, joint);
    ChainNode next{next_state, {}};
    for (int i = 0; i < n; ++i) {
      next.policies.push_back(apply_rule(game, i, profile.agents[i].rule, node.policies[i],
                                         node.state, joint, next_state));
    }
    chain.nodes.push_back(node);
    chain.joint_action.push_back(joint);
    chain.node_reward.push_back(game.rewards(node.state, joint));
    chain.successor.push_back(0);
    node = std::move(next);
  }
  return chain;
}

CycleDecomposition cycle_decomposition(const InducedChain& chain) {
  CycleDecomposition out;
  std::vector<std::ptrdiff_t> visited_at(chain.nodes.size(), -1);
  std::vector<std::size_t> path;
  std::size_t current = chain.initial_node;
  while (visited_at[current] < 0) {
    visited_at[current] = static_cast<std::ptrdiff_t>(path.size());
    path.push_back(current);
    current = chain.successor[current];
  }
  const auto entry = static_cast<std::size_t>(visited_at[current]);
  out.prefix.assign(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(entry));
  out.cycle.assign(path.begin() + static_cast<std::ptrdiff_t>(entry), path.end());
  return out;
}

AverageReward average_reward(const ActiveMarkovGame& game, const StrategyProfile& profile) {
  return average_reward(game, profile, game.initial_state());
}

AverageReward average_reward(const ActiveMarkovGame& game, const StrategyProfile& profile,
                             int initial_state) {
  const auto chain = induce_chain(game, profile, initial_state);
  const auto cycle = cycle_decomposition(chain).cycle;
  AverageReward out{RewardVector(game.num_agents(), 0.0)};
  for (auto node : cycle) {
    for (int i = 0; i < game.num_agents(); ++i) out.rho[i] += chain.node_reward[node][i];
  }
  for (auto& r : out.rho) r /= static_cast<double>(cycle.size());
  return out;
}

PeriodicDistribution periodic_distribution(const ActiveMarkovGame& game,
                                           const StrategyProfile& profile) {
  return periodic_distribution(game, profile, game.initial_state());
}

PeriodicDistribution periodic_distribution(const ActiveMarkovGame& game,
                                           const StrategyProfile& profile, int initial_state) {
  const auto chain = induce_chain(game, profile, initial_state);
  const auto decomposition = cycle_decomposition(chain);
  PeriodicDistribution dist;
  dist.k = decomposition.cycle.size();
  dist.entry_length = decomposition.prefix.size();
  dist.initial_state = initial_state;
  dist.phase_mass.assign(dist.k, std::vector<double>(chain.nodes.size(), 0.0));
  for (std::size_t l = 0; l < dist.k; ++l) dist.phase_mass[l][decomposition.cycle[l]] = 1.0;
  return dist;
}

RewardVector phase_weighted_reward(const ActiveMarkovGame& game, const StrategyProfile& profile,
                                   const PeriodicDistribution& dist) {
  const auto chain = induce_chain(game, profile, dist.initial_state);
  if (dist.phase_mass.size() != dist.k || dist.k == 0) {
    throw ValidationError("periodic distribution has " + std::to_string(dist.phase_mass.size()) +
                          " phases for period " + std::to_string(dist.k));
  }
  RewardVector out(game.num_agents(), 0.0);
  for (const auto& mass : dist.phase_mass) {
    if (mass.size() != chain.nodes.size()) {
      throw ValidationError("phase mass covers " + std::to_string(mass.size()) +
                            " nodes, chain has " + std::to_string(chain.nodes.size()));
    }
    for (std::size_t node = 0; node < mass.size(); ++node) {
      if (mass[node] == 0.0) continue;
      for (int i = 0; i < game.num_agents(); ++i) out[i] += mass[node] * chain.node_reward[node][i];
    }
  }
  for (auto& r : out) r /= static_cast<double>(dist.k);
  return out;
}

double verify_balance(const ActiveMarkovGame& game, const StrategyProfile& profile,
                      const PeriodicDistribution& dist) {
  const auto chain = induce_chain(game, profile, dist.initial_state);
  const std::size_t nodes = chain.nodes.size();
  if (dist.k == 0 || dist.phase_mass.size() != dist.k) {
    throw ValidationError("periodic distribution has " + std::to_string(dist.phase_mass.size()) +
                          " phases for period " + std::to_string(dist.k));
  }
  for (const auto& mass : dist.phase_mass) {
    if (mass.size() != nodes) {
      throw ValidationError("phase mass covers " + std::to_string(mass.size()) +
                            " nodes, chain has " + std::to_string(nodes));
    }
  }
  const double k = static_cast<double>(dist.k);
  std::vector<double> lhs(nodes, 0.0);
  std::vector<double> rhs(nodes, 0.0);
  for (std::size_t l = 0; l < dist.k; ++l) {
    const auto& shifted = dist.phase_mass[(l + 1) % dist.k];
    const auto& current = dist.phase_mass[l];
    for (std::size_t node = 0; node < nodes; ++node) {
      lhs[node] += shifted[node] / k;
      // Deterministic policy, transition and update: the only successor of
      // `node` carries all its mass.
      rhs[chain.successor[node]] += current[node] / k;
    }
  }
  double residual = 0.0;
  for (std::size_t node = 0; node < nodes; ++node) {
    residual = std::max(residual, std::abs(lhs[node] - rhs[node]));
  }
  return residual;
}

bool has_minimal_period(const PeriodicDistribution& dist, double tolerance) {
  for (std::size_t d = 1; d < dist.k; ++d) {
    if (dist.k % d != 0) continue;
    bool invariant = true;
    for (std::size_t l = 0; l < dist.k && invariant; ++l) {
      const auto& a = dist.phase_mass[l];
      const auto& b = dist.phase_mass[(l + d) % dist.k];
      for (std::size_t node = 0; node < a.size(); ++node) {
        if (std::abs(a[node] - b[node]) > tolerance) {
          invariant = false;
          break;
        }
      }
    }
    if (invariant) return false;
  }
  return true;
}

ChainEvaluator::ChainEvaluator(const ActiveMarkovGame& game) : game_(game) {
  const int n = game.num_agents();
  const int obs = game.num_observations();
  long double capacity = static_cast<long double>(game.num_states());
  for (int i = 0; i < n; ++i) {
    const auto count = policy_count(game, i);
    radix_.push_back(count);
    capacity *= static_cast<long double>(count);
    std::vector<int> table(count * static_cast<std::size_t>(obs));
    for (std::size_t p = 0; p < count; ++p) {
      const auto policy = policy_from_index(game, i, static_cast<int>(p));
      for (int o = 0; o < obs; ++o) table[p * obs + o] = policy.table[o];
    }
    action_of_.push_back(std::move(table));
  }
  if (capacity >= static_cast<long double>(std::numeric_limits<std::uint64_t>::max())) {
    throw ValidationError("chain node space does not fit in 64 bits");
  }
}

std::uint64_t ChainEvaluator::encode(int state, std::span<const int> policies) const {
  std::uint64_t code = 0;
  for (std::size_t i = policies.size(); i-- > 0;) code = code * radix_[i] + policies[i];
  return code * static_cast<std::uint64_t>(game_.num_states()) + static_cast<std::uint64_t>(state);
}

int ChainEvaluator::decode(std::uint64_t code, std::vector<int>& policies) const {
  const auto states = static_cast<std::uint64_t>(game_.num_states());
  const int state = static_cast<int>(code % states);
  code /= states;
  for (std::size_t i = 0; i < radix_.size(); ++i) {
    policies[i] = static_cast<int>(code % radix_[i]);
    code /= radix_[i];
  }
  return state;
}

std::uint64_t ChainEvaluator::step(std::uint64_t code, std::span<const UpdateRule* const> rules,
                                   std::vector<int>& scratch, int* joint_out) const {
  const int state = decode(code, scratch);
  const int obs = game_.observe(state);
  const int n = game_.num_agents();
  const int num_obs = game_.num_observations();
  int joint = 0;
  for (int i = 0; i < n; ++i) {
    joint = joint * game_.num_actions(i) + action_of_[i][scratch[i] * num_obs + obs];
  }
  const int next_state = game_.next_state(state, joint);
  if (joint_out != nullptr) *joint_out = joint;
  std::uint64_t next = 0;
  for (int i = n - 1; i >= 0; --i) {
    const UpdateRule& rule = *rules[i];
    int policy;
    if (rule.keep_current) {
      policy = scratch[i];
    } else if (rule.domain == UpdateDomain::kJointActionOnly) {
      policy = rule.table[joint];
    } else {
      policy = rule.table[full_key(game_, i, scratch[i], state, joint, next_state)];
    }
    next = next * radix_[i] + static_cast<std::uint64_t>(policy);
  }
  return next * static_cast<std::uint64_t>(game_.num_states()) +
         static_cast<std::uint64_t>(next_state);
}

CycleStats ChainEvaluator::evaluate(std::span<const int> initial_policies,
                                    std::span<const UpdateRule* const> rules,
                                    int initial_state) const {
  std::vector<int> scratch(radix_.size());
  const std::uint64_t start = encode(initial_state, initial_policies);

  // Brent: find the cycle length first, then the entry point.
  std::size_t power = 1;
  std::size_t period = 1;
  std::uint64_t tortoise = start;
  std::uint64_t hare = step(start, rules, scratch, nullptr);
  while (tortoise != hare) {
    if (power == period) {
      tortoise = hare;
      power *= 2;
      period = 0;
    }
    hare = step(hare, rules, scratch, nullptr);
    ++period;
  }
  tortoise = hare = start;
  for (std::size_t i = 0; i < period; ++i) hare = step(hare, rules, scratch, nullptr);
  std::size_t entry = 0;
  while (tortoise != hare) {
    tortoise = step(tortoise, rules, scratch, nullptr);
    hare = step(hare, rules, scratch, nullptr);
    ++entry;
  }

  CycleStats stats;
  stats.period = period;
  stats.entry_length = entry;
  stats.rho.assign(radix_.size(), 0.0);
  std::uint64_t node = tortoise;
  for (std::size_t i = 0; i < period; ++i) {
    int joint = 0;
    const int state = static_cast<int>(node % static_cast<std::uint64_t>(game_.num_states()));
    node = step(node, rules, scratch, &joint);
    const auto& r = game_.rewards(state, joint);
    for (std::size_t a = 0; a < r.size(); ++a) stats.rho[a] += r[a];
  }
  for (auto& r : stats.rho) r /= static_cast<double>(period);
  return stats;
}

CycleStats ChainEvaluator::evaluate(const StrategyProfile& profile, int initial_state) const {
  validate_profile(game_, profile);
  std::vector<int> policies;
  std::vector<const UpdateRule*> rules;
  for (int i = 0; i < game_.num_agents(); ++i) {
    policies.push_back(policy_index(game_, i, profile.agents[i].initial));
    rules.push_back(&profile.agents[i].rule);
  }
  return evaluate(policies, rules, initial_state);
}

}  // namespace aeq
