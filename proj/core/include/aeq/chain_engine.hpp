#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "aeq/common.hpp"
#include "aeq/game_model.hpp"

namespace aeq {

// (state, joint policy) pair; policies are stored as policy_index values.
struct ChainNode {
  int state = 0;
  std::vector<int> policies;
  auto operator<=>(const ChainNode&) const = default;
};

// Markov chain induced by a deterministic profile. Under deterministic
// policies, rules and transitions the chain is functional, so the nodes
// reachable from the initial node are a transient path followed by a cycle.
// Nodes are listed in the order they are first visited.
struct InducedChain {
  std::vector<ChainNode> nodes;
  std::vector<std::size_t> successor;
  std::vector<int> joint_action;          // flat joint action played at the node
  std::vector<RewardVector> node_reward;  // reward of that joint action
  std::size_t initial_node = 0;
};

InducedChain induce_chain(const ActiveMarkovGame& game, const StrategyProfile& profile);
InducedChain induce_chain(const ActiveMarkovGame& game, const StrategyProfile& profile,
                          int initial_state);

struct CycleDecomposition {
  std::vector<std::size_t> prefix;
  std::vector<std::size_t> cycle;
};

CycleDecomposition cycle_decomposition(const InducedChain& chain);

struct AverageReward {
  RewardVector rho;
};

// Limit-average reward: the mean node reward over the recurrent cycle.
AverageReward average_reward(const ActiveMarkovGame& game, const StrategyProfile& profile);
AverageReward average_reward(const ActiveMarkovGame& game, const StrategyProfile& profile,
                             int initial_state);

// Stationary k-periodic distribution. phase_mass[l][n] is the probability of
// chain node n at phase l, phases counted from the first cycle node.
struct PeriodicDistribution {
  std::size_t k = 1;
  std::vector<std::vector<double>> phase_mass;
  std::size_t entry_length = 0;
  int initial_state = 0;
};

PeriodicDistribution periodic_distribution(const ActiveMarkovGame& game,
                                           const StrategyProfile& profile);
PeriodicDistribution periodic_distribution(const ActiveMarkovGame& game,
                                           const StrategyProfile& profile, int initial_state);

// (1/k) sum_l sum_n mu(n | l) R(n): the phase-weighted form of the average.
RewardVector phase_weighted_reward(const ActiveMarkovGame& game, const StrategyProfile& profile,
                                   const PeriodicDistribution& dist);

// Max over nodes of |(1/k) sum_l mu(n | l+1) - (1/k) sum_l sum_m mu(m | l) P(m -> n)|.
// Throws ValidationError when dist does not match the chain's dimensions.
double verify_balance(const ActiveMarkovGame& game, const StrategyProfile& profile,
                      const PeriodicDistribution& dist);

// True when no proper divisor of dist.k leaves the phase masses invariant.
bool has_minimal_period(const PeriodicDistribution& dist, double tolerance = kEpsilon);

struct CycleStats {
  RewardVector rho;
  std::size_t period = 0;
  std::size_t entry_length = 0;
};

// Allocation-light evaluator used by the exhaustive solvers. Walks the chain
// with Brent's cycle detection on packed node codes instead of materializing
// the InducedChain.
class ChainEvaluator {
 public:
  explicit ChainEvaluator(const ActiveMarkovGame& game);

  CycleStats evaluate(std::span<const int> initial_policies,
                      std::span<const UpdateRule* const> rules, int initial_state) const;
  CycleStats evaluate(const StrategyProfile& profile, int initial_state) const;

  const ActiveMarkovGame& game() const { return game_; }

 private:
  std::uint64_t step(std::uint64_t code, std::span<const UpdateRule* const> rules,
                     std::vector<int>& scratch, int* joint_out) const;
  std::uint64_t encode(int state, std::span<const int> policies) const;
  int decode(std::uint64_t code, std::vector<int>& policies) const;

  const ActiveMarkovGame& game_;
  std::vector<std::uint64_t> radix_;          // policy count per agent
  std::vector<std::vector<int>> action_of_;   // [agent][policy * |O| + obs]
};

}  // namespace aeq
