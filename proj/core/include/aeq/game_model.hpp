#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aeq/common.hpp"

namespace aeq {

// One action index per agent, in agent-index order.
using JointAction = std::vector<int>;

// Normal-form game played at a single state.
struct StageGame {
  int num_agents = 0;
  std::vector<std::vector<std::string>> action_labels;
  std::map<JointAction, RewardVector> payoff;
};

// Throws ValidationError naming the first missing or malformed joint action.
void validate_stage(const StageGame& stage);

// Raw tables from which an ActiveMarkovGame is built. Joint actions are
// flattened with agent 0 as the most significant digit, so the flat order
// is the lexicographic order of joint actions.
struct GameDefinition {
  std::vector<std::string> states;
  std::vector<std::string> observations;
  std::vector<int> observe;                            // state -> observation
  std::vector<std::vector<std::string>> actions;       // per agent
  std::vector<std::vector<int>> transition;            // [state][joint] -> state
  std::vector<std::vector<RewardVector>> rewards;      // [state][joint] -> per agent
  int initial_state = 0;
};

// Finite active Markov game with deterministic transitions. Immutable once
// constructed; the constructor validates totality of every table.
class ActiveMarkovGame {
 public:
  explicit ActiveMarkovGame(GameDefinition def);

  int num_agents() const { return static_cast<int>(def_.actions.size()); }
  int num_states() const { return static_cast<int>(def_.states.size()); }
  int num_observations() const { return static_cast<int>(def_.observations.size()); }
  int num_actions(int agent) const;
  int num_joint_actions() const { return num_joint_; }
  int initial_state() const { return def_.initial_state; }

  int observe(int state) const { return def_.observe[state]; }
  int next_state(int state, int joint) const { return def_.transition[state][joint]; }
  double reward(int state, int joint, int agent) const {
    return def_.rewards[state][joint][agent];
  }
  const RewardVector& rewards(int state, int joint) const {
    return def_.rewards[state][joint];
  }

  int joint_index(std::span<const int> actions) const;
  JointAction joint_action(int joint) const;
  // Action of `agent` inside the flat joint index.
  int agent_action(int joint, int agent) const;

  const std::string& state_label(int state) const { return def_.states.at(state); }
  const std::string& observation_label(int obs) const { return def_.observations.at(obs); }
  const std::vector<std::string>& state_labels() const { return def_.states; }
  const std::vector<std::string>& action_labels(int agent) const {
    return def_.actions.at(agent);
  }
  int state_index(std::string_view label) const;
  // Throws ValidationError listing the valid labels.
  int action_index(int agent, std::string_view label) const;

  double min_payoff() const { return min_payoff_; }
  double max_payoff() const { return max_payoff_; }

  // Normal-form game induced at `state`.
  StageGame stage_at(int state) const;

  const GameDefinition& definition() const { return def_; }

 private:
  GameDefinition def_;
  std::vector<int> joint_stride_;
  int num_joint_ = 1;
  double min_payoff_ = 0.0;
  double max_payoff_ = 0.0;
};

ActiveMarkovGame build_repeated_game(const StageGame& stage);

// Cyclic game over stages.size() phases; phase p plays stages[p] and moves to
// (p + 1) mod k regardless of actions. With hidden_phase every phase maps to
// one observation.
ActiveMarkovGame build_periodic_game(const std::vector<StageGame>& stages,
                                     bool hidden_phase);

// Deterministic policy: one action per observation.
struct PolicyParameter {
  std::vector<int> table;
  auto operator<=>(const PolicyParameter&) const = default;
};

using JointParameters = std::vector<PolicyParameter>;

std::size_t policy_count(const ActiveMarkovGame& game, int agent);
// Mixed-radix code with observation 0 as the most significant digit; this is
// the lexicographic position of the table in enumerate_policies.
int policy_index(const ActiveMarkovGame& game, int agent, const PolicyParameter& policy);
PolicyParameter policy_from_index(const ActiveMarkovGame& game, int agent, int index);
std::vector<PolicyParameter> enumerate_policies(const ActiveMarkovGame& game, int agent);

// Action label for single-observation games, otherwise the per-observation
// labels joined with '/'.
std::string policy_label(const ActiveMarkovGame& game, int agent, const PolicyParameter& policy);
PolicyParameter policy_from_label(const ActiveMarkovGame& game, int agent, std::string_view label);

void validate_policy(const ActiveMarkovGame& game, int agent, const PolicyParameter& policy);

enum class UpdateDomain { kJointActionOnly, kFull };

std::string_view to_string(UpdateDomain domain);
UpdateDomain parse_update_domain(std::string_view text);

// Deterministic update rule. `table` maps a key to the next policy, stored as
// its policy_index. Keys:
//   kJointActionOnly: joint action index.
//   kFull: ((own policy * |S| + state) * |A| + joint) * |S| + next state.
// `keep_current` marks the identity for joint-action domains whose policy is
// not recoverable from the joint action (games with several observations).
struct UpdateRule {
  UpdateDomain domain = UpdateDomain::kJointActionOnly;
  bool keep_current = false;
  std::vector<int> table;
  auto operator<=>(const UpdateRule&) const = default;
};

std::size_t update_key_count(const ActiveMarkovGame& game, int agent, UpdateDomain domain);
std::size_t full_key(const ActiveMarkovGame& game, int agent, int policy, int state,
                     int joint, int next_state);

inline int next_policy(const UpdateRule& rule, std::size_t full_key_index, int joint,
                       int current) {
  if (rule.keep_current) return current;
  return rule.domain == UpdateDomain::kFull ? rule.table[full_key_index] : rule.table[joint];
}

int apply_rule(const ActiveMarkovGame& game, int agent, const UpdateRule& rule, int current,
               int state, int joint, int next_state);

UpdateRule identity_update_rule(const ActiveMarkovGame& game, int agent, UpdateDomain domain);
// True when the rule equals identity_update_rule of its own domain. A lifted
// joint-action identity is not one: its table differs on unreachable keys.
bool is_identity_rule(const ActiveMarkovGame& game, int agent, const UpdateRule& rule);
// Re-expresses a joint-action rule over the full key domain.
UpdateRule lift_to_full(const ActiveMarkovGame& game, int agent, const UpdateRule& rule);

inline constexpr std::size_t kDefaultRuleCap = std::size_t{1} << 24;

// Exact |policies|^|keys| as text ("256", or "2^1024" beyond 64 bits).
std::string update_rule_count_text(const ActiveMarkovGame& game, int agent, UpdateDomain domain);
// Every total map from the key domain to policies, lexicographic by table
// (key 0 most significant). Throws EnumerationCapError above `cap`.
std::vector<UpdateRule> enumerate_update_rules(const ActiveMarkovGame& game, int agent,
                                               UpdateDomain domain,
                                               std::size_t cap = kDefaultRuleCap);

void validate_rule(const ActiveMarkovGame& game, int agent, const UpdateRule& rule);

struct AgentStrategy {
  PolicyParameter initial;
  UpdateRule rule;
  auto operator<=>(const AgentStrategy&) const = default;
};

struct StrategyProfile {
  std::vector<AgentStrategy> agents;
  auto operator<=>(const StrategyProfile&) const = default;
};

void validate_profile(const ActiveMarkovGame& game, const StrategyProfile& profile);

// Stationary profile: the given parameters with identity updates.
StrategyProfile stationary_profile(const ActiveMarkovGame& game, const JointParameters& params,
                                   UpdateDomain domain = UpdateDomain::kFull);

// Candidate strategies of one agent: every (parameter, rule) pair. Strategy
// index = parameter index * rules.size() + rule index.
struct AgentSpace {
  std::vector<PolicyParameter> parameters;
  std::vector<UpdateRule> rules;

  std::size_t size() const { return parameters.size() * rules.size(); }
  AgentStrategy strategy(std::size_t index) const;
  // Index of `s` in this space, or -1. Identity rules match any table that is
  // an identity from the same initial policy.
  std::ptrdiff_t find(const ActiveMarkovGame& game, int agent, const AgentStrategy& s) const;
};

using StrategySpace = std::vector<AgentSpace>;

StrategySpace make_strategy_space(const ActiveMarkovGame& game, UpdateDomain domain,
                                  std::size_t rule_cap = kDefaultRuleCap);

// Joint-action key conversions between agent-index order and the
// (own action, other agents in index order) convention.
JointAction own_first_to_global(int agent, std::span<const int> own_first);
JointAction global_to_own_first(int agent, std::span<const int> global);

}  // namespace aeq
