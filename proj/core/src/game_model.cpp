#include "aeq/game_model.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

namespace aeq {
namespace {

std::string join_labels(const std::vector<std::string>& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ", ";
    out += labels[i];
  }
  return out;
}

std::string describe_joint(const StageGame& stage, const JointAction& joint) {
  std::string out = "(";
  for (std::size_t i = 0; i < joint.size(); ++i) {
    if (i) out += ",";
    out += stage.action_labels[i][joint[i]];
  }
  return out + ")";
}

// Visits every joint action of the given radices in lexicographic order.
template <typename F>
void for_each_joint(const std::vector<int>& radices, F&& f) {
  JointAction joint(radices.size(), 0);
  if (std::any_of(radices.begin(), radices.end(), [](int r) { return r <= 0; })) return;
  while (true) {
    f(joint);
    int i = static_cast<int>(joint.size()) - 1;
    while (i >= 0 && ++joint[i] == radices[i]) {
      joint[i] = 0;
      --i;
    }
    if (i < 0) return;
  }
}

// |base|^exp, or nullopt on overflow of size_t.
std::optional<std::size_t> checked_pow(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && out > std::numeric_limits<std::size_t>::max() / base) return std::nullopt;
    out *= base;
  }
  return out;
}

void check_agent(const ActiveMarkovGame& game, int agent) {
  if (agent < 0 || agent >= game.num_agents()) {
    throw ValidationError("agent index " + std::to_string(agent) + " out of range [0, " +
                          std::to_string(game.num_agents()) + ")");
  }
}

}  // namespace

void validate_stage(const StageGame& stage) {
  if (stage.num_agents <= 0) throw ValidationError("stage game needs at least one agent");
  if (static_cast<int>(stage.action_labels.size()) != stage.num_agents) {
    throw ValidationError("stage game has " + std::to_string(stage.action_labels.size()) +
                          " action lists for " + std::to_string(stage.num_agents) + " agents");
  }
  std::vector<int> radices;
  for (int i = 0; i < stage.num_agents; ++i) {
    const auto& labels = stage.action_labels[i];
    if (labels.empty()) {
      throw ValidationError("agent " + std::to_string(i) + " has no actions");
    }
    std::set<std::string> seen;
    for (const auto& l : labels) {
      if (l.empty()) throw ValidationError("agent " + std::to_string(i) + " has an empty action label");
      if (!seen.insert(l).second) {
        throw ValidationError("agent " + std::to_string(i) + " has duplicate action label '" + l + "'");
      }
    }
    radices.push_back(static_cast<int>(labels.size()));
  }
  for_each_joint(radices, [&](const JointAction& joint) {
    auto it = stage.payoff.find(joint);
    if (it == stage.payoff.end()) {
      throw ValidationError("payoff table is missing joint action " + describe_joint(stage, joint));
    }
    if (static_cast<int>(it->second.size()) != stage.num_agents) {
      throw ValidationError("payoff for joint action " + describe_joint(stage, joint) + " has " +
                            std::to_string(it->second.size()) + " entries, expected " +
                            std::to_string(stage.num_agents));
    }
  });
  std::size_t expected = 1;
  for (int r : radices) expected *= static_cast<std::size_t>(r);
  if (stage.payoff.size() != expected) {
    throw ValidationError("payoff table has entries outside the joint action space");
  }
}

ActiveMarkovGame::ActiveMarkovGame(GameDefinition def) : def_(std::move(def)) {
  const int n = num_agents();
  if (n <= 0) throw ValidationError("game needs at least one agent");
  if (def_.states.empty()) throw ValidationError("game needs at least one state");
  if (def_.observations.empty()) throw ValidationError("game needs at least one observation");

  joint_stride_.assign(n, 1);
  num_joint_ = 1;
  for (int i = n - 1; i >= 0; --i) {
    if (def_.actions[i].empty()) {
      throw ValidationError("agent " + std::to_string(i) + " has no actions");
    }
    joint_stride_[i] = num_joint_;
    num_joint_ *= static_cast<int>(def_.actions[i].size());
  }

  const int s_count = num_states();
  if (static_cast<int>(def_.observe.size()) != s_count) {
    throw ValidationError("observation map must cover all " + std::to_string(s_count) + " states");
  }
  for (int s = 0; s < s_count; ++s) {
    if (def_.observe[s] < 0 || def_.observe[s] >= num_observations()) {
      throw ValidationError("state '" + def_.states[s] + "' maps to an unknown observation");
    }
  }
  if (static_cast<int>(def_.transition.size()) != s_count ||
      static_cast<int>(def_.rewards.size()) != s_count) {
    throw ValidationError("transition and reward tables must cover every state");
  }
  if (def_.initial_state < 0 || def_.initial_state >= s_count) {
    throw ValidationError("initial state out of range");
  }
  min_payoff_ = std::numeric_limits<double>::infinity();
  max_payoff_ = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < s_count; ++s) {
    if (static_cast<int>(def_.transition[s].size()) != num_joint_ ||
        static_cast<int>(def_.rewards[s].size()) != num_joint_) {
      throw ValidationError("state '" + def_.states[s] + "' does not cover all " +
                            std::to_string(num_joint_) + " joint actions");
    }
    for (int j = 0; j < num_joint_; ++j) {
      const int next = def_.transition[s][j];
      if (next < 0 || next >= s_count) {
        throw ValidationError("transition from state '" + def_.states[s] + "' leaves the state set");
      }
      if (static_cast<int>(def_.rewards[s][j].size()) != n) {
        throw ValidationError("reward vector at state '" + def_.states[s] + "' has wrong length");
      }
      for (double r : def_.rewards[s][j]) {
        min_payoff_ = std::min(min_payoff_, r);
        max_payoff_ = std::max(max_payoff_, r);
      }
    }
  }
}

int ActiveMarkovGame::num_actions(int agent) const {
  return static_cast<int>(def_.actions.at(agent).size());
}

int ActiveMarkovGame::joint_index(std::span<const int> actions) const {
  if (static_cast<int>(actions.size()) != num_agents()) {
    throw ValidationError("joint action has wrong number of agents");
  }
  int index = 0;
  for (int i = 0; i < num_agents(); ++i) {
    if (actions[i] < 0 || actions[i] >= num_actions(i)) {
      throw ValidationError("action index out of range for agent " + std::to_string(i));
    }
    index += actions[i] * joint_stride_[i];
  }
  return index;
}

JointAction ActiveMarkovGame::joint_action(int joint) const {
  JointAction out(num_agents());
  for (int i = 0; i < num_agents(); ++i) out[i] = agent_action(joint, i);
  return out;
}

int ActiveMarkovGame::agent_action(int joint, int agent) const {
  return (joint / joint_stride_[agent]) % num_actions(agent);
}

int ActiveMarkovGame::state_index(std::string_view label) const {
  for (int s = 0; s < num_states(); ++s) {
    if (def_.states[s] == label) return s;
  }
  throw ValidationError("unknown state '" + std::string(label) + "'; valid states: " +
                        join_labels(def_.states));
}

int ActiveMarkovGame::action_index(int agent, std::string_view label) const {
  const auto& labels = action_labels(agent);
  for (std::size_t a = 0; a < labels.size(); ++a) {
    if (labels[a] == label) return static_cast<int>(a);
  }
  throw ValidationError("unknown action label '" + std::string(label) + "' for agent " +
                        std::to_string(agent + 1) + "; valid labels: " + join_labels(labels));
}

StageGame ActiveMarkovGame::stage_at(int state) const {
  StageGame stage;
  stage.num_agents = num_agents();
  stage.action_labels = def_.actions;
  for (int j = 0; j < num_joint_; ++j) stage.payoff[joint_action(j)] = def_.rewards.at(state)[j];
  return stage;
}

ActiveMarkovGame build_repeated_game(const StageGame& stage) {
  return build_periodic_game({stage}, true);
}

ActiveMarkovGame build_periodic_game(const std::vector<StageGame>& stages, bool hidden_phase) {
  if (stages.empty()) throw ValidationError("periodic game needs at least one stage");
  for (std::size_t p = 0; p < stages.size(); ++p) {
    try {
      validate_stage(stages[p]);
    } catch (const ValidationError& e) {
      throw ValidationError("stage " + std::to_string(p) + ": " + e.what());
    }
    if (stages[p].num_agents != stages[0].num_agents ||
        stages[p].action_labels != stages[0].action_labels) {
      throw ValidationError("stage " + std::to_string(p) +
                            " has action sets different from stage 0");
    }
  }
  const int k = static_cast<int>(stages.size());
  GameDefinition def;
  def.actions = stages[0].action_labels;
  std::vector<int> radices;
  for (const auto& a : def.actions) radices.push_back(static_cast<int>(a.size()));
  for (int p = 0; p < k; ++p) {
    def.states.push_back(k == 1 ? "s0" : "phase" + std::to_string(p));
    std::vector<int> next;
    std::vector<RewardVector> rewards;
    for_each_joint(radices, [&](const JointAction& joint) {
      next.push_back((p + 1) % k);
      rewards.push_back(stages[p].payoff.at(joint));
    });
    def.transition.push_back(std::move(next));
    def.rewards.push_back(std::move(rewards));
  }
  if (hidden_phase || k == 1) {
    def.observations = {"o0"};
    def.observe.assign(k, 0);
  } else {
    def.observations = def.states;
    for (int p = 0; p < k; ++p) def.observe.push_back(p);
  }
  def.initial_state = 0;
  return ActiveMarkovGame(std::move(def));
}

std::size_t policy_count(const ActiveMarkovGame& game, int agent) {
  check_agent(game, agent);
  auto count = checked_pow(static_cast<std::size_t>(game.num_actions(agent)),
                           static_cast<std::size_t>(game.num_observations()));
  if (!count || *count > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
    throw ValidationError("policy space of agent " + std::to_string(agent) + " is too large");
  }
  return *count;
}

void validate_policy(const ActiveMarkovGame& game, int agent, const PolicyParameter& policy) {
  check_agent(game, agent);
  if (static_cast<int>(policy.table.size()) != game.num_observations()) {
    throw ValidationError("policy of agent " + std::to_string(agent) + " covers " +
                          std::to_string(policy.table.size()) + " observations, expected " +
                          std::to_string(game.num_observations()));
  }
  for (int a : policy.table) {
    if (a < 0 || a >= game.num_actions(agent)) {
      throw ValidationError("policy of agent " + std::to_string(agent) +
                            " uses an invalid action index " + std::to_string(a));
    }
  }
}

int policy_index(const ActiveMarkovGame& game, int agent, const PolicyParameter& policy) {
  validate_policy(game, agent, policy);
  int index = 0;
  for (int a : policy.table) index = index * game.num_actions(agent) + a;
  return index;
}

PolicyParameter policy_from_index(const ActiveMarkovGame& game, int agent, int index) {
  const auto count = policy_count(game, agent);
  if (index < 0 || static_cast<std::size_t>(index) >= count) {
    throw ValidationError("policy index out of range");
  }
  PolicyParameter p;
  p.table.assign(game.num_observations(), 0);
  const int radix = game.num_actions(agent);
  for (int o = game.num_observations() - 1; o >= 0; --o) {
    p.table[o] = index % radix;
    index /= radix;
  }
  return p;
}

std::vector<PolicyParameter> enumerate_policies(const ActiveMarkovGame& game, int agent) {
  const auto count = policy_count(game, agent);
  std::vector<PolicyParameter> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(policy_from_index(game, agent, static_cast<int>(i)));
  }
  return out;
}

std::string policy_label(const ActiveMarkovGame& game, int agent, const PolicyParameter& policy) {
  validate_policy(game, agent, policy);
  std::string out;
  for (std::size_t o = 0; o < policy.table.size(); ++o) {
    if (o) out += "/";
    out += game.action_labels(agent)[policy.table[o]];
  }
  return out;
}

PolicyParameter policy_from_label(const ActiveMarkovGame& game, int agent, std::string_view label) {
  check_agent(game, agent);
  PolicyParameter p;
  std::size_t start = 0;
  while (true) {
    const auto slash = label.find('/', start);
    const auto part = label.substr(start, slash == std::string_view::npos ? label.npos : slash - start);
    p.table.push_back(game.action_index(agent, part));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  if (static_cast<int>(p.table.size()) != game.num_observations()) {
    throw ValidationError("policy '" + std::string(label) + "' of agent " + std::to_string(agent + 1) +
                          " must give one action per observation (" +
                          std::to_string(game.num_observations()) + ", separated by '/')");
  }
  return p;
}

std::string_view to_string(UpdateDomain domain) {
  return domain == UpdateDomain::kFull ? "full" : "joint_action";
}

UpdateDomain parse_update_domain(std::string_view text) {
  if (text == "joint_action") return UpdateDomain::kJointActionOnly;
  if (text == "full") return UpdateDomain::kFull;
  throw ValidationError("update domain must be 'joint_action' or 'full', got '" + std::string(text) + "'");
}

std::size_t update_key_count(const ActiveMarkovGame& game, int agent, UpdateDomain domain) {
  const auto joint = static_cast<std::size_t>(game.num_joint_actions());
  if (domain == UpdateDomain::kJointActionOnly) return joint;
  const auto states = static_cast<std::size_t>(game.num_states());
  return policy_count(game, agent) * states * joint * states;
}

std::size_t full_key(const ActiveMarkovGame& game, int agent, int policy, int state, int joint,
                     int next_state) {
  (void)agent;
  const auto states = static_cast<std::size_t>(game.num_states());
  const auto joints = static_cast<std::size_t>(game.num_joint_actions());
  return ((static_cast<std::size_t>(policy) * states + static_cast<std::size_t>(state)) * joints +
          static_cast<std::size_t>(joint)) *
             states +
         static_cast<std::size_t>(next_state);
}

int apply_rule(const ActiveMarkovGame& game, int agent, const UpdateRule& rule, int current,
               int state, int joint, int next_state) {
  if (rule.keep_current) return current;
  if (rule.domain == UpdateDomain::kJointActionOnly) return rule.table.at(joint);
  return rule.table.at(full_key(game, agent, current, state, joint, next_state));
}

UpdateRule identity_update_rule(const ActiveMarkovGame& game, int agent, UpdateDomain domain) {
  check_agent(game, agent);
  UpdateRule rule;
  rule.domain = domain;
  if (domain == UpdateDomain::kFull) {
    rule.table.resize(update_key_count(game, agent, domain));
    const int policies = static_cast<int>(policy_count(game, agent));
    for (int p = 0; p < policies; ++p) {
      for (int s = 0; s < game.num_states(); ++s) {
        for (int j = 0; j < game.num_joint_actions(); ++j) {
          for (int s2 = 0; s2 < game.num_states(); ++s2) {
            rule.table[full_key(game, agent, p, s, j, s2)] = p;
          }
        }
      }
    }
  } else if (game.num_observations() == 1) {
    // With one observation the policy is the own action, which every joint
    // action key records.
    for (int j = 0; j < game.num_joint_actions(); ++j) {
      rule.table.push_back(game.agent_action(j, agent));
    }
  } else {
    rule.keep_current = true;
  }
  return rule;
}

bool is_identity_rule(const ActiveMarkovGame& game, int agent, const UpdateRule& rule) {
  return rule == identity_update_rule(game, agent, rule.domain);
}

UpdateRule lift_to_full(const ActiveMarkovGame& game, int agent, const UpdateRule& rule) {
  if (rule.domain == UpdateDomain::kFull) return rule;
  validate_rule(game, agent, rule);
  UpdateRule full;
  full.domain = UpdateDomain::kFull;
  full.table.resize(update_key_count(game, agent, UpdateDomain::kFull));
  const int policies = static_cast<int>(policy_count(game, agent));
  for (int p = 0; p < policies; ++p) {
    for (int s = 0; s < game.num_states(); ++s) {
      for (int j = 0; j < game.num_joint_actions(); ++j) {
        for (int s2 = 0; s2 < game.num_states(); ++s2) {
          full.table[full_key(game, agent, p, s, j, s2)] = rule.keep_current ? p : rule.table[j];
        }
      }
    }
  }
  return full;
}

std::string update_rule_count_text(const ActiveMarkovGame& game, int agent, UpdateDomain domain) {
  const auto base = policy_count(game, agent);
  const auto keys = update_key_count(game, agent, domain);
  if (auto exact = checked_pow(base, keys)) return std::to_string(*exact);
  return std::to_string(base) + "^" + std::to_string(keys);
}

std::vector<UpdateRule> enumerate_update_rules(const ActiveMarkovGame& game, int agent,
                                               UpdateDomain domain, std::size_t cap) {
  const auto base = policy_count(game, agent);
  const auto keys = update_key_count(game, agent, domain);
  const auto count = checked_pow(base, keys);
  if (!count || *count > cap) {
    throw EnumerationCapError("update rule", update_rule_count_text(game, agent, domain), cap);
  }
  std::vector<UpdateRule> out;
  out.reserve(*count);
  UpdateRule rule;
  rule.domain = domain;
  rule.table.assign(keys, 0);
  for (std::size_t n = 0; n < *count; ++n) {
    out.push_back(rule);
    for (std::size_t i = keys; i-- > 0;) {
      if (++rule.table[i] < static_cast<int>(base)) break;
      rule.table[i] = 0;
    }
  }
  return out;
}

void validate_rule(const ActiveMarkovGame& game, int agent, const UpdateRule& rule) {
  check_agent(game, agent);
  if (rule.keep_current) {
    if (!rule.table.empty()) throw ValidationError("identity rule must not carry a table");
    return;
  }
  const auto keys = update_key_count(game, agent, rule.domain);
  if (rule.table.size() != keys) {
    throw ValidationError("update rule of agent " + std::to_string(agent) + " covers " +
                          std::to_string(rule.table.size()) + " keys, expected " +
                          std::to_string(keys));
  }
  const auto policies = static_cast<int>(policy_count(game, agent));
  for (int v : rule.table) {
    if (v < 0 || v >= policies) {
      throw ValidationError("update rule of agent " + std::to_string(agent) +
                            " maps to an invalid policy index " + std::to_string(v));
    }
  }
}

void validate_profile(const ActiveMarkovGame& game, const StrategyProfile& profile) {
  if (static_cast<int>(profile.agents.size()) != game.num_agents()) {
    throw ValidationError("profile has " + std::to_string(profile.agents.size()) +
                          " agents, game has " + std::to_string(game.num_agents()));
  }
  for (int i = 0; i < game.num_agents(); ++i) {
    validate_policy(game, i, profile.agents[i].initial);
    validate_rule(game, i, profile.agents[i].rule);
  }
}

StrategyProfile stationary_profile(const ActiveMarkovGame& game, const JointParameters& params,
                                   UpdateDomain domain) {
  if (static_cast<int>(params.size()) != game.num_agents()) {
    throw ValidationError("joint parameters have the wrong number of agents");
  }
  StrategyProfile profile;
  for (int i = 0; i < game.num_agents(); ++i) {
    profile.agents.push_back({params[i], identity_update_rule(game, i, domain)});
  }
  return profile;
}

AgentStrategy AgentSpace::strategy(std::size_t index) const {
  return {parameters.at(index / rules.size()), rules.at(index % rules.size())};
}

std::ptrdiff_t AgentSpace::find(const ActiveMarkovGame& game, int agent,
                                const AgentStrategy& s) const {
  const auto p = std::find(parameters.begin(), parameters.end(), s.initial);
  if (p == parameters.end()) return -1;
  const auto p_index = static_cast<std::size_t>(p - parameters.begin());
  auto r = std::find(rules.begin(), rules.end(), s.rule);
  if (r == rules.end() && is_identity_rule(game, agent, s.rule)) {
    // From a fixed initial policy the identity behaves exactly like the
    // constant rule onto that policy.
    const int target = policy_index(game, agent, s.initial);
    r = std::find_if(rules.begin(), rules.end(), [&](const UpdateRule& u) {
      return !u.keep_current && u.domain == s.rule.domain &&
             std::all_of(u.table.begin(), u.table.end(), [&](int v) { return v == target; });
    });
  }
  if (r == rules.end()) return -1;
  return static_cast<std::ptrdiff_t>(p_index * rules.size() +
                                     static_cast<std::size_t>(r - rules.begin()));
}

StrategySpace make_strategy_space(const ActiveMarkovGame& game, UpdateDomain domain,
                                  std::size_t rule_cap) {
  StrategySpace space;
  for (int i = 0; i < game.num_agents(); ++i) {
    space.push_back({enumerate_policies(game, i), enumerate_update_rules(game, i, domain, rule_cap)});
  }
  return space;
}

JointAction own_first_to_global(int agent, std::span<const int> own_first) {
  if (agent < 0 || agent >= static_cast<int>(own_first.size())) {
    throw ValidationError("agent index out of range for joint action key");
  }
  JointAction global;
  global.reserve(own_first.size());
  for (int i = 0; i < static_cast<int>(own_first.size()); ++i) {
    if (i == agent) {
      global.push_back(own_first[0]);
    } else {
      global.push_back(own_first[i < agent ? i + 1 : i]);
    }
  }
  return global;
}

JointAction global_to_own_first(int agent, std::span<const int> global) {
  if (agent < 0 || agent >= static_cast<int>(global.size())) {
    throw ValidationError("agent index out of range for joint action key");
  }
  JointAction own_first{global[agent]};
  for (int i = 0; i < static_cast<int>(global.size()); ++i) {
    if (i != agent) own_first.push_back(global[i]);
  }
  return own_first;
}

}  // namespace aeq
