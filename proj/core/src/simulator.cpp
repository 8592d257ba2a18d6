#include "aeq/simulator.hpp"

#include <map>
#include <utility>

namespace aeq {

Trajectory rollout(const ActiveMarkovGame& game, const StrategyProfile& profile, std::size_t steps,
                   std::optional<std::uint64_t> seed) {
  if (seed) {
    throw ValidationError("rollout takes no seed: transitions, policies and updates are deterministic");
  }
  return rollout_from(game, profile, game.initial_state(), steps);
}

Trajectory rollout_from(const ActiveMarkovGame& game, const StrategyProfile& profile,
                        int initial_state, std::size_t steps) {
  validate_profile(game, profile);
  if (steps == 0) throw ValidationError("rollout needs at least one step");
  if (initial_state < 0 || initial_state >= game.num_states()) {
    throw ValidationError("initial state out of range");
  }
  const int n = game.num_agents();
  std::vector<PolicyParameter> params;
  for (const auto& a : profile.agents) params.push_back(a.initial);

  Trajectory traj;
  traj.steps.reserve(steps);
  traj.empirical_avg.assign(n, 0.0);
  int state = initial_state;
  for (std::size_t t = 0; t < steps; ++t) {
    TrajectoryStep step;
    step.state = state;
    const int obs = game.observe(state);
    for (int i = 0; i < n; ++i) {
      step.policies.push_back(policy_index(game, i, params[i]));
      step.joint_action.push_back(params[i].table[obs]);
    }
    const int joint = game.joint_index(step.joint_action);
    step.reward = game.rewards(state, joint);
    step.next_state = game.next_state(state, joint);
    for (int i = 0; i < n; ++i) {
      const int next = apply_rule(game, i, profile.agents[i].rule, step.policies[i], state, joint,
                                  step.next_state);
      params[i] = policy_from_index(game, i, next);
      traj.empirical_avg[i] += step.reward[i];
    }
    state = step.next_state;
    traj.steps.push_back(std::move(step));
  }
  for (auto& r : traj.empirical_avg) r /= static_cast<double>(steps);
  return traj;
}

PeriodEstimate detect_period(const Trajectory& trajectory) {
  using Node = std::pair<int, std::vector<int>>;
  std::map<Node, std::size_t> first_seen;
  const auto& steps = trajectory.steps;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    Node node{steps[t].state, steps[t].policies};
    const auto [it, inserted] = first_seen.emplace(std::move(node), t);
    if (inserted) continue;
    const std::size_t entry = it->second;
    const std::size_t k = t - entry;
    if (entry + 2 * k > steps.size()) return {};
    for (std::size_t j = entry + k; j < entry + 2 * k; ++j) {
      if (steps[j].state != steps[j - k].state || steps[j].policies != steps[j - k].policies) return {};
    }
    return {true, k, entry};
  }
  return {};
}

}  // namespace aeq
