#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "aeq/common.hpp"
#include "aeq/game_model.hpp"

namespace aeq {

struct TrajectoryStep {
  int state = 0;
  std::vector<int> policies;  // policy_index per agent before acting
  JointAction joint_action;
  RewardVector reward;
  int next_state = 0;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  RewardVector empirical_avg;
};

// Plays `steps` timesteps: act by policy, transition, collect reward, then
// every agent updates its parameter. Dynamics are deterministic, so `seed`
// must stay empty; passing one throws.
Trajectory rollout(const ActiveMarkovGame& game, const StrategyProfile& profile, std::size_t steps,
                   std::optional<std::uint64_t> seed = std::nullopt);
Trajectory rollout_from(const ActiveMarkovGame& game, const StrategyProfile& profile,
                        int initial_state, std::size_t steps);

struct PeriodEstimate {
  bool determined = false;
  std::size_t k = 0;
  std::size_t entry_length = 0;
};

// First repeat of the full (state, joint policy) node. Undetermined unless
// the cycle was traversed twice within the trajectory.
PeriodEstimate detect_period(const Trajectory& trajectory);

}  // namespace aeq
