#pragma once

#include <vector>

#include "aeq/chain_engine.hpp"
#include "aeq/common.hpp"
#include "aeq/game_model.hpp"

namespace aeq {

// Pure stationary Nash equilibria: joint policies with identity updates from
// which no agent gains more than epsilon by switching its own policy, from
// any initial state.
struct PureNashResult {
  std::vector<JointParameters> profiles;
  std::vector<AverageReward> payoffs;  // from the game's initial state
};

PureNashResult pure_stationary_nash(const ActiveMarkovGame& game, double epsilon = kEpsilon);

struct StationaryDeviation {
  PolicyParameter parameter;
  double gain = 0.0;
  int state = 0;  // initial state at which the gain is attained
};

struct StationaryNashVerdict {
  bool verdict = false;
  std::vector<StationaryDeviation> best_deviation;  // one per agent
};

StationaryNashVerdict verify_stationary_nash(const ActiveMarkovGame& game,
                                             const JointParameters& params,
                                             double epsilon = kEpsilon);

struct StationaryBestResponse {
  PolicyParameter parameter;
  double rho = 0.0;
};

// `params[agent]` is ignored; the other entries fix the opponents.
StationaryBestResponse stationary_best_response(const ActiveMarkovGame& game, int agent,
                                                const JointParameters& params,
                                                double epsilon = kEpsilon);
StationaryBestResponse stationary_best_response(const ActiveMarkovGame& game, int agent,
                                                const JointParameters& params, int initial_state,
                                                double epsilon = kEpsilon);

// Mixed equilibrium of a two-player stage game.
struct MixedEquilibrium {
  std::vector<std::vector<double>> strategy;  // per agent, over actions
  std::vector<double> value;                  // per agent expected payoff
};

// Support enumeration over every pair of non-empty supports. Each pair whose
// indifference systems have a unique solution is kept if the solution lies on
// the simplex and no unsupported action does better. Pure equilibria appear
// as singleton supports. Results are deduplicated (1e-7 on probabilities) and
// ordered by support encoding.
std::vector<MixedEquilibrium> mixed_nash_support_enumeration(const StageGame& stage);

inline constexpr int kMaxSupportEnumerationActions = 4;
inline constexpr double kMixedDedupTolerance = 1e-7;

}  // namespace aeq
