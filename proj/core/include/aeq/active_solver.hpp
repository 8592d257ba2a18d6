#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "aeq/chain_engine.hpp"
#include "aeq/common.hpp"
#include "aeq/game_model.hpp"
#include "aeq/nash_solver.hpp"

namespace aeq {

// Best replacement of one agent's (initial parameter, update rule) with the
// other agents fixed. The equilibrium condition quantifies over every
// initial state, so the result describes the initial state with the largest
// gain (ties resolved towards the game's initial state, then lower index).
struct DeviationResult {
  int agent = 0;
  int state = 0;
  double best_value = 0.0;
  double baseline_value = 0.0;
  double gain = 0.0;
  std::vector<AgentStrategy> best_strategies;   // all maximizers, space order
  std::vector<std::size_t> best_indices;        // their indices in the space
  std::size_t candidates = 0;
};

DeviationResult best_active_deviation(const ActiveMarkovGame& game, const StrategyProfile& profile,
                                      int agent, const StrategySpace& space,
                                      double epsilon = kEpsilon);

struct ActiveVerification {
  bool verdict = false;
  bool in_space = false;  // every agent's own strategy is a member of its space
  std::vector<DeviationResult> deviations;
  AverageReward payoff;   // from the game's initial state
  std::size_t period = 0;
  std::size_t entry_length = 0;
};

ActiveVerification verify_active_equilibrium(const ActiveMarkovGame& game,
                                             const StrategyProfile& profile,
                                             const StrategySpace& spaces,
                                             double epsilon = kEpsilon);

inline constexpr std::size_t kDefaultProfileCap = std::size_t{1} << 20;

struct EnumerationOptions {
  std::size_t profile_cap = kDefaultProfileCap;
  double epsilon = kEpsilon;
};

struct ActiveEquilibrium {
  StrategyProfile profile;
  std::vector<std::size_t> strategy_index;  // per agent, into its space
  AverageReward payoff;                     // from the game's initial state
  std::size_t period = 0;
  std::vector<double> gains;                // per agent, worst over initial states
};

// Product size of the spaces; throws EnumerationCapError above `cap`.
std::size_t joint_profile_count(const StrategySpace& spaces, std::size_t cap);

// Every joint profile of the product space that is an active equilibrium
// within that space. Sorted by payoff sum (descending), then by strategy
// indices. Output does not depend on AE_NUM_THREADS.
std::vector<ActiveEquilibrium> enumerate_active_equilibria(const ActiveMarkovGame& game,
                                                           const StrategySpace& spaces,
                                                           const EnumerationOptions& options = {});

struct NamedProfile {
  std::string name;
  StrategyProfile profile;
};

struct ReferencePayoff {
  RewardVector value;
  std::string text;  // as written in the scenario file
};

// Values quoted alongside a scenario; the report notes where the computed
// values disagree with them.
struct ReferenceValues {
  std::vector<ReferencePayoff> pure_nash_payoffs;
  std::vector<ReferencePayoff> mixed_nash_values;
  std::optional<ReferencePayoff> active_payoff;
};

struct PureNashEntry {
  std::string profile;
  JointParameters parameters;
  RewardVector payoff;
};

struct MixedNashEntry {
  std::string stage;
  MixedEquilibrium equilibrium;
  bool pure = false;  // every strategy is a point mass
};

struct ActiveEntry {
  std::string profile;
  std::string description;
  StrategyProfile strategies;
  RewardVector payoff;
  std::size_t period = 0;
  bool verified = false;
  std::vector<double> deviation_gains;
};

struct ParetoFlag {
  std::string profile;
  bool dominates_all_pure_nash = false;
  bool dominates_all_mixed_nash = false;
  double fairness_gap = 0.0;  // max minus min payoff across agents
};

struct EquilibriumReport {
  std::string scenario;
  std::vector<PureNashEntry> pure_nash;
  std::vector<MixedNashEntry> mixed_nash;
  std::vector<ActiveEntry> active;
  UpdateDomain update_domain = UpdateDomain::kJointActionOnly;
  std::vector<std::size_t> space_sizes;
  std::vector<ParetoFlag> pareto;
  std::vector<std::string> notes;
};

struct ReportInputs {
  std::string scenario;
  std::optional<NamedProfile> candidate;
  ReferenceValues reference;
  UpdateDomain update_domain = UpdateDomain::kJointActionOnly;
  EnumerationOptions enumeration;
};

// Nash section only: pure stationary equilibria and, for two-player games,
// mixed equilibria of every distinct stage.
void fill_nash_section(const ActiveMarkovGame& game, double epsilon, EquilibriumReport& report);

// Pareto flags for every active entry against the Nash section.
std::vector<ParetoFlag> pareto_flags(const EquilibriumReport& report, double epsilon = kEpsilon);

// Notes for every reference value that the computed report does not match.
std::vector<std::string> discrepancy_notes(const EquilibriumReport& report,
                                           const ReferenceValues& reference,
                                           double epsilon = kEpsilon);

// Report rows: the candidate under its own name; enumerated profiles as
// "stationary(<labels>)" when every rule is an identity, else "strategies(<indices>)".
ActiveEntry candidate_entry(const ActiveMarkovGame& game, const NamedProfile& candidate,
                            const ActiveVerification& verification);
ActiveEntry enumerated_entry(const ActiveMarkovGame& game, const ActiveEquilibrium& eq);

EquilibriumReport compare_report(const ActiveMarkovGame& game, const StrategySpace& spaces,
                                 const ReportInputs& inputs);

// Human-readable strategy text in (own, other) key order.
std::string describe_strategy(const ActiveMarkovGame& game, int agent, const AgentStrategy& s);
std::string describe_profile(const ActiveMarkovGame& game, const StrategyProfile& profile);
std::string joint_label(const ActiveMarkovGame& game, const JointParameters& params);

}  // namespace aeq
