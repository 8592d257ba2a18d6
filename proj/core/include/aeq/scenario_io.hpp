#pragma once

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aeq/active_solver.hpp"
#include "aeq/game_model.hpp"

namespace aeq {

enum class ScenarioStructure { kRepeated, kPeriodic };

// Real written either as a JSON number or as a "p/q" string.
struct RealLiteral {
  double value = 0.0;
  std::optional<std::string> text;
  bool operator==(const RealLiteral&) const = default;
};

struct ScenarioStage {
  // payoffs[agent-1 action][agent-2 action] = [r1, r2]
  std::vector<std::vector<std::vector<double>>> payoffs;
  bool operator==(const ScenarioStage&) const = default;
};

// Update rule as written: nullopt for "identity", otherwise key -> policy
// label. Joint-action keys read "(own,other)"; full keys read
// "policy|state|(own,other)|next_state".
using RuleTable = std::optional<std::map<std::string, std::string>>;

struct ScenarioCandidate {
  std::string name;
  std::vector<std::string> theta0;  // policy label per agent
  std::vector<RuleTable> update_rules;
  bool operator==(const ScenarioCandidate&) const = default;
};

struct ScenarioReference {
  std::vector<std::vector<RealLiteral>> pure_nash_payoffs;
  std::vector<std::vector<RealLiteral>> mixed_nash_values;
  std::optional<std::vector<RealLiteral>> active_payoff;
  bool operator==(const ScenarioReference&) const = default;
};

// Document model of a scenario file. Optional members are emitted only when
// present so that serialization reproduces the file.
struct ScenarioFile {
  std::string name;
  std::optional<std::string> description;
  int agents = 2;
  std::vector<std::vector<std::string>> actions;
  ScenarioStructure structure = ScenarioStructure::kRepeated;
  std::optional<bool> hidden_phase;
  std::vector<ScenarioStage> stages;
  std::optional<UpdateDomain> update_domain;
  std::optional<ScenarioCandidate> candidate;
  std::optional<ScenarioReference> reference_values;
  bool operator==(const ScenarioFile&) const = default;
};

struct ScenarioOptions {
  UpdateDomain update_domain = UpdateDomain::kJointActionOnly;
};

struct LoadedScenario {
  ScenarioFile file;
  ActiveMarkovGame game;
  std::optional<NamedProfile> candidate;
  ScenarioOptions options;
  ReferenceValues reference;
};

// Structural parse. Errors name the JSON path and the expected shape.
ScenarioFile scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const ScenarioFile& file);

ScenarioFile parse_scenario_file(std::string_view text);
// Canonical text: sorted keys, two-space indent, trailing newline.
std::string serialize_scenario(const ScenarioFile& file);

// Builds the game and candidate profile; (own, other) keys are normalized to
// agent-index order.
LoadedScenario load_scenario(ScenarioFile file);
LoadedScenario parse_scenario(std::string_view text);
LoadedScenario read_scenario(const std::filesystem::path& path);

std::vector<StageGame> scenario_stages(const ScenarioFile& file);
// Inverse of the candidate half of load_scenario.
ScenarioCandidate candidate_from_profile(const ActiveMarkovGame& game, const NamedProfile& profile);
// "identity" entries become identity rules over `identity_domain`.
StrategyProfile profile_from_candidate(const ActiveMarkovGame& game, const ScenarioCandidate& candidate,
                                       UpdateDomain identity_domain = UpdateDomain::kJointActionOnly);

}  // namespace aeq
