#include "aeq/scenario_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace aeq {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ValidationError(path + ": " + message);
}

std::string type_name(const json& v) { return v.type_name(); }

const json& member(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path, "missing required field '" + key + "'");
  return *it;
}

std::string child(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string, got " + type_name(v));
  return v.get<std::string>();
}

const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array, got " + type_name(v));
  return v;
}

const json& as_object(const json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object, got " + type_name(v));
  return v;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number, got " + type_name(v));
  return v.get<double>();
}

json number_to_json(double x) {
  if (std::abs(x) < 9.0e15 && std::floor(x) == x) return static_cast<std::int64_t>(x);
  return x;
}

RealLiteral as_real(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), std::nullopt};
  if (!v.is_string()) fail(path, "expected a number or a \"p/q\" string, got " + type_name(v));
  const std::string text = v.get<std::string>();
  const auto slash = text.find('/');
  const auto parse = [&](std::string_view part) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size()) {
      fail(path, "expected a number or a \"p/q\" string, got \"" + text + "\"");
    }
    return out;
  };
  const std::string_view view(text);
  if (slash == std::string::npos) return {parse(view), text};
  const double den = parse(view.substr(slash + 1));
  if (den == 0.0) fail(path, "zero denominator in \"" + text + "\"");
  return {parse(view.substr(0, slash)) / den, text};
}

json real_to_json(const RealLiteral& r) {
  if (r.text) return *r.text;
  return number_to_json(r.value);
}

std::vector<RealLiteral> as_real_vector(const json& v, const std::string& path, std::size_t length) {
  as_array(v, path);
  if (v.size() != length) {
    fail(path, "expected " + std::to_string(length) + " entries (one per agent), got " +
                   std::to_string(v.size()));
  }
  std::vector<RealLiteral> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_real(v[i], index(path, i)));
  return out;
}

std::vector<std::vector<RealLiteral>> as_real_matrix(const json& v, const std::string& path,
                                                     std::size_t length) {
  as_array(v, path);
  std::vector<std::vector<RealLiteral>> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_real_vector(v[i], index(path, i), length));
  return out;
}

std::string reference_text(const std::vector<RealLiteral>& values) {
  std::string out = "(";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += values[i].text ? *values[i].text : format_real(values[i].value);
  }
  return out + ")";
}

ReferencePayoff to_reference(const std::vector<RealLiteral>& values) {
  ReferencePayoff out;
  for (const auto& v : values) out.value.push_back(v.value);
  out.text = reference_text(values);
  return out;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos == std::string_view::npos ? text.npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

// "(a,b)" in (own, other) order -> flat joint index.
int parse_joint_key(const ActiveMarkovGame& game, int agent, std::string_view key,
                    const std::string& path) {
  if (key.size() < 2 || key.front() != '(' || key.back() != ')') {
    fail(path, "joint action key must look like \"(own,other)\", got \"" + std::string(key) + "\"");
  }
  const auto labels = split(key.substr(1, key.size() - 2), ',');
  if (static_cast<int>(labels.size()) != game.num_agents()) {
    fail(path, "joint action key \"" + std::string(key) + "\" must name " +
                   std::to_string(game.num_agents()) + " actions");
  }
  std::vector<int> own_first;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const int owner = k == 0 ? agent : static_cast<int>(k <= static_cast<std::size_t>(agent) ? k - 1 : k);
    try {
      own_first.push_back(game.action_index(owner, labels[k]));
    } catch (const ValidationError& e) {
      fail(path, e.what());
    }
  }
  return game.joint_index(own_first_to_global(agent, own_first));
}

std::string joint_key(const ActiveMarkovGame& game, int agent, int joint) {
  const auto own_first = global_to_own_first(agent, game.joint_action(joint));
  std::string out = "(";
  for (std::size_t k = 0; k < own_first.size(); ++k) {
    if (k) out += ",";
    const int owner = k == 0 ? agent : static_cast<int>(k <= static_cast<std::size_t>(agent) ? k - 1 : k);
    out += game.action_labels(owner)[own_first[k]];
  }
  return out + ")";
}

int parse_policy(const ActiveMarkovGame& game, int agent, const std::string& label,
                 const std::string& path) {
  try {
    return policy_index(game, agent, policy_from_label(game, agent, label));
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
}

UpdateRule parse_rule(const ActiveMarkovGame& game, int agent, const RuleTable& table,
                      UpdateDomain identity_domain, const std::string& path) {
  if (!table) return identity_update_rule(game, agent, identity_domain);
  if (table->empty()) fail(path, "update rule table is empty");
  const bool full = table->begin()->first.find('|') != std::string::npos;
  UpdateRule rule;
  rule.domain = full ? UpdateDomain::kFull : UpdateDomain::kJointActionOnly;
  const auto keys = update_key_count(game, agent, rule.domain);
  rule.table.assign(keys, -1);
  for (const auto& [key, value] : *table) {
    const std::string key_path = path + "[\"" + key + "\"]";
    std::size_t slot = 0;
    if (full) {
      const auto parts = split(key, '|');
      if (parts.size() != 4) {
        fail(key_path, "full key must look like \"policy|state|(own,other)|next_state\"");
      }
      const int policy = parse_policy(game, agent, parts[0], key_path);
      int state = 0;
      int next = 0;
      try {
        state = game.state_index(parts[1]);
        next = game.state_index(parts[3]);
      } catch (const ValidationError& e) {
        fail(key_path, e.what());
      }
      const int joint = parse_joint_key(game, agent, parts[2], key_path);
      slot = full_key(game, agent, policy, state, joint, next);
    } else {
      if (key.find('|') != std::string::npos) fail(key_path, "mixes full and joint action keys");
      slot = static_cast<std::size_t>(parse_joint_key(game, agent, key, key_path));
    }
    if (rule.table[slot] != -1) fail(key_path, "duplicate key");
    rule.table[slot] = parse_policy(game, agent, value, key_path);
  }
  for (std::size_t k = 0; k < keys; ++k) {
    if (rule.table[k] != -1) continue;
    std::string missing;
    if (full) {
      const auto states = static_cast<std::size_t>(game.num_states());
      const auto joints = static_cast<std::size_t>(game.num_joint_actions());
      const int next = static_cast<int>(k % states);
      const int joint = static_cast<int>((k / states) % joints);
      const int state = static_cast<int>((k / states / joints) % states);
      const int policy = static_cast<int>(k / states / joints / states);
      missing = policy_label(game, agent, policy_from_index(game, agent, policy)) + "|" +
                game.state_label(state) + "|" + joint_key(game, agent, joint) + "|" +
                game.state_label(next);
    } else {
      missing = joint_key(game, agent, static_cast<int>(k));
    }
    fail(path, "update rule is missing key \"" + missing + "\"");
  }
  return rule;
}

}  // namespace

ScenarioFile scenario_from_json(const json& doc) {
  as_object(doc, "<root>");
  static const std::set<std::string> known{"name",   "description", "agents",        "actions",
                                           "structure", "hidden_phase", "stages", "update_domain",
                                           "candidate", "reference_values"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) fail(key, "unknown field");
  }
  ScenarioFile file;
  file.name = as_string(member(doc, "name", ""), "name");
  if (doc.contains("description")) file.description = as_string(doc["description"], "description");

  const auto& agents = member(doc, "agents", "");
  if (!agents.is_number_integer() || agents.get<int>() != 2) {
    fail("agents", "expected the integer 2 (scenario files describe two-agent games)");
  }
  file.agents = 2;

  const auto& actions = as_array(member(doc, "actions", ""), "actions");
  if (actions.size() != 2) fail("actions", "expected 2 label lists (one per agent), got " + std::to_string(actions.size()));
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const auto path = index("actions", i);
    as_array(actions[i], path);
    if (actions[i].empty()) fail(path, "expected a non-empty list of action labels");
    std::vector<std::string> labels;
    std::set<std::string> seen;
    for (std::size_t a = 0; a < actions[i].size(); ++a) {
      labels.push_back(as_string(actions[i][a], index(path, a)));
      if (labels.back().empty()) fail(index(path, a), "action label must not be empty");
      if (!seen.insert(labels.back()).second) fail(index(path, a), "duplicate action label '" + labels.back() + "'");
    }
    file.actions.push_back(std::move(labels));
  }

  const auto structure = as_string(member(doc, "structure", ""), "structure");
  if (structure == "repeated") {
    file.structure = ScenarioStructure::kRepeated;
  } else if (structure == "periodic") {
    file.structure = ScenarioStructure::kPeriodic;
  } else {
    fail("structure", "expected \"repeated\" or \"periodic\", got \"" + structure + "\"");
  }
  if (doc.contains("hidden_phase")) {
    if (file.structure != ScenarioStructure::kPeriodic) fail("hidden_phase", "only applies to periodic scenarios");
    if (!doc["hidden_phase"].is_boolean()) fail("hidden_phase", "expected a boolean, got " + type_name(doc["hidden_phase"]));
    file.hidden_phase = doc["hidden_phase"].get<bool>();
  }

  const auto& stages = as_array(member(doc, "stages", ""), "stages");
  if (stages.empty()) fail("stages", "expected at least one stage");
  if (file.structure == ScenarioStructure::kRepeated && stages.size() != 1) {
    fail("stages", "a repeated scenario has exactly one stage, got " + std::to_string(stages.size()));
  }
  const auto rows = file.actions[0].size();
  const auto cols = file.actions[1].size();
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const auto stage_path = index("stages", s);
    as_object(stages[s], stage_path);
    const auto payoff_path = child(stage_path, "payoffs");
    const auto& payoffs = as_array(member(stages[s], "payoffs", stage_path), payoff_path);
    if (payoffs.size() != rows) {
      fail(payoff_path, "expected " + std::to_string(rows) + " rows (one per action of agent 1), got " +
                            std::to_string(payoffs.size()));
    }
    ScenarioStage stage;
    for (std::size_t r = 0; r < rows; ++r) {
      const auto row_path = index(payoff_path, r);
      as_array(payoffs[r], row_path);
      if (payoffs[r].size() != cols) {
        fail(row_path, "expected " + std::to_string(cols) + " entries (one per action of agent 2), got " +
                           std::to_string(payoffs[r].size()));
      }
      std::vector<std::vector<double>> row;
      for (std::size_t c = 0; c < cols; ++c) {
        const auto cell_path = index(row_path, c);
        as_array(payoffs[r][c], cell_path);
        if (payoffs[r][c].size() != 2) {
          fail(cell_path, "expected [r1, r2], got " + std::to_string(payoffs[r][c].size()) + " entries");
        }
        row.push_back({as_number(payoffs[r][c][0], index(cell_path, 0)),
                       as_number(payoffs[r][c][1], index(cell_path, 1))});
      }
      stage.payoffs.push_back(std::move(row));
    }
    file.stages.push_back(std::move(stage));
  }

  if (doc.contains("update_domain")) {
    const auto text = as_string(doc["update_domain"], "update_domain");
    if (text != "joint_action" && text != "full") {
      fail("update_domain", "expected \"joint_action\" or \"full\", got \"" + text + "\"");
    }
    file.update_domain = parse_update_domain(text);
  }

  if (doc.contains("candidate")) {
    const auto& c = as_object(doc["candidate"], "candidate");
    ScenarioCandidate candidate;
    candidate.name = as_string(member(c, "name", "candidate"), "candidate.name");
    const auto& theta0 = as_array(member(c, "theta0", "candidate"), "candidate.theta0");
    if (theta0.size() != 2) fail("candidate.theta0", "expected 2 policy labels, got " + std::to_string(theta0.size()));
    for (std::size_t i = 0; i < theta0.size(); ++i) {
      candidate.theta0.push_back(as_string(theta0[i], index("candidate.theta0", i)));
    }
    const auto& rules = as_array(member(c, "update_rules", "candidate"), "candidate.update_rules");
    if (rules.size() != 2) fail("candidate.update_rules", "expected 2 rules, got " + std::to_string(rules.size()));
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const auto path = index("candidate.update_rules", i);
      if (rules[i].is_string()) {
        if (rules[i].get<std::string>() != "identity") {
          fail(path, "expected \"identity\" or a key -> policy object");
        }
        candidate.update_rules.emplace_back(std::nullopt);
        continue;
      }
      as_object(rules[i], path);
      std::map<std::string, std::string> table;
      for (const auto& [key, value] : rules[i].items()) {
        table[key] = as_string(value, path + "[\"" + key + "\"]");
      }
      candidate.update_rules.emplace_back(std::move(table));
    }
    for (const auto& [key, value] : c.items()) {
      if (key != "name" && key != "theta0" && key != "update_rules") fail(child("candidate", key), "unknown field");
    }
    file.candidate = std::move(candidate);
  }

  if (doc.contains("reference_values")) {
    const auto& r = as_object(doc["reference_values"], "reference_values");
    ScenarioReference ref;
    for (const auto& [key, value] : r.items()) {
      const auto path = child("reference_values", key);
      if (key == "pure_nash_payoffs") {
        ref.pure_nash_payoffs = as_real_matrix(value, path, 2);
      } else if (key == "mixed_nash_values") {
        ref.mixed_nash_values = as_real_matrix(value, path, 2);
      } else if (key == "active_payoff") {
        ref.active_payoff = as_real_vector(value, path, 2);
      } else {
        fail(path, "unknown field");
      }
    }
    file.reference_values = std::move(ref);
  }
  return file;
}

json scenario_to_json(const ScenarioFile& file) {
  json doc;
  doc["name"] = file.name;
  if (file.description) doc["description"] = *file.description;
  doc["agents"] = file.agents;
  doc["actions"] = file.actions;
  doc["structure"] = file.structure == ScenarioStructure::kPeriodic ? "periodic" : "repeated";
  if (file.hidden_phase) doc["hidden_phase"] = *file.hidden_phase;
  json stages = json::array();
  for (const auto& stage : file.stages) {
    json rows = json::array();
    for (const auto& row : stage.payoffs) {
      json cells = json::array();
      for (const auto& cell : row) cells.push_back({number_to_json(cell[0]), number_to_json(cell[1])});
      rows.push_back(std::move(cells));
    }
    stages.push_back({{"payoffs", std::move(rows)}});
  }
  doc["stages"] = std::move(stages);
  if (file.update_domain) doc["update_domain"] = std::string(to_string(*file.update_domain));
  if (file.candidate) {
    json rules = json::array();
    for (const auto& rule : file.candidate->update_rules) {
      if (!rule) {
        rules.push_back("identity");
      } else {
        rules.push_back(*rule);
      }
    }
    doc["candidate"] = {{"name", file.candidate->name},
                        {"theta0", file.candidate->theta0},
                        {"update_rules", std::move(rules)}};
  }
  if (file.reference_values) {
    const auto matrix = [](const std::vector<std::vector<RealLiteral>>& m) {
      json out = json::array();
      for (const auto& row : m) {
        json r = json::array();
        for (const auto& v : row) r.push_back(real_to_json(v));
        out.push_back(std::move(r));
      }
      return out;
    };
    json ref = json::object();
    const auto& r = *file.reference_values;
    if (!r.pure_nash_payoffs.empty()) ref["pure_nash_payoffs"] = matrix(r.pure_nash_payoffs);
    if (!r.mixed_nash_values.empty()) ref["mixed_nash_values"] = matrix(r.mixed_nash_values);
    if (r.active_payoff) ref["active_payoff"] = matrix({*r.active_payoff})[0];
    doc["reference_values"] = std::move(ref);
  }
  return doc;
}

ScenarioFile parse_scenario_file(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
  }
  return scenario_from_json(doc);
}

std::string serialize_scenario(const ScenarioFile& file) {
  return scenario_to_json(file).dump(2) + "\n";
}

std::vector<StageGame> scenario_stages(const ScenarioFile& file) {
  std::vector<StageGame> out;
  for (const auto& s : file.stages) {
    StageGame stage;
    stage.num_agents = file.agents;
    stage.action_labels = file.actions;
    for (std::size_t r = 0; r < s.payoffs.size(); ++r) {
      for (std::size_t c = 0; c < s.payoffs[r].size(); ++c) {
        stage.payoff[{static_cast<int>(r), static_cast<int>(c)}] = s.payoffs[r][c];
      }
    }
    out.push_back(std::move(stage));
  }
  return out;
}

StrategyProfile profile_from_candidate(const ActiveMarkovGame& game, const ScenarioCandidate& candidate,
                                       UpdateDomain identity_domain) {
  if (static_cast<int>(candidate.theta0.size()) != game.num_agents() ||
      static_cast<int>(candidate.update_rules.size()) != game.num_agents()) {
    fail("candidate", "expected one theta0 entry and one update rule per agent");
  }
  StrategyProfile profile;
  for (int i = 0; i < game.num_agents(); ++i) {
    AgentStrategy s;
    s.initial = policy_from_index(
        game, i, parse_policy(game, i, candidate.theta0[i], index("candidate.theta0", i)));
    s.rule = parse_rule(game, i, candidate.update_rules[i], identity_domain,
                        index("candidate.update_rules", i));
    profile.agents.push_back(std::move(s));
  }
  return profile;
}

ScenarioCandidate candidate_from_profile(const ActiveMarkovGame& game, const NamedProfile& named) {
  validate_profile(game, named.profile);
  ScenarioCandidate out;
  out.name = named.name;
  for (int i = 0; i < game.num_agents(); ++i) {
    const auto& s = named.profile.agents[i];
    out.theta0.push_back(policy_label(game, i, s.initial));
    if (is_identity_rule(game, i, s.rule)) {
      out.update_rules.emplace_back(std::nullopt);
      continue;
    }
    const auto label_of = [&](int p) { return policy_label(game, i, policy_from_index(game, i, p)); };
    std::map<std::string, std::string> table;
    if (s.rule.domain == UpdateDomain::kJointActionOnly) {
      for (int j = 0; j < game.num_joint_actions(); ++j) table[joint_key(game, i, j)] = label_of(s.rule.table[j]);
    } else {
      const int policies = static_cast<int>(policy_count(game, i));
      for (int p = 0; p < policies; ++p) {
        for (int st = 0; st < game.num_states(); ++st) {
          for (int j = 0; j < game.num_joint_actions(); ++j) {
            for (int s2 = 0; s2 < game.num_states(); ++s2) {
              table[label_of(p) + "|" + game.state_label(st) + "|" + joint_key(game, i, j) + "|" +
                    game.state_label(s2)] = label_of(s.rule.table[full_key(game, i, p, st, j, s2)]);
            }
          }
        }
      }
    }
    out.update_rules.emplace_back(std::move(table));
  }
  return out;
}

LoadedScenario load_scenario(ScenarioFile file) {
  const auto stages = scenario_stages(file);
  ActiveMarkovGame game = file.structure == ScenarioStructure::kRepeated
                              ? build_repeated_game(stages.at(0))
                              : build_periodic_game(stages, file.hidden_phase.value_or(true));
  ScenarioOptions options;
  options.update_domain = file.update_domain.value_or(UpdateDomain::kJointActionOnly);
  std::optional<NamedProfile> candidate;
  if (file.candidate) {
    candidate = NamedProfile{file.candidate->name,
                             profile_from_candidate(game, *file.candidate, options.update_domain)};
  }
  ReferenceValues reference;
  if (file.reference_values) {
    for (const auto& v : file.reference_values->pure_nash_payoffs) reference.pure_nash_payoffs.push_back(to_reference(v));
    for (const auto& v : file.reference_values->mixed_nash_values) reference.mixed_nash_values.push_back(to_reference(v));
    if (file.reference_values->active_payoff) reference.active_payoff = to_reference(*file.reference_values->active_payoff);
  }
  return LoadedScenario{std::move(file), std::move(game), std::move(candidate), options, std::move(reference)};
}

LoadedScenario parse_scenario(std::string_view text) { return load_scenario(parse_scenario_file(text)); }

LoadedScenario read_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

}  // namespace aeq
