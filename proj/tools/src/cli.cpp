#include "aeq/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>

#include "aeq/active_solver.hpp"
#include "aeq/chain_engine.hpp"
#include "aeq/report.hpp"
#include "aeq/scenario_io.hpp"
#include "aeq/simulator.hpp"

namespace aeq {
namespace {

using nlohmann::json;

struct GlobalOptions {
  std::string json_path;
  double epsilon = kEpsilon;
  std::string update_domain;
  std::string file;
  std::optional<std::size_t> cap;
  std::size_t max_rows = 50;
  std::size_t steps = 0;
  std::optional<std::uint64_t> seed;
};

struct Context {
  LoadedScenario scenario;
  UpdateDomain domain = UpdateDomain::kJointActionOnly;
  double epsilon = kEpsilon;

  const ActiveMarkovGame& game() const { return scenario.game; }
  const std::string& name() const { return scenario.file.name; }
};

struct Outcome {
  EquilibriumReport report;
  json details = json::object();
  std::string text;
  int code = kExitOk;
};

Context load(const GlobalOptions& options) {
  Context ctx{read_scenario(options.file)};
  ctx.domain = options.update_domain.empty() ? ctx.scenario.options.update_domain
                                             : parse_update_domain(options.update_domain);
  ctx.epsilon = options.epsilon;
  return ctx;
}

// Candidate expressed over the active update domain.
NamedProfile candidate(const Context& ctx) {
  const auto& file = ctx.scenario.file;
  if (!file.candidate) throw ValidationError("scenario " + file.name + " has no candidate profile");
  NamedProfile named{file.candidate->name, profile_from_candidate(ctx.game(), *file.candidate, ctx.domain)};
  if (ctx.domain == UpdateDomain::kFull) {
    for (int i = 0; i < ctx.game().num_agents(); ++i) {
      named.profile.agents[i].rule = lift_to_full(ctx.game(), i, named.profile.agents[i].rule);
    }
  }
  return named;
}

std::optional<std::vector<std::size_t>> index_in(const Context& ctx, const StrategySpace& spaces,
                                                 const StrategyProfile& profile) {
  std::vector<std::size_t> out;
  for (int i = 0; i < ctx.game().num_agents(); ++i) {
    const auto idx = spaces[i].find(ctx.game(), i, profile.agents[i]);
    if (idx < 0) return std::nullopt;
    out.push_back(static_cast<std::size_t>(idx));
  }
  return out;
}

EquilibriumReport base_report(const Context& ctx) {
  EquilibriumReport report;
  report.scenario = ctx.name();
  report.update_domain = ctx.domain;
  return report;
}

ReferenceValues nash_reference(const Context& ctx) {
  auto ref = ctx.scenario.reference;
  ref.active_payoff.reset();
  return ref;
}

std::string space_note(const Context& ctx, const StrategySpace& spaces) {
  std::string sizes;
  for (std::size_t i = 0; i < spaces.size(); ++i) sizes += (i ? ", " : "") + std::to_string(spaces[i].size());
  return "active verdict holds within the enumerated " + std::string(to_string(ctx.domain)) +
         " strategy space (strategies per agent: " + sizes + ")";
}

std::string notes_text(const std::vector<std::string>& notes) {
  std::string out;
  for (const auto& n : notes) out += "note: " + n + "\n";
  return out;
}

json sizes_json(const StrategySpace& spaces) {
  json out = json::array();
  for (const auto& s : spaces) out.push_back(s.size());
  return out;
}

Outcome run_nash(const Context& ctx) {
  Outcome o;
  o.report = base_report(ctx);
  fill_nash_section(ctx.game(), ctx.epsilon, o.report);
  o.report.notes = discrepancy_notes(o.report, nash_reference(ctx), ctx.epsilon);
  o.details = {{"states", ctx.game().num_states()}};
  o.text = "Scenario: " + ctx.name() + "\n" + render_nash_text(o.report) + notes_text(o.report.notes);
  return o;
}

Outcome run_verify(const Context& ctx) {
  const auto named = candidate(ctx);
  const auto spaces = make_strategy_space(ctx.game(), ctx.domain);
  const auto v = verify_active_equilibrium(ctx.game(), named.profile, spaces, ctx.epsilon);

  Outcome o;
  o.report = base_report(ctx);
  for (const auto& s : spaces) o.report.space_sizes.push_back(s.size());
  fill_nash_section(ctx.game(), ctx.epsilon, o.report);
  o.report.active.push_back(candidate_entry(ctx.game(), named, v));
  o.report.pareto = pareto_flags(o.report, ctx.epsilon);
  o.report.notes.push_back(space_note(ctx, spaces));
  if (!v.in_space) o.report.notes.push_back("candidate " + named.name + " lies outside the enumerated space");

  std::ostringstream text;
  text << "Scenario: " << ctx.name() << ", candidate " << named.name << "\n"
       << "active equilibrium within enumerated space: " << (v.verdict ? "true" : "false")
       << ", payoffs " << format_vector(v.payoff.rho) << "\n"
       << "period k=" << v.period << ", entry length " << v.entry_length << "\n";
  json deviations = json::array();
  for (const auto& d : v.deviations) {
    text << "agent" << d.agent + 1 << ": best deviation value " << format_real(d.best_value) << ", baseline "
         << format_real(d.baseline_value) << ", deviation gain " << format_real(d.gain)
         << " from initial state " << ctx.game().state_label(d.state) << " (" << d.candidates
         << " candidates)\n";
    json best = json::array();
    for (const auto& s : d.best_strategies) best.push_back(describe_strategy(ctx.game(), d.agent, s));
    if (d.gain > ctx.epsilon && !d.best_strategies.empty()) {
      text << "  profitable deviation: " << best.front().get<std::string>() << "\n";
    }
    deviations.push_back({{"agent", d.agent + 1},
                          {"state", ctx.game().state_label(d.state)},
                          {"best_value", round_report_real(d.best_value)},
                          {"baseline_value", round_report_real(d.baseline_value)},
                          {"gain", round_report_real(d.gain)},
                          {"candidates", d.candidates},
                          {"best_strategies", std::move(best)}});
  }
  text << notes_text(o.report.notes);
  o.details = {{"candidate", named.name},
               {"verdict", v.verdict},
               {"in_space", v.in_space},
               {"period", v.period},
               {"entry_length", v.entry_length},
               {"deviations", std::move(deviations)}};
  o.text = text.str();
  o.code = v.verdict ? kExitOk : kExitNotEquilibrium;
  return o;
}

Outcome run_enumerate(const Context& ctx, const GlobalOptions& options) {
  const auto spaces = make_strategy_space(ctx.game(), ctx.domain);
  EnumerationOptions enumeration{options.cap.value_or(kDefaultProfileCap), ctx.epsilon};
  const auto total = joint_profile_count(spaces, enumeration.profile_cap);
  const auto equilibria = enumerate_active_equilibria(ctx.game(), spaces, enumeration);

  std::optional<NamedProfile> named;
  std::optional<std::vector<std::size_t>> named_index;
  if (ctx.scenario.file.candidate) {
    named = candidate(ctx);
    named_index = index_in(ctx, spaces, named->profile);
  }

  Outcome o;
  o.report = base_report(ctx);
  for (const auto& s : spaces) o.report.space_sizes.push_back(s.size());
  fill_nash_section(ctx.game(), ctx.epsilon, o.report);
  for (const auto& eq : equilibria) {
    auto entry = enumerated_entry(ctx.game(), eq);
    if (named_index && eq.strategy_index == *named_index) entry.profile = named->name;
    o.report.active.push_back(std::move(entry));
  }
  o.report.pareto = pareto_flags(o.report, ctx.epsilon);
  o.report.notes.push_back(space_note(ctx, spaces));

  std::ostringstream text;
  text << "Scenario: " << ctx.name() << "\nchecked " << total << " joint profiles (deviations per agent:";
  for (std::size_t i = 0; i < spaces.size(); ++i) text << (i ? ", " : " ") << spaces[i].size();
  text << "); " << equilibria.size() << " active equilibria\n"
       << render_active_text(o.report, options.max_rows) << notes_text(o.report.notes);
  o.details = {{"profiles_checked", total},
               {"deviations_per_agent", sizes_json(spaces)},
               {"equilibria", equilibria.size()}};
  o.text = text.str();
  return o;
}

Outcome run_simulate(const Context& ctx, const GlobalOptions& options) {
  const auto named = candidate(ctx);
  const auto trajectory = rollout(ctx.game(), named.profile, options.steps, options.seed);
  const auto estimate = detect_period(trajectory);
  const auto stats = ChainEvaluator(ctx.game()).evaluate(named.profile, ctx.game().initial_state());
  const double bound = (ctx.game().max_payoff() - ctx.game().min_payoff()) *
                       static_cast<double>(stats.entry_length + stats.period) /
                       static_cast<double>(options.steps);
  double worst = 0.0;
  for (std::size_t i = 0; i < stats.rho.size(); ++i) {
    worst = std::max(worst, std::abs(trajectory.empirical_avg[i] - stats.rho[i]));
  }

  Outcome o;
  o.report = base_report(ctx);
  std::ostringstream text;
  text << "Scenario: " << ctx.name() << ", candidate " << named.name << "\n"
       << "simulated " << options.steps << " steps: empirical average " << format_vector(trajectory.empirical_avg)
       << ", limit average " << format_vector(stats.rho) << "\n";
  if (estimate.determined) {
    text << "period k=" << estimate.k << ", entry length " << estimate.entry_length << "\n";
  } else {
    text << "period undetermined: the cycle was not traversed twice within " << options.steps << " steps\n";
  }
  text << "deviation from the limit " << format_real(worst) << " (bound " << format_real(bound) << ")\n";
  o.details = {{"candidate", named.name},
               {"steps", options.steps},
               {"empirical_avg", json::array()},
               {"limit_avg", json::array()},
               {"period_determined", estimate.determined},
               {"period", estimate.determined ? json(estimate.k) : json(nullptr)},
               {"entry_length", estimate.determined ? json(estimate.entry_length) : json(nullptr)},
               {"bound", round_report_real(bound)},
               {"within_bound", worst <= bound + ctx.epsilon}};
  for (double v : trajectory.empirical_avg) o.details["empirical_avg"].push_back(round_report_real(v));
  for (double v : stats.rho) o.details["limit_avg"].push_back(round_report_real(v));
  o.text = text.str();
  return o;
}

Outcome run_balance(const Context& ctx) {
  const auto named = candidate(ctx);
  const auto dist = periodic_distribution(ctx.game(), named.profile);
  const double residual = verify_balance(ctx.game(), named.profile, dist);
  const auto chain = induce_chain(ctx.game(), named.profile);
  const auto weighted = phase_weighted_reward(ctx.game(), named.profile, dist);

  Outcome o;
  o.report = base_report(ctx);
  std::ostringstream text;
  text << "Scenario: " << ctx.name() << ", candidate " << named.name << "\n"
       << "periodic distribution: k=" << dist.k << ", entry length " << dist.entry_length
       << ", balance residual " << format_real(residual) << "\n"
       << "phase-weighted reward " << format_vector(weighted) << "\n";
  json phases = json::array();
  for (std::size_t l = 0; l < dist.k; ++l) {
    const auto& mass = dist.phase_mass[l];
    const auto node = static_cast<std::size_t>(std::max_element(mass.begin(), mass.end()) - mass.begin());
    const auto& n = chain.nodes[node];
    JointParameters params;
    for (int i = 0; i < ctx.game().num_agents(); ++i) params.push_back(policy_from_index(ctx.game(), i, n.policies[i]));
    const auto label = joint_label(ctx.game(), params);
    text << "  phase " << l << ": state " << ctx.game().state_label(n.state) << ", policies " << label << "\n";
    phases.push_back({{"phase", l}, {"state", ctx.game().state_label(n.state)}, {"policies", label}});
  }
  o.details = {{"candidate", named.name},
               {"k", dist.k},
               {"entry_length", dist.entry_length},
               {"residual", round_report_real(residual)},
               {"minimal_period", has_minimal_period(dist)},
               {"phase_weighted_reward", json::array()},
               {"phases", std::move(phases)}};
  for (double v : weighted) o.details["phase_weighted_reward"].push_back(round_report_real(v));
  o.text = text.str();
  return o;
}

Outcome run_compare(const Context& ctx, const GlobalOptions& options) {
  const auto spaces = make_strategy_space(ctx.game(), ctx.domain);
  ReportInputs inputs;
  inputs.scenario = ctx.name();
  if (ctx.scenario.file.candidate) inputs.candidate = candidate(ctx);
  inputs.reference = ctx.scenario.reference;
  inputs.update_domain = ctx.domain;
  inputs.enumeration = {options.cap.value_or(kDefaultProfileCap), ctx.epsilon};
  Outcome o;
  o.report = compare_report(ctx.game(), spaces, inputs);
  o.details = {{"deviations_per_agent", sizes_json(spaces)}};
  o.text = render_report_text(o.report, options.max_rows);
  return o;
}

void write_json(const std::string& path, const json& doc) {
  std::ofstream file(path);
  if (!file) throw ValidationError("cannot write report to " + path);
  file << doc.dump(2) << "\n";
  if (!file) throw ValidationError("cannot write report to " + path);
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  GlobalOptions options;
  CLI::App app{"Solver and verifier for active Markov games", "aeq"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--json", options.json_path, "Write the machine-readable report to this path");
  app.add_option("--epsilon", options.epsilon, "Equilibrium comparison tolerance")
      ->check(CLI::NonNegativeNumber)
      ->default_str("1e-9");
  app.add_option("--update-domain", options.update_domain, "Override the scenario's update-rule key domain")
      ->check(CLI::IsMember({"joint_action", "full"}));

  auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("file", options.file, "Scenario JSON file")->required();
    return sub;
  };
  add("nash", "Pure stationary and mixed stage-game Nash equilibria");
  add("verify", "Verify the scenario's candidate as an active equilibrium");
  auto* enumerate = add("enumerate", "Enumerate every active equilibrium of the strategy space");
  auto* simulate = add("simulate", "Roll out the candidate and detect its period");
  add("balance", "Periodic distribution of the candidate and its balance residual");
  auto* compare = add("compare", "Nash versus active comparison report");
  for (auto* sub : {enumerate, compare}) {
    sub->add_option("--cap", options.cap, "Maximum number of joint profiles")->check(CLI::PositiveNumber);
    sub->add_option("--max-rows", options.max_rows, "Rows of the active table printed as text (0 = none)");
  }
  simulate->add_option("--steps", options.steps, "Number of transitions")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", options.seed, "Reserved; rollouts are deterministic");

  std::vector<const char*> argv{"aeq"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitError;
  }

  try {
    const auto ctx = load(options);
    const std::string command = app.get_subcommands().front()->get_name();
    Outcome outcome;
    if (command == "nash") {
      outcome = run_nash(ctx);
    } else if (command == "verify") {
      outcome = run_verify(ctx);
    } else if (command == "enumerate") {
      outcome = run_enumerate(ctx, options);
    } else if (command == "simulate") {
      outcome = run_simulate(ctx, options);
    } else if (command == "balance") {
      outcome = run_balance(ctx);
    } else {
      outcome = run_compare(ctx, options);
    }
    if (!options.json_path.empty()) {
      write_json(options.json_path, report_to_json(outcome.report, command, outcome.details));
    }
    out << outcome.text;
    return outcome.code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace aeq
