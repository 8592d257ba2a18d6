#include "aeq/active_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "aeq/parallel.hpp"

namespace aeq {
namespace {

std::vector<int> states_initial_first(const ActiveMarkovGame& game) {
  std::vector<int> states{game.initial_state()};
  for (int s = 0; s < game.num_states(); ++s) {
    if (s != game.initial_state()) states.push_back(s);
  }
  return states;
}

// Strategy tables flattened for the evaluator.
struct CompiledSpace {
  std::vector<int> initial;                 // per strategy, policy index
  std::vector<const UpdateRule*> rule;      // per strategy
};

CompiledSpace compile_space(const ActiveMarkovGame& game, int agent, const AgentSpace& space) {
  CompiledSpace out;
  std::vector<int> policy_of;
  for (const auto& p : space.parameters) policy_of.push_back(policy_index(game, agent, p));
  for (const auto& r : space.rules) validate_rule(game, agent, r);
  for (std::size_t p = 0; p < space.parameters.size(); ++p) {
    for (std::size_t r = 0; r < space.rules.size(); ++r) {
      out.initial.push_back(policy_of[p]);
      out.rule.push_back(&space.rules[r]);
    }
  }
  return out;
}

bool weakly_dominates(const RewardVector& u, const RewardVector& v, double epsilon) {
  bool strict = false;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] < v[i] - epsilon) return false;
    if (u[i] > v[i] + epsilon) strict = true;
  }
  return strict;
}

bool close(const RewardVector& a, const RewardVector& b, double epsilon) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > epsilon) return false;
  }
  return true;
}

std::string key_label(const ActiveMarkovGame& game, int agent, int joint) {
  const auto own_first = global_to_own_first(agent, game.joint_action(joint));
  std::string out = "(";
  for (std::size_t k = 0; k < own_first.size(); ++k) {
    if (k) out += ",";
    const int owner = k == 0 ? agent : static_cast<int>(k <= static_cast<std::size_t>(agent) ? k - 1 : k);
    out += game.action_labels(owner)[own_first[k]];
  }
  return out + ")";
}

// Joint indices ordered lexicographically by their (own, other) key.
std::vector<int> joints_in_own_first_order(const ActiveMarkovGame& game, int agent) {
  std::vector<int> joints(game.num_joint_actions());
  std::iota(joints.begin(), joints.end(), 0);
  std::sort(joints.begin(), joints.end(), [&](int a, int b) {
    return global_to_own_first(agent, game.joint_action(a)) <
           global_to_own_first(agent, game.joint_action(b));
  });
  return joints;
}

}  // namespace

DeviationResult best_active_deviation(const ActiveMarkovGame& game, const StrategyProfile& profile,
                                      int agent, const StrategySpace& space, double epsilon) {
  validate_profile(game, profile);
  if (agent < 0 || agent >= game.num_agents() || static_cast<int>(space.size()) <= agent) {
    throw ValidationError("no deviation space for agent " + std::to_string(agent));
  }
  const AgentSpace& own = space[agent];
  if (own.size() == 0) {
    throw ValidationError("deviation space of agent " + std::to_string(agent) + " is empty");
  }
  const CompiledSpace compiled = compile_space(game, agent, own);
  const ChainEvaluator evaluator(game);
  const auto states = states_initial_first(game);

  std::vector<int> base_policies;
  std::vector<const UpdateRule*> base_rules;
  for (int i = 0; i < game.num_agents(); ++i) {
    base_policies.push_back(policy_index(game, i, profile.agents[i].initial));
    base_rules.push_back(&profile.agents[i].rule);
  }

  const std::size_t candidates = own.size();
  const std::size_t num_states = states.size();
  std::vector<double> values(candidates * num_states);
  parallel_for(candidates, [&](std::size_t c) {
    auto policies = base_policies;
    auto rules = base_rules;
    policies[agent] = compiled.initial[c];
    rules[agent] = compiled.rule[c];
    for (std::size_t k = 0; k < num_states; ++k) {
      values[c * num_states + k] = evaluator.evaluate(policies, rules, states[k]).rho[agent];
    }
  });

  DeviationResult out;
  out.agent = agent;
  out.candidates = candidates;
  std::size_t worst = 0;
  double worst_gain = -std::numeric_limits<double>::infinity();
  std::vector<double> best(num_states, -std::numeric_limits<double>::infinity());
  std::vector<double> baseline(num_states);
  for (std::size_t k = 0; k < num_states; ++k) {
    baseline[k] = evaluator.evaluate(base_policies, base_rules, states[k]).rho[agent];
    for (std::size_t c = 0; c < candidates; ++c) best[k] = std::max(best[k], values[c * num_states + k]);
    const double gain = best[k] - baseline[k];
    if (k == 0 || gain > worst_gain + epsilon) {
      worst = k;
      worst_gain = gain;
    }
  }
  out.state = states[worst];
  out.best_value = best[worst];
  out.baseline_value = baseline[worst];
  out.gain = worst_gain;
  for (std::size_t c = 0; c < candidates; ++c) {
    if (values[c * num_states + worst] >= out.best_value - epsilon) {
      out.best_indices.push_back(c);
      out.best_strategies.push_back(own.strategy(c));
    }
  }
  return out;
}

ActiveVerification verify_active_equilibrium(const ActiveMarkovGame& game,
                                             const StrategyProfile& profile,
                                             const StrategySpace& spaces, double epsilon) {
  validate_profile(game, profile);
  if (static_cast<int>(spaces.size()) != game.num_agents()) {
    throw ValidationError("strategy space must cover every agent");
  }
  ActiveVerification out;
  out.verdict = true;
  out.in_space = true;
  for (int i = 0; i < game.num_agents(); ++i) {
    if (spaces[i].find(game, i, profile.agents[i]) < 0) out.in_space = false;
    auto dev = best_active_deviation(game, profile, i, spaces, epsilon);
    if (dev.gain > epsilon) out.verdict = false;
    out.deviations.push_back(std::move(dev));
  }
  const auto stats = ChainEvaluator(game).evaluate(profile, game.initial_state());
  out.payoff = {stats.rho};
  out.period = stats.period;
  out.entry_length = stats.entry_length;
  return out;
}

std::size_t joint_profile_count(const StrategySpace& spaces, std::size_t cap) {
  std::size_t total = 1;
  bool overflow = false;
  for (const auto& s : spaces) {
    if (s.size() != 0 && total > std::numeric_limits<std::size_t>::max() / s.size()) {
      overflow = true;
      break;
    }
    total *= s.size();
  }
  if (!overflow && total <= cap) return total;
  std::string count;
  if (overflow) {
    for (std::size_t i = 0; i < spaces.size(); ++i) {
      count += (i ? "*" : "") + std::to_string(spaces[i].size());
    }
  } else {
    count = std::to_string(total);
  }
  throw EnumerationCapError("joint profile", count, cap);
}

std::vector<ActiveEquilibrium> enumerate_active_equilibria(const ActiveMarkovGame& game,
                                                           const StrategySpace& spaces,
                                                           const EnumerationOptions& options) {
  const int n = game.num_agents();
  if (static_cast<int>(spaces.size()) != n) {
    throw ValidationError("strategy space must cover every agent");
  }
  const std::size_t total = joint_profile_count(spaces, options.profile_cap);
  if (total == 0) return {};

  std::vector<CompiledSpace> compiled;
  std::vector<std::size_t> size(n), stride(n);
  for (int i = 0; i < n; ++i) {
    compiled.push_back(compile_space(game, i, spaces[i]));
    size[i] = spaces[i].size();
  }
  stride[n - 1] = 1;
  for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * size[i + 1];

  const ChainEvaluator evaluator(game);
  const auto states = states_initial_first(game);
  const std::size_t num_states = states.size();
  const auto digit = [&](std::size_t code, int i) { return (code / stride[i]) % size[i]; };

  // rho[(code * |S| + state) * n + agent] for every profile and initial state.
  std::vector<double> rho(total * num_states * static_cast<std::size_t>(n));
  std::vector<std::size_t> period(total);
  parallel_for(total, [&](std::size_t code) {
    std::vector<int> policies(n);
    std::vector<const UpdateRule*> rules(n);
    for (int i = 0; i < n; ++i) {
      const auto d = digit(code, i);
      policies[i] = compiled[i].initial[d];
      rules[i] = compiled[i].rule[d];
    }
    for (std::size_t k = 0; k < num_states; ++k) {
      const auto stats = evaluator.evaluate(policies, rules, states[k]);
      if (k == 0) period[code] = stats.period;
      std::copy(stats.rho.begin(), stats.rho.end(),
                rho.begin() + static_cast<std::ptrdiff_t>((code * num_states + k) * n));
    }
  });

  // best[i][others * |S| + state]: best value agent i can reach against the
  // other agents' strategies `others` (profile code with digit i removed).
  std::vector<std::vector<double>> best(n);
  for (int i = 0; i < n; ++i) {
    const std::size_t others = total / size[i];
    best[i].assign(others * num_states, -std::numeric_limits<double>::infinity());
    parallel_for(others, [&](std::size_t o) {
      const std::size_t high = o / stride[i];
      const std::size_t low = o % stride[i];
      for (std::size_t c = 0; c < size[i]; ++c) {
        const std::size_t code = (high * size[i] + c) * stride[i] + low;
        for (std::size_t k = 0; k < num_states; ++k) {
          auto& slot = best[i][o * num_states + k];
          slot = std::max(slot, rho[(code * num_states + k) * n + i]);
        }
      }
    });
  }

  std::vector<char> passes(total, 0);
  std::vector<std::vector<double>> gains(total);
  parallel_for(total, [&](std::size_t code) {
    std::vector<double> g(n, -std::numeric_limits<double>::infinity());
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      const std::size_t high = code / (stride[i] * size[i]);
      const std::size_t low = code % stride[i];
      const std::size_t o = high * stride[i] + low;
      for (std::size_t k = 0; k < num_states; ++k) {
        g[i] = std::max(g[i], best[i][o * num_states + k] - rho[(code * num_states + k) * n + i]);
      }
      if (g[i] > options.epsilon) ok = false;
    }
    passes[code] = ok ? 1 : 0;
    if (ok) gains[code] = std::move(g);
  });

  std::vector<ActiveEquilibrium> out;
  for (std::size_t code = 0; code < total; ++code) {
    if (!passes[code]) continue;
    ActiveEquilibrium eq;
    for (int i = 0; i < n; ++i) {
      const auto d = digit(code, i);
      eq.strategy_index.push_back(d);
      eq.profile.agents.push_back(spaces[i].strategy(d));
    }
    const auto first = rho.begin() + static_cast<std::ptrdiff_t>(code * num_states * n);
    eq.payoff.rho.assign(first, first + n);
    eq.period = period[code];
    eq.gains = std::move(gains[code]);
    out.push_back(std::move(eq));
  }
  std::stable_sort(out.begin(), out.end(), [](const ActiveEquilibrium& a, const ActiveEquilibrium& b) {
    const double sa = std::accumulate(a.payoff.rho.begin(), a.payoff.rho.end(), 0.0);
    const double sb = std::accumulate(b.payoff.rho.begin(), b.payoff.rho.end(), 0.0);
    if (sa != sb) return sa > sb;
    return a.strategy_index < b.strategy_index;
  });
  return out;
}

std::string joint_label(const ActiveMarkovGame& game, const JointParameters& params) {
  std::string out = "(";
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) out += ",";
    out += policy_label(game, static_cast<int>(i), params[i]);
  }
  return out + ")";
}

std::string describe_strategy(const ActiveMarkovGame& game, int agent, const AgentStrategy& s) {
  std::string out = "theta0=" + policy_label(game, agent, s.initial) + " U=";
  if (is_identity_rule(game, agent, s.rule)) return out + "identity";
  const auto label_of = [&](int p) { return policy_label(game, agent, policy_from_index(game, agent, p)); };
  out += "{";
  bool first = true;
  const auto joints = joints_in_own_first_order(game, agent);
  if (s.rule.domain == UpdateDomain::kJointActionOnly) {
    for (int j : joints) {
      if (!first) out += ",";
      first = false;
      out += key_label(game, agent, j) + "->" + label_of(s.rule.table[j]);
    }
  } else {
    const int policies = static_cast<int>(policy_count(game, agent));
    for (int p = 0; p < policies; ++p) {
      for (int st = 0; st < game.num_states(); ++st) {
        for (int j : joints) {
          for (int s2 = 0; s2 < game.num_states(); ++s2) {
            if (!first) out += ",";
            first = false;
            out += label_of(p) + "|" + game.state_label(st) + "|" + key_label(game, agent, j) + "|" +
                   game.state_label(s2) + "->" +
                   label_of(s.rule.table[full_key(game, agent, p, st, j, s2)]);
          }
        }
      }
    }
  }
  return out + "}";
}

std::string describe_profile(const ActiveMarkovGame& game, const StrategyProfile& profile) {
  std::string out;
  for (int i = 0; i < static_cast<int>(profile.agents.size()); ++i) {
    if (i) out += "; ";
    out += "agent" + std::to_string(i + 1) + ": " + describe_strategy(game, i, profile.agents[i]);
  }
  return out;
}

void fill_nash_section(const ActiveMarkovGame& game, double epsilon, EquilibriumReport& report) {
  const auto pure = pure_stationary_nash(game, epsilon);
  report.pure_nash.clear();
  for (std::size_t k = 0; k < pure.profiles.size(); ++k) {
    report.pure_nash.push_back({joint_label(game, pure.profiles[k]), pure.profiles[k], pure.payoffs[k].rho});
  }
  report.mixed_nash.clear();
  if (game.num_agents() != 2) return;
  for (int a = 0; a < 2; ++a) {
    if (game.num_actions(a) > kMaxSupportEnumerationActions) return;
  }
  // One entry list per distinct stage game.
  std::vector<StageGame> seen;
  for (int s = 0; s < game.num_states(); ++s) {
    auto stage = game.stage_at(s);
    const bool duplicate = std::any_of(seen.begin(), seen.end(), [&](const StageGame& g) {
      return g.payoff == stage.payoff;
    });
    if (duplicate) continue;
    for (auto& eq : mixed_nash_support_enumeration(stage)) {
      bool pure_eq = true;
      for (const auto& strategy : eq.strategy) {
        const auto top = *std::max_element(strategy.begin(), strategy.end());
        if (std::abs(top - 1.0) > kEpsilon) pure_eq = false;
      }
      report.mixed_nash.push_back({game.state_label(s), std::move(eq), pure_eq});
    }
    seen.push_back(std::move(stage));
  }
}

std::vector<ParetoFlag> pareto_flags(const EquilibriumReport& report, double epsilon) {
  std::vector<ParetoFlag> out;
  for (const auto& entry : report.active) {
    ParetoFlag flag;
    flag.profile = entry.profile;
    flag.dominates_all_pure_nash = std::all_of(
        report.pure_nash.begin(), report.pure_nash.end(),
        [&](const PureNashEntry& p) { return weakly_dominates(entry.payoff, p.payoff, epsilon); });
    flag.dominates_all_mixed_nash = std::all_of(
        report.mixed_nash.begin(), report.mixed_nash.end(), [&](const MixedNashEntry& m) {
          return m.pure || weakly_dominates(entry.payoff, m.equilibrium.value, epsilon);
        });
    if (!entry.payoff.empty()) {
      const auto [lo, hi] = std::minmax_element(entry.payoff.begin(), entry.payoff.end());
      flag.fairness_gap = *hi - *lo;
    }
    out.push_back(std::move(flag));
  }
  return out;
}

std::vector<std::string> discrepancy_notes(const EquilibriumReport& report,
                                           const ReferenceValues& reference, double epsilon) {
  std::vector<std::string> notes;
  for (const auto& ref : reference.pure_nash_payoffs) {
    const bool matched = std::any_of(report.pure_nash.begin(), report.pure_nash.end(),
                                     [&](const PureNashEntry& p) { return close(p.payoff, ref.value, epsilon); });
    if (matched) continue;
    std::string note = "reference stationary Nash payoff " + ref.text +
                       " does not match the computed stationary pure Nash payoffs";
    if (report.pure_nash.empty()) note += " (none found)";
    for (std::size_t k = 0; k < report.pure_nash.size(); ++k) {
      note += (k ? ", " : " ") + report.pure_nash[k].profile + ":" + format_vector(report.pure_nash[k].payoff);
    }
    std::vector<std::string> stages;
    for (const auto& m : report.mixed_nash) {
      if (!m.pure && close(m.equilibrium.value, ref.value, epsilon)) stages.push_back(m.stage);
    }
    if (!stages.empty()) {
      note += "; it equals the mixed equilibrium value of stage";
      for (std::size_t k = 0; k < stages.size(); ++k) note += (k ? ", " : " ") + stages[k];
    }
    notes.push_back(std::move(note));
  }
  for (const auto& ref : reference.mixed_nash_values) {
    const bool matched = std::any_of(report.mixed_nash.begin(), report.mixed_nash.end(), [&](const MixedNashEntry& m) {
      return !m.pure && close(m.equilibrium.value, ref.value, epsilon);
    });
    if (!matched) {
      notes.push_back("reference mixed Nash value " + ref.text +
                      " does not match any computed mixed stage equilibrium");
    }
  }
  if (reference.active_payoff) {
    const auto& ref = *reference.active_payoff;
    const auto it = std::find_if(report.active.begin(), report.active.end(),
                                 [](const ActiveEntry& e) { return e.verified; });
    if (it == report.active.end()) {
      notes.push_back("reference active payoff " + ref.text + " but no verified active profile");
    } else if (!close(it->payoff, ref.value, epsilon)) {
      notes.push_back("reference active payoff " + ref.text + " differs from computed " +
                      format_vector(it->payoff) + " for " + it->profile);
    }
  }
  return notes;
}

ActiveEntry candidate_entry(const ActiveMarkovGame& game, const NamedProfile& candidate,
                            const ActiveVerification& verification) {
  ActiveEntry entry;
  entry.profile = candidate.name;
  entry.description = describe_profile(game, candidate.profile);
  entry.strategies = candidate.profile;
  entry.payoff = verification.payoff.rho;
  entry.period = verification.period;
  entry.verified = verification.verdict;
  for (const auto& d : verification.deviations) entry.deviation_gains.push_back(d.gain);
  return entry;
}

ActiveEntry enumerated_entry(const ActiveMarkovGame& game, const ActiveEquilibrium& eq) {
  ActiveEntry entry;
  bool stationary = true;
  JointParameters params;
  for (int i = 0; i < game.num_agents(); ++i) {
    if (!is_identity_rule(game, i, eq.profile.agents[i].rule)) stationary = false;
    params.push_back(eq.profile.agents[i].initial);
  }
  if (stationary) {
    entry.profile = "stationary" + joint_label(game, params);
  } else {
    entry.profile = "strategies";
    for (std::size_t i = 0; i < eq.strategy_index.size(); ++i) {
      entry.profile += (i ? "," : "(") + std::to_string(eq.strategy_index[i]);
    }
    entry.profile += ")";
  }
  entry.description = describe_profile(game, eq.profile);
  entry.strategies = eq.profile;
  entry.payoff = eq.payoff.rho;
  entry.period = eq.period;
  entry.verified = true;
  entry.deviation_gains = eq.gains;
  return entry;
}

EquilibriumReport compare_report(const ActiveMarkovGame& game, const StrategySpace& spaces,
                                 const ReportInputs& inputs) {
  const double epsilon = inputs.enumeration.epsilon;
  EquilibriumReport report;
  report.scenario = inputs.scenario;
  report.update_domain = inputs.update_domain;
  for (const auto& s : spaces) report.space_sizes.push_back(s.size());
  fill_nash_section(game, epsilon, report);

  std::optional<std::vector<std::size_t>> candidate_index;
  if (inputs.candidate) {
    const auto& candidate = *inputs.candidate;
    const auto verification = verify_active_equilibrium(game, candidate.profile, spaces, epsilon);
    report.active.push_back(candidate_entry(game, candidate, verification));
    if (verification.in_space) {
      std::vector<std::size_t> idx;
      for (int i = 0; i < game.num_agents(); ++i) {
        idx.push_back(static_cast<std::size_t>(spaces[i].find(game, i, candidate.profile.agents[i])));
      }
      candidate_index = std::move(idx);
    } else {
      report.notes.push_back("candidate " + candidate.name +
                             " lies outside the enumerated strategy space; its verdict is still "
                             "checked against every enumerated deviation");
    }
  }

  for (auto& eq : enumerate_active_equilibria(game, spaces, inputs.enumeration)) {
    if (candidate_index && eq.strategy_index == *candidate_index) continue;
    report.active.push_back(enumerated_entry(game, eq));
  }

  std::string sizes;
  for (std::size_t i = 0; i < report.space_sizes.size(); ++i) {
    sizes += (i ? ", " : "") + std::to_string(report.space_sizes[i]);
  }
  report.notes.push_back("active verdicts hold within the enumerated " +
                         std::string(to_string(inputs.update_domain)) +
                         " strategy space (strategies per agent: " + sizes + ")");
  for (auto& note : discrepancy_notes(report, inputs.reference, epsilon)) {
    report.notes.push_back(std::move(note));
  }
  report.pareto = pareto_flags(report, epsilon);
  return report;
}

}  // namespace aeq
