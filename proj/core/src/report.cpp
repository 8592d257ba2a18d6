#include "aeq/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace aeq {

using nlohmann::json;

std::string format_real(double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  std::string out(buf);
  return out == "-0" ? "0" : out;
}

std::string format_vector(const std::vector<double>& values) {
  std::string out = "(";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format_real(values[i]);
  }
  return out + ")";
}

double round_report_real(double value) {
  return std::strtod(format_real(value).c_str(), nullptr);
}

namespace {

json reals(const std::vector<double>& values) {
  json out = json::array();
  for (double v : values) out.push_back(round_report_real(v));
  return out;
}

}  // namespace

json report_to_json(const EquilibriumReport& report, std::string_view command, const json& details) {
  json doc;
  doc["scenario"] = report.scenario;
  doc["command"] = std::string(command);

  json pure = json::array();
  for (const auto& p : report.pure_nash) pure.push_back({{"profile", p.profile}, {"payoff", reals(p.payoff)}});
  json mixed = json::array();
  for (const auto& m : report.mixed_nash) {
    json strategies = json::array();
    for (const auto& s : m.equilibrium.strategy) strategies.push_back(reals(s));
    mixed.push_back({{"stage", m.stage},
                     {"strategies", std::move(strategies)},
                     {"value", reals(m.equilibrium.value)},
                     {"pure", m.pure}});
  }
  doc["nash"] = {{"pure", std::move(pure)}, {"mixed", std::move(mixed)}};

  json active = json::array();
  for (const auto& a : report.active) {
    active.push_back({{"profile", a.profile},
                      {"description", a.description},
                      {"payoff", reals(a.payoff)},
                      {"period", a.period},
                      {"verified", a.verified},
                      {"deviation_gains", reals(a.deviation_gains)}});
  }
  doc["active"] = std::move(active);

  json pareto = json::array();
  for (const auto& p : report.pareto) {
    pareto.push_back({{"profile", p.profile},
                      {"dominates_all_pure_nash", p.dominates_all_pure_nash},
                      {"dominates_all_mixed_nash", p.dominates_all_mixed_nash},
                      {"fairness_gap", round_report_real(p.fairness_gap)}});
  }
  doc["pareto"] = std::move(pareto);
  doc["notes"] = report.notes;
  doc["space"] = {{"update_domain", std::string(to_string(report.update_domain))},
                  {"strategies_per_agent", report.space_sizes}};
  doc["details"] = details.is_object() ? details : json::object();
  return doc;
}

std::string render_nash_text(const EquilibriumReport& report) {
  std::ostringstream out;
  out << "Pure stationary Nash equilibria (" << report.pure_nash.size() << "):\n";
  for (const auto& p : report.pure_nash) {
    out << "  " << p.profile << "  payoff " << format_vector(p.payoff) << "\n";
  }
  if (!report.mixed_nash.empty()) {
    out << "Stage-game Nash equilibria by support enumeration:\n";
    for (const auto& m : report.mixed_nash) {
      out << "  stage " << m.stage << (m.pure ? "  pure " : "  mixed");
      for (std::size_t i = 0; i < m.equilibrium.strategy.size(); ++i) {
        out << "  agent" << i + 1 << " " << format_vector(m.equilibrium.strategy[i]);
      }
      out << "  value " << format_vector(m.equilibrium.value) << "\n";
    }
  }
  return out.str();
}

std::string render_active_text(const EquilibriumReport& report, std::size_t max_rows) {
  std::ostringstream out;
  out << "Active equilibria within the enumerated " << to_string(report.update_domain)
      << " space (" << report.active.size() << " listed):\n";
  std::size_t shown = 0;
  for (const auto& a : report.active) {
    if (shown++ == max_rows) {
      out << "  ... " << report.active.size() - max_rows << " more (use --json for all)\n";
      break;
    }
    out << "  " << a.profile << "  payoff " << format_vector(a.payoff) << "  k=" << a.period
        << (a.verified ? "" : "  NOT an equilibrium") << "\n      " << a.description << "\n";
  }
  return out.str();
}

std::string render_report_text(const EquilibriumReport& report, std::size_t max_active_rows) {
  std::ostringstream out;
  out << "Scenario: " << report.scenario << "\n\n" << render_nash_text(report) << "\n"
      << render_active_text(report, max_active_rows);
  if (!report.pareto.empty()) {
    out << "\nPareto comparison against Nash:\n";
    std::size_t shown = 0;
    for (const auto& p : report.pareto) {
      if (shown++ == max_active_rows) break;
      out << "  " << p.profile << "  dominates all pure Nash: " << (p.dominates_all_pure_nash ? "yes" : "no")
          << "  dominates all mixed Nash: " << (p.dominates_all_mixed_nash ? "yes" : "no")
          << "  fairness gap " << format_real(p.fairness_gap) << "\n";
    }
  }
  if (!report.notes.empty()) {
    out << "\nNotes:\n";
    for (const auto& n : report.notes) out << "  - " << n << "\n";
  }
  return out.str();
}

}  // namespace aeq
