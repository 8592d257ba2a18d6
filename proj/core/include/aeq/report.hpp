#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <string_view>

#include "aeq/active_solver.hpp"

namespace aeq {

// Value rounded to 12 significant digits, as written in reports.
double round_report_real(double value);

// Machine-readable report. Top-level keys: scenario, command, nash, active,
// pareto, notes, space, details. `details` holds command-specific output.
nlohmann::json report_to_json(const EquilibriumReport& report, std::string_view command,
                              const nlohmann::json& details = nlohmann::json::object());

// Plain-text tables for standard output.
std::string render_nash_text(const EquilibriumReport& report);
std::string render_active_text(const EquilibriumReport& report, std::size_t max_rows);
std::string render_report_text(const EquilibriumReport& report, std::size_t max_active_rows = 20);

}  // namespace aeq
