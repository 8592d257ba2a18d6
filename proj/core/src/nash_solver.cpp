#include "aeq/nash_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>

namespace aeq {
namespace {

const UpdateRule kKeep{UpdateDomain::kJointActionOnly, true, {}};

// Average reward of agent `agent` under stationary policy indices.
double stationary_rho(const ChainEvaluator& evaluator, const std::vector<int>& policies,
                      int state, int agent) {
  std::vector<const UpdateRule*> rules(policies.size(), &kKeep);
  return evaluator.evaluate(policies, rules, state).rho[agent];
}

std::vector<int> to_indices(const ActiveMarkovGame& game, const JointParameters& params) {
  if (static_cast<int>(params.size()) != game.num_agents()) {
    throw ValidationError("joint parameters have " + std::to_string(params.size()) +
                          " agents, game has " + std::to_string(game.num_agents()));
  }
  std::vector<int> out;
  for (int i = 0; i < game.num_agents(); ++i) out.push_back(policy_index(game, i, params[i]));
  return out;
}

// Best response of `agent` from `state`; ties go to the lowest policy index.
std::pair<int, double> best_policy(const ChainEvaluator& evaluator, int agent,
                                   std::vector<int> policies, int state, double epsilon) {
  const int count = static_cast<int>(policy_count(evaluator.game(), agent));
  std::vector<double> values(count);
  for (int p = 0; p < count; ++p) {
    policies[agent] = p;
    values[p] = stationary_rho(evaluator, policies, state, agent);
  }
  const double best = *std::max_element(values.begin(), values.end());
  for (int p = 0; p < count; ++p) {
    if (values[p] >= best - epsilon) return {p, values[p]};
  }
  return {0, values[0]};
}

struct IndifferenceSolution {
  std::vector<double> mix;  // over all actions of the mixing player
  double value = 0.0;       // payoff the opponent is made indifferent at
};

// Mixing player spreads over `mix_support` so that the opponent, with payoff
// matrix `opp` indexed [opp action][mix action], is indifferent over
// `opp_support`. Returns nothing when the system is singular or inconsistent.
std::optional<IndifferenceSolution> solve_indifference(const Eigen::MatrixXd& opp,
                                                       const std::vector<int>& opp_support,
                                                       const std::vector<int>& mix_support) {
  const auto rows = static_cast<Eigen::Index>(opp_support.size() + 1);
  const auto cols = static_cast<Eigen::Index>(mix_support.size() + 1);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
  for (Eigen::Index r = 0; r + 1 < rows; ++r) {
    for (Eigen::Index c = 0; c + 1 < cols; ++c) m(r, c) = opp(opp_support[r], mix_support[c]);
    m(r, cols - 1) = -1.0;
  }
  for (Eigen::Index c = 0; c + 1 < cols; ++c) m(rows - 1, c) = 1.0;
  rhs(rows - 1) = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-12);
  if (lu.rank() != cols) return std::nullopt;
  const Eigen::VectorXd x = lu.solve(rhs);
  if ((m * x - rhs).lpNorm<Eigen::Infinity>() > kEpsilon) return std::nullopt;

  IndifferenceSolution out;
  out.mix.assign(opp.cols(), 0.0);
  for (Eigen::Index c = 0; c + 1 < cols; ++c) {
    const double p = x(c);
    if (p < -kEpsilon) return std::nullopt;
    out.mix[mix_support[c]] = std::max(0.0, p);
  }
  out.value = x(cols - 1);
  return out;
}

std::vector<int> support_of(unsigned mask, int n) {
  std::vector<int> out;
  for (int a = 0; a < n; ++a) {
    if (mask & (1u << a)) out.push_back(a);
  }
  return out;
}

bool same_equilibrium(const MixedEquilibrium& a, const MixedEquilibrium& b) {
  for (std::size_t i = 0; i < a.strategy.size(); ++i) {
    for (std::size_t x = 0; x < a.strategy[i].size(); ++x) {
      if (std::abs(a.strategy[i][x] - b.strategy[i][x]) > kMixedDedupTolerance) return false;
    }
  }
  return true;
}

}  // namespace

StationaryNashVerdict verify_stationary_nash(const ActiveMarkovGame& game,
                                             const JointParameters& params, double epsilon) {
  const ChainEvaluator evaluator(game);
  const auto policies = to_indices(game, params);
  StationaryNashVerdict out;
  out.verdict = true;
  std::vector<int> states{game.initial_state()};
  for (int s = 0; s < game.num_states(); ++s) {
    if (s != game.initial_state()) states.push_back(s);
  }
  for (int i = 0; i < game.num_agents(); ++i) {
    StationaryDeviation worst;
    bool first = true;
    for (int s : states) {
      const double baseline = stationary_rho(evaluator, policies, s, i);
      const auto [p, rho] = best_policy(evaluator, i, policies, s, epsilon);
      const double gain = rho - baseline;
      if (first || gain > worst.gain + epsilon) {
        worst = {policy_from_index(game, i, p), gain, s};
        first = false;
      }
    }
    if (worst.gain > epsilon) out.verdict = false;
    out.best_deviation.push_back(std::move(worst));
  }
  return out;
}

PureNashResult pure_stationary_nash(const ActiveMarkovGame& game, double epsilon) {
  const ChainEvaluator evaluator(game);
  const int n = game.num_agents();
  std::vector<int> counts;
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) {
    counts.push_back(static_cast<int>(policy_count(game, i)));
    total *= static_cast<std::size_t>(counts.back());
  }
  PureNashResult out;
  std::vector<int> policies(n, 0);
  std::vector<const UpdateRule*> keep(n, &kKeep);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rest = code;
    for (int i = n - 1; i >= 0; --i) {
      policies[i] = static_cast<int>(rest % counts[i]);
      rest /= counts[i];
    }
    bool equilibrium = true;
    for (int i = 0; i < n && equilibrium; ++i) {
      for (int s = 0; s < game.num_states() && equilibrium; ++s) {
        const double baseline = stationary_rho(evaluator, policies, s, i);
        const double best = best_policy(evaluator, i, policies, s, epsilon).second;
        if (best - baseline > epsilon) equilibrium = false;
      }
    }
    if (!equilibrium) continue;
    JointParameters joint;
    for (int i = 0; i < n; ++i) joint.push_back(policy_from_index(game, i, policies[i]));
    out.profiles.push_back(std::move(joint));
    out.payoffs.push_back({evaluator.evaluate(policies, keep, game.initial_state()).rho});
  }
  return out;
}

StationaryBestResponse stationary_best_response(const ActiveMarkovGame& game, int agent,
                                                const JointParameters& params, double epsilon) {
  return stationary_best_response(game, agent, params, game.initial_state(), epsilon);
}

StationaryBestResponse stationary_best_response(const ActiveMarkovGame& game, int agent,
                                                const JointParameters& params, int initial_state,
                                                double epsilon) {
  if (agent < 0 || agent >= game.num_agents()) throw ValidationError("agent index out of range");
  JointParameters filled = params;
  if (static_cast<int>(filled.size()) == game.num_agents()) {
    filled[agent] = policy_from_index(game, agent, 0);
  }
  const ChainEvaluator evaluator(game);
  const auto [p, rho] = best_policy(evaluator, agent, to_indices(game, filled), initial_state, epsilon);
  return {policy_from_index(game, agent, p), rho};
}

std::vector<MixedEquilibrium> mixed_nash_support_enumeration(const StageGame& stage) {
  validate_stage(stage);
  if (stage.num_agents != 2) {
    throw ValidationError("support enumeration needs exactly 2 agents, got " +
                          std::to_string(stage.num_agents));
  }
  const int rows = static_cast<int>(stage.action_labels[0].size());
  const int cols = static_cast<int>(stage.action_labels[1].size());
  if (rows > kMaxSupportEnumerationActions || cols > kMaxSupportEnumerationActions) {
    throw ValidationError("support enumeration is limited to " +
                          std::to_string(kMaxSupportEnumerationActions) + " actions per agent");
  }
  Eigen::MatrixXd a(rows, cols);  // row player payoffs [row][col]
  Eigen::MatrixXd b(cols, rows);  // column player payoffs [col][row]
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const auto& payoff = stage.payoff.at({r, c});
      a(r, c) = payoff[0];
      b(c, r) = payoff[1];
    }
  }

  std::vector<MixedEquilibrium> out;
  for (unsigned row_mask = 1; row_mask < (1u << rows); ++row_mask) {
    const auto row_support = support_of(row_mask, rows);
    for (unsigned col_mask = 1; col_mask < (1u << cols); ++col_mask) {
      const auto col_support = support_of(col_mask, cols);
      // Column mix makes the row player indifferent over its support, and
      // vice versa.
      const auto q = solve_indifference(a, row_support, col_support);
      if (!q) continue;
      const auto p = solve_indifference(b, col_support, row_support);
      if (!p) continue;

      const Eigen::Map<const Eigen::VectorXd> pv(p->mix.data(), rows);
      const Eigen::Map<const Eigen::VectorXd> qv(q->mix.data(), cols);
      const Eigen::VectorXd row_payoffs = a * qv;
      const Eigen::VectorXd col_payoffs = b * pv;
      const double row_value = pv.dot(row_payoffs);
      const double col_value = qv.dot(col_payoffs);
      if (row_payoffs.maxCoeff() > row_value + kEpsilon) continue;
      if (col_payoffs.maxCoeff() > col_value + kEpsilon) continue;

      MixedEquilibrium eq{{p->mix, q->mix}, {row_value, col_value}};
      const bool duplicate = std::any_of(out.begin(), out.end(), [&](const MixedEquilibrium& e) {
        return same_equilibrium(e, eq);
      });
      if (!duplicate) out.push_back(std::move(eq));
    }
  }
  return out;
}

}  // namespace aeq
