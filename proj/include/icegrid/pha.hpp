#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "icegrid/milp_builder.hpp"
#include "icegrid/solver.hpp"

/// Progressive hedging over the per-scenario subproblems.
namespace icegrid::pha {

struct PhaConfig {
  /// Scalar penalty override. Unset means the cost-proportional default of
  /// milp::default_rho times `rho_scale`.
  std::optional<double> rho;
  double rho_scale = 1.0;
  double epsilon = 1e-4;
  int max_iterations = 50;
  int fix_after_k = 5;
  bool enable_fixing = false;
  int threads = 1;
  solver::SolveOptions solver;
};

void validate(const PhaConfig& cfg);

enum class Termination { Converged, MaxIterations, Cycling, Infeasible };
const char* to_string(Termination t);

/// Probability-weighted mean per coordinate.
std::vector<double> aggregate(const std::vector<std::vector<double>>& v, std::span<const double> probabilities);

/// w + rho (v - v_hat), elementwise.
std::vector<double> update_multipliers(std::span<const double> w, std::span<const double> v,
                                       std::span<const double> v_hat, std::span<const double> rho);

/// sum_s p_s ||v(s) - v_hat||_2.
double residual(const std::vector<std::vector<double>>& v, std::span<const double> v_hat,
                std::span<const double> probabilities);

struct IterationLog {
  int iteration = 0;
  double residual = 0.0;
  double min_objective = 0.0;
  double max_objective = 0.0;
  std::optional<double> consensus_objective;
};

/// A first-stage plan priced on every scenario with the recourse solved exactly.
struct Evaluation {
  bool feasible = false;
  std::vector<int> infeasible_scenarios;  ///< scenario ids
  milp::PlanSolution expected;             ///< probability-weighted; schedules of every scenario
  std::vector<double> scenario_totals;
};

/// Fixes (x, Z in MWh) and solves each scenario's recourse on its own.
Evaluation evaluate_plan(const grid::Network& net, const scenario::ScenarioSet& set,
                         const predictive::Horizon& horizon, const milp::Costs& costs, const milp::Budgets& budgets,
                         std::span<const int> x, std::span<const double> z_mwh, const milp::BuildOptions& options = {},
                         const solver::SolveOptions& solve = {}, int threads = 1);

struct PhaOutcome {
  Termination termination = Termination::MaxIterations;
  int iterations = 0;
  std::vector<double> residuals;  ///< one per iteration, starting at 0
  std::vector<IterationLog> log;
  std::vector<int> infeasible_scenarios;
  std::vector<int> x;          ///< majority-rounded consensus
  std::vector<double> z_mwh;   ///< mean consensus
  Evaluation evaluation;       ///< consensus priced on every scenario
  /// Max |sum_s p_s w_s| seen after any multiplier update.
  double multiplier_drift = 0.0;
};

PhaOutcome run(const grid::Network& net, const scenario::ScenarioSet& set, const predictive::Horizon& horizon,
               const milp::Costs& costs, const milp::Budgets& budgets, const PhaConfig& config,
               const milp::BuildOptions& options = {});

void write_log_csv(const std::vector<IterationLog>& log, const std::string& path);

}  // namespace icegrid::pha
