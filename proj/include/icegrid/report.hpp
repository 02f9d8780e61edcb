#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "icegrid/milp_builder.hpp"
#include "icegrid/pha.hpp"
#include "icegrid/solver.hpp"

/// Planning runs and the artifacts built from them.
namespace icegrid::report {

enum class Mode { Extensive, Pha };
const char* to_string(Mode m);

/// Everything a planning run needs besides the preparation time.
struct PlanInputs {
  const grid::Network* net = nullptr;
  const scenario::ScenarioSet* scenarios = nullptr;
  milp::Costs costs;
  milp::Budgets budgets;
  milp::BuildOptions build;
  Mode mode = Mode::Extensive;
  pha::PhaConfig pha;
  solver::SolveOptions solve;
  /// Extensive mode only; null means the in-repo kernel.
  std::shared_ptr<solver::Backend> backend;
  int threads = 1;
};

struct PlanOutcome {
  bool feasible = false;
  std::string status;  ///< solver status or PHA termination
  int xi = 0;
  milp::PlanSolution solution;  ///< expected values; empty when infeasible
  double bound = 0.0;           ///< extensive mode: best bound
  double gap = 0.0;
  std::optional<pha::PhaOutcome> pha;
  std::vector<int> infeasible_scenarios;
};

predictive::Horizon horizon_for(const scenario::ScenarioSet& set, int xi);

PlanOutcome plan(const PlanInputs& in, int xi);

struct SweepRow {
  double xi = 0.0;
  bool feasible = false;
  std::string status;
  double preventive_shed_mwh = 0.0;
  double emergency_shed_mwh = 0.0;
  double preventive_cost = 0.0;  ///< psi^N
  double emergency_cost = 0.0;   ///< psi^E
  double total_cost = 0.0;
  double hardening_cost = 0.0;
  double storage_cost = 0.0;
  std::vector<double> storage_mwh_by_bus;
  /// Unset on the first row and next to infeasible rows.
  std::optional<double> marginal_preventive_cost_increment;
};

struct StrategyResult {
  std::string id;  ///< I, II, III or IV
  std::string description;
  bool feasible = false;
  std::string status;
  std::optional<double> preparation_cost;
  std::optional<double> emergency_cost;
  std::optional<double> total_cost;
};

SweepRow to_row(const PlanOutcome& o, const grid::Network& net);
std::vector<SweepRow> sweep_xi(const PlanInputs& in, std::vector<int> xi_values);
/// I = as given, II = xi 0, III = constant penalty (b = 0), IV = no hardening.
std::vector<StrategyResult> strategy_compare(const PlanInputs& in, int xi);

struct Results {
  std::optional<PlanOutcome> plan;  ///< drives investment.csv
  std::vector<SweepRow> sweep;
  std::vector<StrategyResult> strategies;
  std::string header;  ///< provenance line written atop summary.md
};

/// Writes sweep.csv, strategies.csv, investment.csv, summary.md,
/// cost_vs_xi.svg and shed_vs_xi.svg under `dir`.
void render_reports(const Results& results, const grid::Network& net, const std::string& dir);

std::string sweep_csv(const std::vector<SweepRow>& rows, const grid::Network& net);
std::string strategies_csv(const std::vector<StrategyResult>& rows);
std::string investment_csv(const std::optional<PlanOutcome>& plan, const grid::Network& net);
std::string summary_md(const Results& results, const grid::Network& net);
/// Minimal standalone SVG line chart; one polyline per series.
std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<double>& x, const std::vector<std::pair<std::string, std::vector<double>>>& series);

/// Plan file contents: x per corridor id, Z per storage bus, costs, status.
std::string plan_json(const PlanOutcome& o, const grid::Network& net, const std::string& header_json);

}  // namespace icegrid::report
