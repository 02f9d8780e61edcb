#pragma once

#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "icegrid/grid_model.hpp"
#include "icegrid/model.hpp"
#include "icegrid/predictive.hpp"
#include "icegrid/scenario.hpp"

namespace icegrid::milp {

/// Operating cost data in $/MWh unless noted.
struct Costs {
  /// When set (>= 0), replaces every generator's marginal cost.
  double gen_override = -1.0;
  double discharge = 5.0;
  double wind_curtail = 500.0;
  double shed_emergency = 2000.0;
  double critical_factor = 2.0;  ///< critical-bus shedding cost multiplier
  predictive::PenaltySchedule penalty;
  double discount_rate = 0.05;
  int lifetime_years = 10;
  double days_per_year = 365.0;
};

struct Budgets {
  double lines = std::numeric_limits<double>::infinity();    ///< $
  double storage = std::numeric_limits<double>::infinity();  ///< $ (same pro-rating as the objective)
};

struct BuildOptions {
  bool per_step_modes = false;
  double theta_max = 0.6;  ///< rad
};

double capital_recovery_factor(double rate, int years);
/// Daily pro-rated storage investment coefficient c_b in $ per MWh of capacity.
double storage_cost_per_mwh(const grid::StorageSite& site, const Costs& costs);

/// Contiguous column range laid out row-major as [rows][cols].
struct Block {
  int first = 0;
  int rows = 0;
  int cols = 0;
  int operator()(int r, int c) const { return first + r * cols + c; }
  int size() const { return rows * cols; }
  bool contains(int col) const { return col >= first && col < first + size(); }
};

/// Columns of one scenario. Step-indexed blocks have rows = T (row t-1 for step t).
struct ScenarioColumns {
  Block pg, flow, theta, shed, curtail, charge, discharge, soc;
  /// Normal-period modes: [1][site] shared by T0 and TN, or [T0+TN][site] with per-step modes.
  Block mode_ch_n, mode_dis_n;
  /// Emergency modes: [|TE|][site].
  Block mode_ch_e, mode_dis_e;
};

struct VariableIndex {
  Block x;  ///< [1][corridor] hardening
  Block z;  ///< [1][site] storage MWh (model units)
  std::vector<ScenarioColumns> scenarios;
  /// Absolute-deviation columns of the proximal term, [1][site] each (subproblems only).
  Block dev_pos, dev_neg;
  /// First-stage vector v = (x, z) as column ids.
  std::vector<int> first_stage() const;
};

struct ScenarioData {
  int id = 0;
  double probability = 1.0;
  std::vector<std::vector<double>> load;  // [bus][t-1], MW
  std::vector<std::vector<double>> wind;  // [farm][t-1], MW
  scenario::DamageSeries damage;
};

/// Everything decode_solution needs to recompute costs from first principles.
struct BuildContext {
  grid::Network net;  ///< MW units
  predictive::Horizon horizon;
  Costs costs;
  Budgets budgets;
  BuildOptions options;
  std::vector<ScenarioData> scenarios;
};

/// Proximal data of a penalised subproblem: objective adds w'v + sum_j rho_j/2 * pen_j(v_j).
struct Proximal {
  std::vector<double> w, v_hat, rho;
};

struct MilpProblem {
  Model model;
  VariableIndex index;
  std::shared_ptr<const BuildContext> context;
  /// Model power unit in MW (the network base): column values times this give MW.
  double power_unit = 1.0;
  bool is_subproblem = false;
  Proximal proximal;
};

/// Two-stage extensive form over every scenario of the set.
MilpProblem build_extensive(const grid::Network& net, const scenario::ScenarioSet& set,
                            const predictive::Horizon& horizon, const Costs& costs, const Budgets& budgets,
                            const BuildOptions& options = {});

/// Scenario-s subproblem with the progressive-hedging proximal terms. `w`,
/// `v_hat` and `rho` are aligned with VariableIndex::first_stage().
MilpProblem build_subproblem(const grid::Network& net, const scenario::ScenarioSet& set, std::size_t scenario_pos,
                             const predictive::Horizon& horizon, const Costs& costs, const Budgets& budgets,
                             std::span<const double> w, std::span<const double> v_hat, std::span<const double> rho,
                             const BuildOptions& options = {});

/// Fixes the first-stage columns of `problem` to `v` (aligned with first_stage()).
void fix_first_stage(MilpProblem& problem, std::span<const double> v);

/// Default per-variable proximal weights rho_j = |c_j| / max(1, range_j).
std::vector<double> default_rho(const MilpProblem& problem);

struct ScenarioSchedule {
  int scenario_id = 0;
  double probability = 1.0;
  /// [t-1][k] in MW / MWh / rad.
  std::vector<std::vector<double>> pg, flow, theta, shed, curtail, charge, discharge, soc;
  double psi_n = 0.0;  ///< T0 + TN operating cost, $
  double psi_e = 0.0;  ///< TE shedding cost, $
  double preventive_shed_mwh = 0.0;
  double emergency_shed_mwh = 0.0;
  double preventive_shed_cost = 0.0;
};

struct PlanSolution {
  std::vector<int> x;        ///< per corridor
  std::vector<double> z_mwh;  ///< per storage site
  double hardening_cost = 0.0;
  double storage_cost = 0.0;
  double investment = 0.0;
  double psi_n = 0.0;  ///< expectation over scenarios
  double psi_e = 0.0;
  double total = 0.0;  ///< investment + psi_n + psi_e
  double preventive_shed_mwh = 0.0;
  double emergency_shed_mwh = 0.0;
  double proximal_terms = 0.0;  ///< subproblems only
  std::vector<ScenarioSchedule> schedules;
};

/// Decodes raw column values. Throws std::invalid_argument on a length
/// mismatch or an integer column off by more than 1e-6, and
/// std::runtime_error if the recomputed cost split disagrees with the model
/// objective by more than 1e-6 relative.
PlanSolution decode_solution(const MilpProblem& problem, std::span<const double> values);

void export_mps(const MilpProblem& problem, const std::string& path);

}  // namespace icegrid::milp
