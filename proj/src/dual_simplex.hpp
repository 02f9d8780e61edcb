#pragma once

#include <chrono>
#include <vector>

#include <Eigen/Dense>

#include "icegrid/model.hpp"
#include "icegrid/solver.hpp"

namespace icegrid::solver::detail {

enum class LpOutcome { Optimal, Infeasible, Unbounded, IterationLimit, TimeLimit, Numerical };

using Clock = std::chrono::steady_clock;

/// Bounded-variable dual simplex over the computational form
///   A x - r = 0,  l <= (x, r) <= u
/// with an explicit dense basis inverse kept current by rank-one updates.
/// Columns without a finite bound on one side are boxed by an artificial
/// bound that is widened whenever it ends up binding. The basis survives
/// bound changes, so branch-and-bound re-solves start from the last basis.
class DualSimplex {
 public:
  DualSimplex(const Model& model, const SolveOptions& opts);

  /// Column bounds in model units.
  void set_col_bounds(int j, double lower, double upper);
  double col_lower(int j) const { return tlo_[j] * colscale_[j]; }
  double col_upper(int j) const { return tup_[j] * colscale_[j]; }

  LpOutcome solve(Clock::time_point deadline = Clock::time_point::max());

  double objective() const;
  std::vector<double> primal() const;
  std::vector<double> reduced_costs() const;
  std::vector<double> row_duals() const;
  std::vector<ColumnStatus> column_status() const;
  long iterations() const { return iters_; }

 private:
  int n_ = 0, m_ = 0;
  std::vector<int> cstart_, rind_;
  std::vector<double> val_;
  std::vector<double> colscale_, rowscale_;
  double objscale_ = 1.0, offset_ = 0.0;

  std::vector<double> cost_, tlo_, tup_, lo_, up_, x_, d_;
  std::vector<ColumnStatus> status_;
  std::vector<int> head_, pos_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd dse_;

  double artificial_ = 1e7;
  long iters_ = 0;
  int updates_ = 0;
  int degenerate_run_ = 0;
  bool bland_ = false;
  bool primal_dirty_ = true;
  SolveOptions opts_;

  // scratch
  Eigen::VectorXd rho_, alpha_q_, tau_;
  std::vector<int> cand_;
  std::vector<double> cand_alpha_;

  bool is_structural(int j) const { return j < n_; }
  void load_column(int j, Eigen::VectorXd& out) const;  // out = B^-1 a_j
  double nonbasic_value(int j) const;
  void refresh_working_bounds(int j);
  void place_nonbasic(int j);
  bool at_artificial(int j) const;
  void slack_basis();
  void refactor();
  void compute_primal();
  void compute_dual();
  int correct_dual_infeasibilities();
  int choose_leaving_row() const;
  bool widen_artificial();
  double residual_check();
};

}  // namespace icegrid::solver::detail
