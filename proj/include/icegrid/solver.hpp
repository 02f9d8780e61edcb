#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "icegrid/model.hpp"

namespace icegrid::solver {

struct SolveOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-7;
  double integrality_tol = 1e-6;
  double relative_mip_gap = 1e-4;
  double absolute_mip_gap = 1e-9;
  long node_limit = 1'000'000;
  double time_limit_s = std::numeric_limits<double>::infinity();
  long iteration_limit = 5'000'000;
  bool verbose = false;
};

enum class Status { Optimal, Infeasible, Unbounded, GapLimit, NodeLimit, TimeLimit, IterationLimit, NumericalError };

const char* to_string(Status s);
/// True when `values` holds a feasible point (optimal or limit-stopped with an incumbent).
bool has_solution(Status s);

enum class ColumnStatus : unsigned char { Basic, AtLower, AtUpper, Fixed, Free };

struct SolveResult {
  Status status = Status::NumericalError;
  std::vector<double> values;  // one per column
  double objective = std::numeric_limits<double>::infinity();
  double best_bound = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  long nodes = 0;
  long iterations = 0;
  /// LP only: reduced costs, row duals and final column statuses.
  std::vector<double> reduced_costs;
  std::vector<double> row_duals;
  std::vector<ColumnStatus> column_status;
  std::string message;
};

/// Bounded-variable revised dual simplex on the continuous relaxation.
SolveResult solve_lp(const Model& model, const SolveOptions& opts = {});

/// Best-bound branch and bound with most-fractional branching on top of the
/// dual simplex. Child nodes warm-start from the current basis.
SolveResult solve_milp(const Model& model, const SolveOptions& opts = {});

/// Relative gap (incumbent - bound) / max(1, |incumbent|).
double relative_gap(double incumbent, double bound);

/// Pluggable solve route.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual SolveResult solve(const Model& model, const SolveOptions& opts) = 0;
};

/// The in-repo kernel.
class InternalBackend final : public Backend {
 public:
  std::string name() const override { return "internal"; }
  SolveResult solve(const Model& model, const SolveOptions& opts) override;
};

/// Hands the model to an external program: writes `<workdir>/model.mps`, runs
/// `command` with {mps} and {sol} substituted, then reads `{sol}` back as
/// "column value" lines (an optional first line "status <name>").
class ExternalBackend final : public Backend {
 public:
  ExternalBackend(std::string command, std::string workdir)
      : command_(std::move(command)), workdir_(std::move(workdir)) {}
  std::string name() const override { return "external"; }
  SolveResult solve(const Model& model, const SolveOptions& opts) override;

 private:
  std::string command_;
  std::string workdir_;
};

/// Parses a plain-text "column value" solution file against `model`.
SolveResult read_solution_file(const Model& model, const std::string& path);
void write_solution_file(const Model& model, const SolveResult& result, const std::string& path);

}  // namespace icegrid::solver
