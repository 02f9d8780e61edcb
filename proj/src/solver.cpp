#include "icegrid/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "dual_simplex.hpp"
#include "icegrid/error.hpp"
#include "icegrid/mps.hpp"

namespace icegrid::solver {

using detail::Clock;
using detail::DualSimplex;
using detail::LpOutcome;

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::GapLimit: return "gap_limit";
    case Status::NodeLimit: return "node_limit";
    case Status::TimeLimit: return "time_limit";
    case Status::IterationLimit: return "iteration_limit";
    case Status::NumericalError: return "numerical_error";
  }
  return "unknown";
}

bool has_solution(Status s) {
  return s == Status::Optimal || s == Status::GapLimit || s == Status::NodeLimit || s == Status::TimeLimit ||
         s == Status::IterationLimit;
}

double relative_gap(double incumbent, double bound) {
  if (!std::isfinite(incumbent) || !std::isfinite(bound)) return kInf;
  return std::max(0.0, incumbent - bound) / std::max(1.0, std::abs(incumbent));
}

namespace {

Clock::time_point deadline_for(const SolveOptions& opts) {
  if (!std::isfinite(opts.time_limit_s) || opts.time_limit_s <= 0) return Clock::time_point::max();
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(opts.time_limit_s));
}

void check_options(const SolveOptions& o) {
  if (!(o.feasibility_tol > 0) || !(o.optimality_tol > 0) || !(o.integrality_tol > 0) || !(o.relative_mip_gap >= 0) ||
      !(o.absolute_mip_gap >= 0))
    throw std::invalid_argument("solver tolerances must be positive");
}

Status lp_status(LpOutcome o) {
  switch (o) {
    case LpOutcome::Optimal: return Status::Optimal;
    case LpOutcome::Infeasible: return Status::Infeasible;
    case LpOutcome::Unbounded: return Status::Unbounded;
    case LpOutcome::IterationLimit: return Status::IterationLimit;
    case LpOutcome::TimeLimit: return Status::TimeLimit;
    case LpOutcome::Numerical: return Status::NumericalError;
  }
  return Status::NumericalError;
}

}  // namespace

SolveResult solve_lp(const Model& model, const SolveOptions& opts) {
  check_options(opts);
  DualSimplex lp(model, opts);
  const LpOutcome out = lp.solve(deadline_for(opts));
  SolveResult res;
  res.status = lp_status(out);
  res.iterations = lp.iterations();
  if (out == LpOutcome::Optimal) {
    res.values = lp.primal();
    res.objective = model.objective(res.values);
    res.best_bound = res.objective;
    res.gap = 0.0;
    res.reduced_costs = lp.reduced_costs();
    res.row_duals = lp.row_duals();
    res.column_status = lp.column_status();
  }
  return res;
}

namespace {

struct BoundChange {
  int col;
  double lower, upper;
};

struct Node {
  long id = 0;
  int depth = 0;
  double bound = -kInf;
  std::vector<BoundChange> path;  // cumulative changes from the root
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const Model& model, const SolveOptions& opts)
      : model_(model), opts_(opts), lp_(model, opts), deadline_(deadline_for(opts)) {
    for (int j = 0; j < model.num_cols(); ++j)
      if (model.is_integer[j]) ints_.push_back(j);
  }

  SolveResult run();

 private:
  const Model& model_;
  SolveOptions opts_;
  DualSimplex lp_;
  Clock::time_point deadline_;
  std::vector<int> ints_;
  std::vector<BoundChange> applied_;
  std::vector<double> incumbent_;
  double incumbent_obj_ = kInf;
  bool stopped_ = false;
  Status stop_status_ = Status::Optimal;

  double prune_level() const {
    if (!std::isfinite(incumbent_obj_)) return kInf;
    return incumbent_obj_ - std::max(opts_.absolute_mip_gap, opts_.relative_mip_gap * std::max(1.0, std::abs(incumbent_obj_)));
  }

  void apply(const std::vector<BoundChange>& path) {
    for (const auto& c : applied_) lp_.set_col_bounds(c.col, model_.col_lower[c.col], model_.col_upper[c.col]);
    for (const auto& c : path) lp_.set_col_bounds(c.col, c.lower, c.upper);
    applied_ = path;
  }

  LpOutcome solve_node() {
    const LpOutcome out = lp_.solve(deadline_);
    if (out == LpOutcome::TimeLimit || out == LpOutcome::IterationLimit) {
      stopped_ = true;
      stop_status_ = lp_status(out);
    }
    return out;
  }

  bool try_incumbent(std::vector<double> x) {
    for (int j : ints_) {
      if (std::abs(x[j] - std::round(x[j])) > opts_.integrality_tol) return false;
      x[j] = std::round(x[j]);
    }
    if (model_.max_violation(x) > std::max(opts_.feasibility_tol, 1e-6)) return false;
    const double z = model_.objective(x);
    if (z < incumbent_obj_) {
      incumbent_obj_ = z;
      incumbent_ = std::move(x);
      return true;
    }
    return false;
  }

  void rounding_heuristic(const std::vector<BoundChange>& path, const std::vector<double>& x) {
    for (int variant = 0; variant < 2 && !stopped_; ++variant) {
      std::vector<BoundChange> fixed = path;
      for (int j : ints_) {
        double v = variant == 0 ? std::round(x[j]) : (x[j] > opts_.integrality_tol ? std::ceil(x[j] - opts_.integrality_tol) : 0.0);
        v = std::clamp(v, lp_.col_lower(j), lp_.col_upper(j));
        fixed.push_back({j, v, v});
      }
      apply(fixed);
      if (solve_node() == LpOutcome::Optimal) try_incumbent(lp_.primal());
    }
    apply(path);
  }

  int most_fractional(const std::vector<double>& x) const {
    int best = -1;
    double best_frac = opts_.integrality_tol;
    for (int j : ints_) {
      const double f = std::abs(x[j] - std::round(x[j]));
      if (f > best_frac + 1e-12) {
        best_frac = f;
        best = j;
      }
    }
    return best;
  }
};

SolveResult BranchAndBound::run() {
  SolveResult res;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  open.push(Node{});
  long next_id = 1;
  long nodes = 0;
  double pruned_floor = kInf;
  bool numerical_trouble = false;

  while (!open.empty() && !stopped_) {
    if (open.top().bound >= prune_level()) break;
    if (nodes >= opts_.node_limit) {
      stopped_ = true;
      stop_status_ = Status::NodeLimit;
      break;
    }
    Node node = open.top();
    open.pop();
    ++nodes;
    apply(node.path);
    const LpOutcome out = solve_node();
    if (stopped_) {
      open.push(node);
      break;
    }
    if (out == LpOutcome::Infeasible) continue;
    if (out == LpOutcome::Unbounded) {
      if (node.id == 0) {
        res.status = Status::Unbounded;
        res.nodes = nodes;
        res.iterations = lp_.iterations();
        return res;
      }
      numerical_trouble = true;
      continue;
    }
    if (out == LpOutcome::Numerical) {
      numerical_trouble = true;
      pruned_floor = std::min(pruned_floor, node.bound);
      continue;
    }
    const double z = lp_.objective();
    if (z >= prune_level()) {
      pruned_floor = std::min(pruned_floor, z);
      continue;
    }
    const std::vector<double> x = lp_.primal();
    const int j = most_fractional(x);
    if (j < 0) {
      if (!try_incumbent(x)) {
        // integral but rejected by the residual pass: fix and move on
        numerical_trouble = true;
      }
      continue;
    }
    if (node.id == 0 || nodes % 10 == 0) rounding_heuristic(node.path, x);
    if (stopped_) {
      node.bound = std::max(node.bound, z);
      open.push(node);
      break;
    }
    Node down{next_id++, node.depth + 1, z, node.path};
    down.path.push_back({j, lp_.col_lower(j), std::floor(x[j])});
    Node up{next_id++, node.depth + 1, z, node.path};
    up.path.push_back({j, std::ceil(x[j]), lp_.col_upper(j)});
    open.push(std::move(down));
    open.push(std::move(up));
  }

  double bound = std::min(pruned_floor, incumbent_obj_);
  if (!open.empty()) bound = std::min(bound, open.top().bound);
  res.nodes = nodes;
  res.iterations = lp_.iterations();
  if (!incumbent_.empty()) {
    res.values = incumbent_;
    res.objective = incumbent_obj_;
    res.best_bound = std::min(bound, incumbent_obj_);
    res.gap = relative_gap(incumbent_obj_, res.best_bound);
    if (!stopped_) res.status = res.gap <= opts_.relative_mip_gap + 1e-12 ? Status::Optimal : Status::GapLimit;
    else res.status = stop_status_;
  } else {
    res.best_bound = bound;
    if (stopped_) res.status = stop_status_;
    else res.status = numerical_trouble ? Status::NumericalError : Status::Infeasible;
  }
  if (numerical_trouble) res.message = "numerical difficulties in some nodes";
  return res;
}

}  // namespace

SolveResult solve_milp(const Model& model, const SolveOptions& opts) {
  check_options(opts);
  if (std::none_of(model.is_integer.begin(), model.is_integer.end(), [](auto f) { return f != 0; })) {
    SolveResult r = solve_lp(model, opts);
    r.nodes = 1;
    return r;
  }
  for (int j = 0; j < model.num_cols(); ++j)
    if (model.is_integer[j] && model.col_lower[j] > model.col_upper[j]) {
      SolveResult r;
      r.status = Status::Infeasible;
      return r;
    }
  // integer bounds tighten to integers
  Model m = model;
  for (int j = 0; j < m.num_cols(); ++j)
    if (m.is_integer[j]) {
      m.col_lower[j] = std::ceil(m.col_lower[j] - opts.integrality_tol);
      m.col_upper[j] = std::floor(m.col_upper[j] + opts.integrality_tol);
      if (m.col_lower[j] > m.col_upper[j]) {
        SolveResult r;
        r.status = Status::Infeasible;
        return r;
      }
    }
  BranchAndBound bb(m, opts);
  return bb.run();
}

SolveResult InternalBackend::solve(const Model& model, const SolveOptions& opts) { return solve_milp(model, opts); }

SolveResult ExternalBackend::solve(const Model& model, const SolveOptions&) {
  namespace fs = std::filesystem;
  fs::create_directories(workdir_);
  const std::string mps_path = (fs::path(workdir_) / "model.mps").string();
  const std::string sol_path = (fs::path(workdir_) / "model.sol").string();
  mps::write_file(model, mps_path);
  std::error_code ec;
  fs::remove(sol_path, ec);
  std::string cmd = command_;
  for (const auto& [key, value] : {std::pair<std::string, std::string>{"{mps}", mps_path}, {"{sol}", sol_path}}) {
    for (auto pos = cmd.find(key); pos != std::string::npos; pos = cmd.find(key, pos + value.size()))
      cmd.replace(pos, key.size(), value);
  }
  const int rc = std::system(cmd.c_str());
  if (rc != 0 && !fs::exists(sol_path))
    throw SolverError("external solver command failed with code " + std::to_string(rc));
  return read_solution_file(model, sol_path);
}

SolveResult read_solution_file(const Model& model, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open solution file");
  std::unordered_map<std::string, int> index;
  for (int j = 0; j < model.num_cols(); ++j) {
    index.emplace(mps::column_name(j), j);
    if (j < static_cast<int>(model.col_names.size()) && !model.col_names[j].empty()) index[model.col_names[j]] = j;
  }
  SolveResult res;
  res.status = Status::Optimal;
  res.values.assign(model.num_cols(), 0.0);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key) || key[0] == '#') continue;
    if (!(ls >> value)) throw ParseError(path, "line " + std::to_string(lineno) + ": expected 'column value'");
    if (key == "status") {
      bool found = false;
      for (Status s : {Status::Optimal, Status::Infeasible, Status::Unbounded, Status::GapLimit, Status::NodeLimit,
                       Status::TimeLimit, Status::IterationLimit, Status::NumericalError})
        if (value == to_string(s)) {
          res.status = s;
          found = true;
        }
      if (!found) throw ParseError(path, "unknown status '" + value + "'");
      continue;
    }
    if (key == "objective") continue;
    const auto it = index.find(key);
    if (it == index.end()) throw ParseError(path, "line " + std::to_string(lineno) + ": unknown column '" + key + "'");
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
      throw ParseError(path, "line " + std::to_string(lineno) + ": bad number '" + value + "'");
    res.values[it->second] = v;
  }
  if (has_solution(res.status)) {
    res.objective = model.objective(res.values);
  } else {
    res.values.clear();
  }
  return res;
}

void write_solution_file(const Model& model, const SolveResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "status " << to_string(result.status) << "\n";
  if (!has_solution(result.status)) return;
  out << "objective " << result.objective << "\n";
  for (int j = 0; j < model.num_cols(); ++j) {
    const std::string& name =
        j < static_cast<int>(model.col_names.size()) && !model.col_names[j].empty() ? model.col_names[j] : mps::column_name(j);
    out << name << ' ' << result.values.at(j) << "\n";
  }
}

}  // namespace icegrid::solver
