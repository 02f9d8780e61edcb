#include "icegrid/pha.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>

#include "text_util.hpp"

namespace icegrid::pha {

void validate(const PhaConfig& cfg) {
  if (cfg.rho && !(*cfg.rho > 0)) throw std::invalid_argument("pha rho must be positive");
  if (!(cfg.rho_scale > 0)) throw std::invalid_argument("pha rho_scale must be positive");
  if (!(cfg.epsilon > 0)) throw std::invalid_argument("pha epsilon must be positive");
  if (cfg.max_iterations < 0) throw std::invalid_argument("pha max_iterations must be non-negative");
  if (cfg.fix_after_k < 1) throw std::invalid_argument("pha fix_after_k must be at least 1");
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::Cycling: return "cycling";
    case Termination::Infeasible: return "infeasible";
  }
  return "unknown";
}

std::vector<double> aggregate(const std::vector<std::vector<double>>& v, std::span<const double> p) {
  if (v.empty()) throw std::invalid_argument("aggregate needs at least one solution");
  if (p.size() != v.size()) throw std::invalid_argument("one probability per solution required");
  std::vector<double> out(v[0].size(), 0.0);
  for (std::size_t s = 0; s < v.size(); ++s) {
    if (v[s].size() != out.size()) throw std::invalid_argument("solution dimension mismatch");
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += p[s] * v[s][j];
  }
  return out;
}

std::vector<double> update_multipliers(std::span<const double> w, std::span<const double> v,
                                       std::span<const double> v_hat, std::span<const double> rho) {
  if (v.size() != w.size() || v_hat.size() != w.size() || rho.size() != w.size())
    throw std::invalid_argument("multiplier update dimension mismatch");
  std::vector<double> out(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) out[j] = w[j] + rho[j] * (v[j] - v_hat[j]);
  return out;
}

double residual(const std::vector<std::vector<double>>& v, std::span<const double> v_hat,
                std::span<const double> p) {
  if (p.size() != v.size()) throw std::invalid_argument("one probability per solution required");
  double r = 0.0;
  for (std::size_t s = 0; s < v.size(); ++s) {
    if (v[s].size() != v_hat.size()) throw std::invalid_argument("solution dimension mismatch");
    double sq = 0.0;
    for (std::size_t j = 0; j < v_hat.size(); ++j) sq += (v[s][j] - v_hat[j]) * (v[s][j] - v_hat[j]);
    r += p[s] * std::sqrt(sq);
  }
  return r;
}

namespace {

scenario::ScenarioSet only(const scenario::ScenarioSet& set, std::size_t s) {
  scenario::ScenarioSet one;
  one.seed = set.seed;
  one.config_hash = set.config_hash;
  one.window = set.window;
  one.corridor_ids = set.corridor_ids;
  one.scenarios.push_back(set.scenarios[s]);
  one.scenarios[0].probability = 1.0;
  return one;
}

std::vector<double> probabilities(const scenario::ScenarioSet& set) {
  std::vector<double> p;
  double sum = 0.0;
  for (const auto& s : set.scenarios) {
    if (!(s.probability >= 0)) throw std::invalid_argument("negative scenario probability");
    p.push_back(s.probability);
    sum += s.probability;
  }
  if (!(sum > 0)) throw std::invalid_argument("scenario probabilities sum to zero");
  for (double& x : p) x /= sum;
  return p;
}

}  // namespace

Evaluation evaluate_plan(const grid::Network& net, const scenario::ScenarioSet& set,
                         const predictive::Horizon& horizon, const milp::Costs& costs, const milp::Budgets& budgets,
                         std::span<const int> x, std::span<const double> z_mwh, const milp::BuildOptions& options,
                         const solver::SolveOptions& solve, int threads) {
  if (set.scenarios.empty()) throw std::invalid_argument("scenario set is empty");
  if (x.size() != net.corridors.size() || z_mwh.size() != net.storage_sites.size())
    throw std::invalid_argument("plan does not match the network");
  std::vector<double> v;
  for (int xi : x) v.push_back(xi);
  for (double z : z_mwh) v.push_back(z / net.base_mva);

  const auto p = probabilities(set);
  const int n = static_cast<int>(set.scenarios.size());
  std::vector<std::optional<milp::PlanSolution>> sols(n);
  detail::parallel_for(n, threads, [&](int s) {
    auto prob = milp::build_extensive(net, only(set, s), horizon, costs, budgets, options);
    milp::fix_first_stage(prob, v);
    const auto r = solver::solve_milp(prob.model, solve);
    if (solver::has_solution(r.status)) sols[s] = milp::decode_solution(prob, r.values);
  });

  Evaluation ev;
  ev.feasible = true;
  auto& e = ev.expected;
  e.x.assign(x.begin(), x.end());
  e.z_mwh.assign(z_mwh.begin(), z_mwh.end());
  for (int s = 0; s < n; ++s) {
    if (!sols[s]) {
      ev.feasible = false;
      ev.infeasible_scenarios.push_back(set.scenarios[s].id);
      ev.scenario_totals.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const auto& d = *sols[s];
    e.hardening_cost = d.hardening_cost;
    e.storage_cost = d.storage_cost;
    e.investment = d.investment;
    e.psi_n += p[s] * d.psi_n;
    e.psi_e += p[s] * d.psi_e;
    e.preventive_shed_mwh += p[s] * d.preventive_shed_mwh;
    e.emergency_shed_mwh += p[s] * d.emergency_shed_mwh;
    e.schedules.insert(e.schedules.end(), d.schedules.begin(), d.schedules.end());
    ev.scenario_totals.push_back(d.total);
  }
  if (ev.feasible) {
    e.total = e.investment + e.psi_n + e.psi_e;
  } else {
    e = milp::PlanSolution{};
    e.x.assign(x.begin(), x.end());
    e.z_mwh.assign(z_mwh.begin(), z_mwh.end());
  }
  return ev;
}

PhaOutcome run(const grid::Network& net, const scenario::ScenarioSet& set, const predictive::Horizon& horizon,
               const milp::Costs& costs, const milp::Budgets& budgets, const PhaConfig& cfg,
               const milp::BuildOptions& options) {
  validate(cfg);
  if (set.scenarios.empty()) throw std::invalid_argument("scenario set is empty");
  const int n = static_cast<int>(set.scenarios.size());
  const auto p = probabilities(set);
  const std::size_t nx = net.corridors.size(), dim = nx + net.storage_sites.size();

  // Residual and cycle hashing see Z as a fraction of its cap.
  std::vector<double> scale(dim, 1.0);
  for (std::size_t i = 0; i < net.storage_sites.size(); ++i) {
    const double cap = net.storage_sites[i].z_max / net.base_mva;
    if (cap > 0) scale[nx + i] = 1.0 / cap;
  }
  auto normalized = [&](const std::vector<double>& v) {
    std::vector<double> out(v);
    for (std::size_t j = 0; j < dim; ++j) out[j] *= scale[j];
    return out;
  };

  const std::vector<double> zero(dim, 0.0);
  std::vector<double> rho;
  {
    const auto probe = milp::build_subproblem(net, set, 0, horizon, costs, budgets, zero, zero, zero, options);
    rho = cfg.rho ? std::vector<double>(dim, *cfg.rho) : milp::default_rho(probe);
    if (!cfg.rho)
      for (double& r : rho) r *= cfg.rho_scale;
  }

  std::vector<std::vector<double>> w(n, zero), v(n, zero);
  std::vector<double> obj(n, 0.0), v_hat(dim, 0.0);
  std::vector<std::optional<double>> fixed(nx);
  std::vector<int> agree(nx, 0), agree_value(nx, -1);

  PhaOutcome out;
  auto solve_all = [&](bool penalized) {
    std::vector<char> failed(n, 0);
    detail::parallel_for(n, cfg.threads, [&](int s) {
      auto prob = penalized ? milp::build_subproblem(net, set, s, horizon, costs, budgets, w[s], v_hat, rho, options)
                            : milp::build_subproblem(net, set, s, horizon, costs, budgets, zero, zero, zero, options);
      const auto cols = prob.index.first_stage();
      for (std::size_t j = 0; j < nx; ++j)
        if (fixed[j]) prob.model.col_lower[cols[j]] = prob.model.col_upper[cols[j]] = *fixed[j];
      const auto r = solver::solve_milp(prob.model, cfg.solver);
      if (!solver::has_solution(r.status)) {
        failed[s] = 1;
        return;
      }
      for (std::size_t j = 0; j < dim; ++j) v[s][j] = r.values[cols[j]];
      for (std::size_t j = 0; j < nx; ++j) v[s][j] = std::round(v[s][j]);
      obj[s] = r.objective;
    });
    for (int s = 0; s < n; ++s)
      if (failed[s]) out.infeasible_scenarios.push_back(set.scenarios[s].id);
    return out.infeasible_scenarios.empty();
  };

  auto state_hash = [&] {
    std::vector<std::vector<long long>> keys;
    for (const auto& vs : v) {
      std::vector<long long> k;
      const auto nv = normalized(vs);
      for (double x : nv) k.push_back(std::llround(x * 1e6));
      keys.push_back(std::move(k));
    }
    std::sort(keys.begin(), keys.end());
    std::size_t h = 0;
    for (const auto& k : keys)
      for (long long x : k) h ^= std::hash<long long>{}(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  };

  if (!solve_all(false)) {
    out.termination = Termination::Infeasible;
    return out;
  }

  std::map<std::size_t, int> seen;
  std::size_t prev_hash = 0;
  for (int k = 0;; ++k) {
    v_hat = aggregate(v, p);
    std::vector<std::vector<double>> nv;
    for (const auto& vs : v) nv.push_back(normalized(vs));
    const double res = residual(nv, normalized(v_hat), p);
    out.residuals.push_back(res);
    out.log.push_back({k, res, *std::min_element(obj.begin(), obj.end()), *std::max_element(obj.begin(), obj.end()), {}});
    out.iterations = k;

    if (res <= cfg.epsilon) {
      out.termination = Termination::Converged;
      break;
    }
    if (k >= cfg.max_iterations) {
      out.termination = Termination::MaxIterations;
      break;
    }
    const std::size_t h = state_hash();
    if (k > 0 && h != prev_hash && seen.count(h)) {
      out.termination = Termination::Cycling;
      break;
    }
    seen[h] = k;
    prev_hash = h;

    double drift_sum = 0.0;
    for (int s = 0; s < n; ++s) w[s] = update_multipliers(w[s], v[s], v_hat, rho);
    for (std::size_t j = 0; j < dim; ++j) {
      double m = 0.0;
      for (int s = 0; s < n; ++s) m += p[s] * w[s][j];
      drift_sum = std::max(drift_sum, std::abs(m) / std::max(1.0, rho[j]));
    }
    out.multiplier_drift = std::max(out.multiplier_drift, drift_sum);

    if (cfg.enable_fixing)
      for (std::size_t j = 0; j < nx; ++j) {
        if (fixed[j]) continue;
        const int first = static_cast<int>(v[0][j]);
        bool same = true;
        for (int s = 1; s < n; ++s) same = same && static_cast<int>(v[s][j]) == first;
        agree[j] = same ? (agree_value[j] == first ? agree[j] + 1 : 1) : 0;
        agree_value[j] = same ? first : -1;
        if (agree[j] >= cfg.fix_after_k) fixed[j] = first;
      }

    if (!solve_all(true)) {
      out.termination = Termination::Infeasible;
      break;
    }
  }

  if (out.termination == Termination::Infeasible) return out;

  for (std::size_t j = 0; j < nx; ++j) out.x.push_back(v_hat[j] >= 0.5 ? 1 : 0);
  for (std::size_t i = 0; i < net.storage_sites.size(); ++i) out.z_mwh.push_back(v_hat[nx + i] * net.base_mva);
  out.evaluation = evaluate_plan(net, set, horizon, costs, budgets, out.x, out.z_mwh, options, cfg.solver, cfg.threads);
  if (out.evaluation.feasible) out.log.back().consensus_objective = out.evaluation.expected.total;
  return out;
}

void write_log_csv(const std::vector<IterationLog>& log, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "iteration,residual,min_objective,max_objective,consensus_objective\n";
  for (const auto& r : log) {
    f << r.iteration << ',' << detail::num(r.residual) << ',' << detail::num(r.min_objective) << ','
      << detail::num(r.max_objective) << ',';
    if (r.consensus_objective) f << detail::num(*r.consensus_objective);
    f << '\n';
  }
  if (!f) throw std::runtime_error("failed writing " + path);
}

}  // namespace icegrid::pha
