// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "../common/oracles.hpp"
#include "icegrid/cli.hpp"
#include "icegrid/hazard.hpp"
#include "icegrid/milp_builder.hpp"
#include "icegrid/mps.hpp"
#include "icegrid/pha.hpp"
#include "icegrid/report.hpp"
#include "icegrid/scenario.hpp"
#include "icegrid/solver.hpp"

using namespace icegrid;
namespace fs = std::filesystem;
using solver::Status;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 6) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

struct Env {
  std::string workdir;
  std::string cli;
  int threads = 1;
};

const std::string kData = ICEGRID_DATA_DIR;

grid::Network six_bus() { return grid::load_network(kData + "/six_bus.json"); }

scenario::ScenarioSet sampled(const grid::Network& net, scenario::Window win, int count, std::uint64_t seed,
                              int threads = 1) {
  scenario::ScenarioConfig cfg;
  cfg.window = win;
  return scenario::generate_set(net, cfg, seed, count, threads);
}

predictive::Horizon horizon_of(const scenario::Window& w, int xi) {
  return predictive::partition_horizon(w.total, w.storm_start, w.storm_end, xi, w.step_hours);
}

solver::SolveOptions tight() {
  solver::SolveOptions o;
  o.relative_mip_gap = 1e-9;
  return o;
}

// ---------------------------------------------------------------------------

Verdict fragility(const Env&) {
  std::ostringstream why;
  int bad = 0;
  for (double R : {0.5, 2.0, 6.35, 12.7, 25.0}) {
    if (hazard::segment_failure_prob(R, R) != 0.0) ++bad, why << " F(R)!=0 at R=" << R << ";";
    if (hazard::segment_failure_prob(0.5 * R, R) != 0.0) ++bad, why << " F<0 region nonzero;";
    for (double k : {5.0, 5.5, 10.0})
      if (hazard::segment_failure_prob(k * R, R) != 1.0) ++bad, why << " F(" << k << "R)!=1;";
  }
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> ur(0.0, 80.0), uR(0.5, 20.0), ud(1e-6, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const double r = ur(gen), R = uR(gen), d = ud(gen);
    const double p = hazard::segment_failure_prob(r, R);
    if (p < 0.0 || p > 1.0) ++bad;
    if (hazard::segment_failure_prob(r + d, R) < p) ++bad;  // non-decreasing in r
    if (hazard::segment_failure_prob(r, R + d) > p) ++bad;  // non-increasing in R
  }
  // corridor: P(some segment fails) summed over every non-empty failure pattern
  double worst = 0.0;
  std::uniform_int_distribution<int> un(1, 12);
  std::uniform_real_distribution<double> up(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> p(un(gen));
    for (auto& v : p) v = up(gen) < 0.2 ? 0.0 : up(gen);
    const int n = static_cast<int>(p.size());
    long double any = 0.0L;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
      long double prob = 1.0L;
      for (int k = 0; k < n; ++k) prob *= (mask >> k & 1) ? p[k] : 1.0L - p[k];
      any += prob;
    }
    worst = std::max(worst, std::abs(hazard::corridor_failure_prob(p) - static_cast<double>(any)));
  }
  if (worst > 1e-12) ++bad, why << " corridor oracle diff " << worst << ";";
  return {bad == 0, "violations " + std::to_string(bad) + ", corridor max diff " + fmt(worst, 3) + why.str()};
}

Verdict dominance(const Env& env) {
  const auto net = six_bus();
  const int n = 10000;
  const auto set = sampled(net, {12, 7, 12, 1.0}, n, 2024, env.threads);
  long cells = 0, violations = 0, damaged = 0;
  for (const auto& sc : set.scenarios)
    for (std::size_t c = 0; c < sc.damage.phi_o.size(); ++c)
      for (std::size_t k = 0; k < sc.damage.phi_o[c].size(); ++k) {
        ++cells;
        damaged += sc.damage.phi_o[c][k];
        if (sc.damage.phi_w[c][k] > sc.damage.phi_o[c][k]) ++violations;
      }
  const bool ok = violations == 0 && static_cast<int>(set.scenarios.size()) == n && damaged > 0;
  return {ok, std::to_string(n) + " scenarios, " + std::to_string(cells) + " cells, " + std::to_string(damaged) +
                  " unhardened outages, " + std::to_string(violations) + " violations"};
}

Verdict calibration(const Env&) {
  const double R = 5.0;
  const auto net = grid::parse_network(R"({"buses": [{"id": 1, "load_profile": [1,1,1,1,1,1]},
      {"id": 2, "load_profile": [2,2,2,2,2,2]}],
    "corridors": [{"id": 1, "from": 1, "to": 2, "b_pu": 10, "pmax_mw": 50, "length_miles": 5, "r_base_mm": 5}]})");
  scenario::ScenarioConfig cfg;
  cfg.window = {6, 1, 6, 1.0};
  // constant thickness: all the ice arrives in the first step
  scenario::StormSample storm;
  storm.weather.push_back({1.5 * R * 0.9 * std::numbers::pi, 0.0, true, 1.0});
  for (int k = 1; k < 6; ++k) storm.weather.push_back({0.0, 0.0, true, 1.0});
  storm.corridor_intensity = {1.0};
  const double r = hazard::accumulate_thickness(storm.weather).back();
  const double p = hazard::segment_failure_prob(r, R);
  const int n = 10000;
  int failed = 0;
  for (int i = 0; i < n; ++i) {
    Stream d(99, i, StreamPurpose::Damage), w(99, i, StreamPurpose::Wind), rep(99, i, StreamPurpose::Repair);
    const auto dmg = scenario::sample_damage_series(storm, net, cfg, {d, w, rep});
    failed += std::any_of(dmg.phi_o[0].begin(), dmg.phi_o[0].end(), [](auto v) { return v != 0; });
  }
  const double freq = double(failed) / n, se = std::sqrt(p * (1 - p) / n);
  const bool freq_ok = std::abs(freq - p) <= 2 * se;

  const hazard::RepairDist law{4.0, 10.0};
  Stream u(99, 0, StreamPurpose::Repair);
  double sum = 0.0;
  const int m = 1000000;
  for (int i = 0; i < m; ++i) sum += hazard::repair_time_sample(law, u.uniform());
  const double mean = sum / m, expected = law.alpha * std::tgamma(1.0 + 1.0 / law.beta);
  const double rel = std::abs(mean - expected) / expected;
  return {freq_ok && rel < 0.01, "failure freq " + fmt(freq) + " vs F(r) " + fmt(p) + " (2 SE " + fmt(2 * se, 3) +
                                     "); Weibull mean " + fmt(mean) + " vs " + fmt(expected) + " (rel " + fmt(rel, 3) +
                                     ")"};
}

Verdict solver_correctness(const Env&) {
  std::mt19937_64 gen(314159);
  std::uniform_real_distribution<double> ua(-3, 5), uc(0.1, 4), ux(0, 2);
  std::uniform_int_distribution<int> um(2, 6), un(4, 12);
  int lp_bad = 0, lp_checked = 0;
  double lp_worst = 0.0;
  std::vector<Model> models;
  for (int inst = 0; inst < 80; ++inst) {
    const int n = un(gen), m = std::min(um(gen), n - 1);
    std::vector<std::vector<double>> a(m, std::vector<double>(n));
    for (auto& row : a)
      for (auto& v : row) v = std::round(ua(gen) * 4) / 4;
    std::vector<double> x0(n), c(n), b(m, 0.0);
    for (auto& v : x0) v = ux(gen) < 0.6 ? 0.0 : ux(gen);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) b[i] += a[i][j] * x0[j];
    for (auto& v : c) v = uc(gen);
    const double expected = oracle::vertex_enumeration(a, b, c);
    if (!std::isfinite(expected)) continue;
    ModelBuilder mb;
    for (int j = 0; j < n; ++j) mb.add_col("x" + std::to_string(j), 0, kInf, c[j]);
    for (int i = 0; i < m; ++i) {
      std::vector<std::pair<int, double>> e;
      for (int j = 0; j < n; ++j) e.emplace_back(j, a[i][j]);
      mb.add_row("r" + std::to_string(i), b[i], b[i], e);
    }
    models.push_back(mb.build());
    const auto r = solver::solve_lp(models.back());
    ++lp_checked;
    const double err = r.status == Status::Optimal ? std::abs(r.objective - expected) / std::max(1.0, std::abs(expected))
                                                   : INFINITY;
    lp_worst = std::max(lp_worst, err);
    if (err > 1e-6) ++lp_bad;
  }

  std::uniform_int_distribution<int> w(1, 20), v(1, 30);
  int knap_bad = 0;
  for (int inst = 0; inst < 50; ++inst) {
    std::vector<int> wt(5), val(5);
    for (int k = 0; k < 5; ++k) wt[k] = w(gen), val[k] = v(gen);
    const int cap = std::accumulate(wt.begin(), wt.end(), 0) / 2;
    int best = 0;
    for (int mask = 0; mask < 32; ++mask) {
      int ww = 0, vv = 0;
      for (int k = 0; k < 5; ++k)
        if (mask >> k & 1) ww += wt[k], vv += val[k];
      if (ww <= cap) best = std::max(best, vv);
    }
    ModelBuilder mb;
    std::vector<std::pair<int, double>> e;
    for (int k = 0; k < 5; ++k) e.emplace_back(mb.add_col("y" + std::to_string(k), 0, 1, -val[k], true), wt[k]);
    mb.add_row("cap", -kInf, cap, e);
    models.push_back(mb.build());
    const auto r = solver::solve_milp(models.back(), tight());
    if (r.status != Status::Optimal || -r.objective != best) ++knap_bad;
  }

  int resolve_bad = 0;
  for (const auto& m : models) {
    const bool mip = std::any_of(m.is_integer.begin(), m.is_integer.end(), [](auto f) { return f != 0; });
    const auto a = mip ? solver::solve_milp(m, tight()) : solver::solve_lp(m);
    const auto b = mip ? solver::solve_milp(m, tight()) : solver::solve_lp(m);
    if (a.status != b.status || a.values != b.values || a.objective != b.objective) ++resolve_bad;
  }
  const bool ok = lp_bad == 0 && lp_checked >= 40 && knap_bad == 0 && resolve_bad == 0;
  return {ok, std::to_string(lp_checked) + " LPs (max rel err " + fmt(lp_worst, 3) + ", " + std::to_string(lp_bad) +
                  " bad), 50 knapsacks (" + std::to_string(knap_bad) + " bad), " + std::to_string(models.size()) +
                  " re-solves (" + std::to_string(resolve_bad) + " differ)"};
}

Verdict planning_oracle(const Env&) {
  const auto net = grid::load_network(kData + "/toy3.json");
  const scenario::Window win{12, 7, 12, 1.0};
  const auto set = sampled(net, win, 4, 42);
  const auto h = horizon_of(win, 4);
  const auto p = milp::build_extensive(net, set, h, {}, {});
  const auto r = solver::solve_milp(p.model, tight());
  if (r.status != Status::Optimal) return {false, std::string("extensive form status ") + solver::to_string(r.status)};
  double best = INFINITY;
  int feasible = 0;
  for (int mask = 0; mask < 8; ++mask) {
    auto q = milp::build_extensive(net, set, h, {}, {});
    const std::vector<double> v{double(mask & 1), double((mask >> 1) & 1), double((mask >> 2) & 1)};
    milp::fix_first_stage(q, v);
    const auto lp = solver::solve_lp(q.model);
    if (lp.status == Status::Optimal) best = std::min(best, lp.objective), ++feasible;
  }
  const double rel = std::abs(r.objective - best) / std::max(1.0, std::abs(best));
  return {rel <= 1e-6, "MILP " + fmt(r.objective, 12) + " vs enumeration " + fmt(best, 12) + " over " +
                           std::to_string(feasible) + "/8 feasible vectors (rel " + fmt(rel, 3) + ")"};
}

Verdict pha_vs_extensive(const Env& env) {
  const auto net = six_bus();
  const scenario::Window win{12, 7, 12, 1.0};
  const auto set = sampled(net, win, 3, 42);
  const auto h = horizon_of(win, 4);
  const auto p = milp::build_extensive(net, set, h, {}, {});
  const auto r = solver::solve_milp(p.model, tight());
  if (r.status != Status::Optimal) return {false, std::string("extensive form status ") + solver::to_string(r.status)};
  pha::PhaConfig cfg;
  cfg.threads = env.threads;
  const auto out = pha::run(net, set, h, {}, {}, cfg);
  if (!out.evaluation.feasible) return {false, std::string("consensus infeasible; ") + pha::to_string(out.termination)};
  const double cons = out.evaluation.expected.total;
  const double rel = (cons - r.objective) / std::abs(r.objective);
  const bool converged = out.termination == pha::Termination::Converged;
  bool monotone = true;
  const std::size_t n = out.residuals.size();
  for (std::size_t i = n > 5 ? n - 5 : 1; i < n; ++i)
    if (out.residuals[i] > out.residuals[i - 1] * (1 + 1e-12)) monotone = false;
  return {std::abs(rel) <= 0.02 && (monotone || !converged),
          std::string(pha::to_string(out.termination)) + " after " + std::to_string(out.iterations) +
              " iterations; consensus " + fmt(cons, 10) + " vs extensive " + fmt(r.objective, 10) + " (rel " +
              fmt(rel, 3) + "); last-5 residuals non-increasing " + (monotone ? "yes" : "no")};
}

// Recomputes the operating constraints of a decoded optimum from the raw data.
struct MechanicsReport {
  double balance = 0, soc_bound = 0, simultaneous = 0, dead_flow = 0, soc_recursion = 0;
  double worst() const { return std::max({balance, soc_bound, simultaneous, dead_flow, soc_recursion}); }
};

MechanicsReport check_mechanics(const grid::Network& net, const scenario::ScenarioSet& set,
                                const predictive::Horizon& h, const milp::PlanSolution& d) {
  MechanicsReport rep;
  const double base = net.base_mva, dt = h.step_hours;
  for (std::size_t s = 0; s < d.schedules.size(); ++s) {
    const auto& sch = d.schedules[s];
    const auto& sc = set.scenarios[s];
    for (int t = 1; t <= h.total; ++t) {
      const int t0 = t - 1;
      const bool storm = !h.is_normal(t);
      const int k = t - h.storm_start;
      std::vector<double> net_in(net.buses.size(), 0.0);
      for (std::size_t g = 0; g < net.generators.size(); ++g)
        net_in[net.bus_index(net.generators[g].bus)] += sch.pg[t0][g];
      for (std::size_t w = 0; w < net.wind_farms.size(); ++w) {
        const double avail = storm ? sc.damage.gamma[w][k] : 1.0;
        net_in[net.bus_index(net.wind_farms[w].bus)] += avail * sc.wind[w][t0] - sch.curtail[t0][w];
      }
      for (std::size_t c = 0; c < net.corridors.size(); ++c) {
        const auto& cor = net.corridors[c];
        net_in[net.bus_index(cor.from_bus)] -= sch.flow[t0][c];
        net_in[net.bus_index(cor.to_bus)] += sch.flow[t0][c];
        if (storm) {
          const int mu = d.x[c] ? sc.damage.phi_w[c][k] : sc.damage.phi_o[c][k];
          if (mu) rep.dead_flow = std::max(rep.dead_flow, std::abs(sch.flow[t0][c]) / base);
        }
      }
      for (std::size_t i = 0; i < net.storage_sites.size(); ++i) {
        const auto& site = net.storage_sites[i];
        const double ch = sch.charge[t0][i], dis = sch.discharge[t0][i], soc = sch.soc[t0][i];
        net_in[net.bus_index(site.bus)] += dis - ch;
        rep.soc_bound = std::max({rep.soc_bound, -soc / base, (soc - d.z_mwh[i]) / base});
        rep.simultaneous = std::max(rep.simultaneous, std::min(ch, dis) / base);
        const double prev = t > 1 ? sch.soc[t0 - 1][i] : 0.0;
        const double next = prev + site.eta_charge * ch * dt - dis * dt / site.eta_discharge;
        rep.soc_recursion = std::max(rep.soc_recursion, std::abs(soc - next) / base);
      }
      for (std::size_t b = 0; b < net.buses.size(); ++b)
        rep.balance =
            std::max(rep.balance, std::abs(net_in[b] + sch.shed[t0][b] - sc.load[b][t0]) / base);
    }
  }
  return rep;
}

Verdict feasibility_mechanics(const Env&) {
  struct Case {
    std::string file;
    int count, xi;
    std::uint64_t seed;
  };
  const std::vector<Case> cases{{"six_bus.json", 3, 4, 42}, {"six_bus.json", 3, 0, 7}, {"hazard_heavy.json", 4, 6, 42},
                                {"toy3.json", 4, 2, 42}};
  std::ostringstream why;
  bool ok = true;
  double worst_soc = 0.0;
  int checked = 0;
  for (const auto& c : cases) {
    const auto net = grid::load_network(kData + "/" + c.file);
    const scenario::Window win{12, 7, 12, 1.0};
    const auto set = sampled(net, win, c.count, c.seed);
    const auto h = horizon_of(win, c.xi);
    const auto p = milp::build_extensive(net, set, h, {}, {});
    const auto r = solver::solve_milp(p.model, tight());
    if (r.status != Status::Optimal) {
      ok = false;
      why << " " << c.file << " " << solver::to_string(r.status) << ";";
      continue;
    }
    const auto d = milp::decode_solution(p, r.values);
    const auto rep = check_mechanics(net, set, h, d);
    ++checked;
    worst_soc = std::max(worst_soc, rep.soc_recursion);
    const bool good = rep.balance <= 1e-6 && rep.soc_bound <= 1e-6 && rep.simultaneous <= 1e-6 &&
                      rep.dead_flow <= 1e-6 && rep.soc_recursion <= 1e-9;
    if (!good) {
      ok = false;
      why << " " << c.file << " xi " << c.xi << ": balance " << rep.balance << " soc " << rep.soc_bound << " simul "
          << rep.simultaneous << " flow " << rep.dead_flow << " recursion " << rep.soc_recursion << ";";
    }
  }
  return {ok, std::to_string(checked) + " optima checked, max SOC recursion residual " + fmt(worst_soc, 3) + " pu" +
                  why.str()};
}

// Larger xi only adds options, so the optimum can only fall.
Verdict xi_monotone(const Env&) {
  std::string trace;
  bool ok = true, moved = false;
  for (const std::string name : {"six_bus", "hazard_heavy"}) {
    const auto cfg = cli::load_run_config(kData + "/configs/" + name + ".json");
    const auto net = grid::load_network(cfg.network);
    const auto set = scenario::generate_set(net, cfg.scenario, cfg.seed, cfg.count);
    const auto& win = set.window;
    milp::Costs costs;
    costs.penalty.b = 0.0;
    std::vector<double> obj, slack;
    trace += " " + name + ":";
    for (int xi : {0, 2, 4, 6}) {
      const auto p = milp::build_extensive(net, set, horizon_of(win, xi), costs, {});
      auto o = tight();
      o.relative_mip_gap = 1e-6;
      const auto r = solver::solve_milp(p.model, o);
      if (r.status != Status::Optimal) return {false, name + " xi " + std::to_string(xi) + ": " + solver::to_string(r.status)};
      obj.push_back(r.objective);
      slack.push_back(std::max(0.0, r.objective - r.best_bound));
      trace += " " + fmt(r.objective, 10);
    }
    for (std::size_t i = 1; i < obj.size(); ++i)
      if (obj[i] > obj[i - 1] + slack[i] + 1e-9 * std::abs(obj[i - 1])) ok = false;
    if (obj.back() < obj.front() - 1e-6 * std::abs(obj.front())) moved = true;
  }
  return {ok && moved, "total cost at xi 0,2,4,6 (b = 0)" + trace};
}

Verdict hazard_heavy_trend(const Env& env) {
  const auto cfg = cli::load_run_config(kData + "/configs/hazard_heavy.json");
  const auto net = grid::load_network(cfg.network);
  const auto set = scenario::generate_set(net, cfg.scenario, cfg.seed, cfg.count, env.threads);
  report::PlanInputs in;
  in.net = &net;
  in.scenarios = &set;
  in.costs = cfg.costs;
  in.budgets = cfg.budgets;
  in.solve = cfg.solve;
  in.solve.relative_mip_gap = 1e-6;
  const auto rows = report::sweep_xi(in, {0, 2, 4, 6});
  std::string trace;
  bool ok = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    trace += " xi " + fmt(r.xi) + ": prev " + fmt(r.preventive_shed_mwh) + " emer " + fmt(r.emergency_shed_mwh) + ";";
    if (!r.feasible) ok = false;
    if (i == 0) continue;
    const double tol = 1e-6 * std::max(1.0, r.total_cost) / milp::Costs{}.shed_emergency;
    if (r.preventive_shed_mwh + tol < rows[i - 1].preventive_shed_mwh) ok = false;
    if (r.emergency_shed_mwh > rows[i - 1].emergency_shed_mwh + tol) ok = false;
  }
  const bool nontrivial = rows.size() == 4 && rows.back().preventive_shed_mwh > rows.front().preventive_shed_mwh &&
                          rows.back().emergency_shed_mwh < rows.front().emergency_shed_mwh;
  return {ok && nontrivial, trace};
}

int run_cli(const Env& env, const std::string& args, const std::string& log) {
  const std::string cmd = "\"" + env.cli + "\" " + args + " > \"" + log + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
#ifdef WEXITSTATUS
  return WEXITSTATUS(rc);
#else
  return rc;
#endif
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char ch = line[i];
      if (quoted) {
        if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') cell += '"', ++i;
        else if (ch == '"') quoted = false;
        else cell += ch;
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        cells.push_back(cell), cell.clear();
      } else {
        cell += ch;
      }
    }
    cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

Verdict compare_tight(const Env& env) {
  const fs::path dir = fs::path(env.workdir) / "compare_tight";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const int rc = run_cli(env, "compare --config \"" + kData + "/configs/tight_budget.json\" --out \"" + dir.string() + "\"",
                         (dir / "log.txt").string());
  const auto rows = read_csv((dir / "strategies.csv").string());
  if (rows.empty()) return {false, "exit " + std::to_string(rc) + ", no strategies.csv"};
  const auto& head = rows.front();
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(head.begin(), head.end(), name) - head.begin());
  };
  const std::size_t id = col("strategy"), feas = col("feasible"), status = col("status");
  std::string i_state = "?", ii_state = "?", ii_status;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() <= std::max({id, feas, status})) continue;
    if (rows[r][id] == "I") i_state = rows[r][feas];
    if (rows[r][id] == "II") ii_state = rows[r][feas], ii_status = rows[r][status];
  }
  const bool ok = rc == 0 && i_state == "true" && ii_state == "false";
  return {ok, "exit " + std::to_string(rc) + "; I (xi 6) feasible=" + i_state + ", II (xi 0) feasible=" + ii_state +
                  " (" + ii_status + ")"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism(const Env& env) {
  const fs::path dir = fs::path(env.workdir) / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cfg = "--config \"" + kData + "/configs/six_bus.json\" --seed 11 --count 64";
  const std::vector<std::pair<std::string, int>> runs{{"a.json", 1}, {"b.json", 1}, {"c.json", 4}, {"d.json", 8}};
  std::vector<std::string> bodies;
  for (const auto& [name, threads] : runs) {
    const int rc = run_cli(env, "gen " + cfg + " --threads " + std::to_string(threads) + " --out \"" +
                                    (dir / name).string() + "\"",
                           (dir / (name + ".log")).string());
    if (rc != 0) return {false, "gen exited " + std::to_string(rc)};
    bodies.push_back(slurp(dir / name));
  }
  const bool ok = !bodies[0].empty() && std::all_of(bodies.begin(), bodies.end(), [&](auto& b) { return b == bodies[0]; });
  return {ok, std::to_string(runs.size()) + " runs (threads 1, 1, 4, 8), " + std::to_string(bodies[0].size()) +
                  " bytes each, identical " + (ok ? "yes" : "no")};
}

Verdict mps_round_trip(const Env& env) {
  const auto net = six_bus();
  const scenario::Window win{12, 7, 12, 1.0};
  const auto p = milp::build_extensive(net, sampled(net, win, 3, 42), horizon_of(win, 4), {}, {});
  const fs::path file = fs::path(env.workdir) / "six_bus.mps";
  fs::create_directories(file.parent_path());
  milp::export_mps(p, file.string());
  const Model back = mps::read_file(file.string());
  const Model& m = p.model;
  const bool ok = back.col_start == m.col_start && back.row_index == m.row_index && back.value == m.value &&
                  back.col_lower == m.col_lower && back.col_upper == m.col_upper && back.cost == m.cost &&
                  back.row_lower == m.row_lower && back.row_upper == m.row_upper && back.is_integer == m.is_integer &&
                  back.objective_offset == m.objective_offset;
  const long ints = std::count(m.is_integer.begin(), m.is_integer.end(), 1);
  return {ok, std::to_string(m.num_cols()) + " columns (" + std::to_string(ints) + " integer), " +
                  std::to_string(m.num_rows()) + " rows, " + std::to_string(m.num_nonzeros()) + " nonzeros, exact " +
                  (ok ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("icegrid acceptance criteria");
  Env env;
  env.workdir = "acceptance_out";
  env.threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<int> only;
  app.add_option("--workdir", env.workdir, "Scratch directory for CLI runs");
  app.add_option("--cli", env.cli, "Path to the icegrid executable")->required();
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    int id;
    const char* name;
    double budget_s;  // runtime limit, 0 = none
    std::function<Verdict(const Env&)> fn;
  };
  const std::vector<Criterion> criteria{
      {1, "fragility math", 1, fragility},
      {2, "hardening dominance", 30, dominance},
      {3, "sampling calibration", 0, calibration},
      {4, "solver correctness", 0, solver_correctness},
      {5, "planning oracle equivalence", 60, planning_oracle},
      {6, "PHA vs extensive form", 300, pha_vs_extensive},
      {7, "feasibility mechanics", 0, feasibility_mechanics},
      {8, "monotonicity in xi", 0, xi_monotone},
      {9, "hazard-heavy shedding trend", 0, hazard_heavy_trend},
      {10, "tight-budget infeasibility via compare", 0, compare_tight},
      {11, "gen determinism", 0, determinism},
      {12, "MPS round trip", 0, mps_round_trip},
  };
  fs::create_directories(env.workdir);
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.fn(env);
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      v.pass = false;
      v.detail += "; over the " + fmt(c.budget_s) + " s limit";
    }
    if (!v.pass) ++failed;
    std::printf("%s %2d %s (%.2f s): %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, secs, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
