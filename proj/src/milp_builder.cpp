#include "icegrid/milp_builder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "icegrid/mps.hpp"

namespace icegrid::milp {

double capital_recovery_factor(double rate, int years) {
  if (years <= 0) throw std::invalid_argument("lifetime must be positive");
  if (rate == 0.0) return 1.0 / years;
  const double g = std::pow(1.0 + rate, years);
  return rate * g / (g - 1.0);
}

double storage_cost_per_mwh(const grid::StorageSite& site, const Costs& costs) {
  // $/kWh and $/kW -> $/MWh of energy capacity, power rating derived as Z / rho
  const double capital = site.energy_cost_per_kwh * 1000.0 + site.power_cost_per_kw * 1000.0 / site.ep_ratio_hours;
  return capital * capital_recovery_factor(costs.discount_rate, costs.lifetime_years) / costs.days_per_year;
}

std::vector<int> VariableIndex::first_stage() const {
  std::vector<int> v;
  for (int k = 0; k < x.size(); ++k) v.push_back(x.first + k);
  for (int k = 0; k < z.size(); ++k) v.push_back(z.first + k);
  return v;
}

namespace {

std::string tag(const char* sym, int s, int t, int k) {
  return std::string(sym) + "[s" + std::to_string(s) + ",t" + std::to_string(t) + "," + std::to_string(k) + "]";
}

ScenarioData scenario_data(const scenario::Scenario& sc) {
  return {sc.id, sc.probability, sc.load, sc.wind, sc.damage};
}

void check_inputs(const grid::Network& net, const scenario::ScenarioSet& set, const predictive::Horizon& h) {
  if (net.power_unit != 1.0) throw std::invalid_argument("network must be in MW units");
  const auto problems = grid::validate(net);
  if (!problems.empty()) throw std::invalid_argument("invalid network: " + problems.front());
  if (set.scenarios.empty()) throw std::invalid_argument("scenario set is empty");
  const auto& w = set.window;
  if (w.total != h.total || w.storm_start != h.storm_start || w.storm_end != h.storm_end ||
      w.step_hours != h.step_hours)
    throw std::invalid_argument("horizon does not match the scenario window");
  const int te = h.storm_steps();
  for (const auto& sc : set.scenarios) {
    const auto& d = sc.damage;
    if (sc.load.size() != net.buses.size() || d.phi_o.size() != net.corridors.size() ||
        d.phi_w.size() != net.corridors.size() || d.gamma.size() != net.wind_farms.size() ||
        sc.wind.size() != net.wind_farms.size())
      throw std::invalid_argument("scenario " + std::to_string(sc.id) + " does not match the network");
    for (const auto& l : sc.load)
      if (static_cast<int>(l.size()) < h.total)
        throw std::invalid_argument("scenario " + std::to_string(sc.id) + " is missing load profile data");
    for (const auto& l : sc.wind)
      if (static_cast<int>(l.size()) < h.total)
        throw std::invalid_argument("scenario " + std::to_string(sc.id) + " is missing wind profile data");
    for (std::size_t c = 0; c < d.phi_o.size(); ++c)
      if (static_cast<int>(d.phi_o[c].size()) != te || static_cast<int>(d.phi_w[c].size()) != te)
        throw std::invalid_argument("damage series length differs from the storm window");
    for (const auto& g : d.gamma)
      if (static_cast<int>(g.size()) != te) throw std::invalid_argument("wind availability length differs from the storm window");
  }
}

class Assembler {
 public:
  Assembler(const BuildContext& ctx, ModelBuilder& mb) : ctx_(ctx), mb_(mb), base_(ctx.net.base_mva) {
    const auto& net = ctx.net;
    ref_bus_ = 0;
    for (std::size_t b = 1; b < net.buses.size(); ++b)
      if (net.buses[b].id < net.buses[ref_bus_].id) ref_bus_ = static_cast<int>(b);
    const auto nb = net.buses.size();
    gens_at_.resize(nb);
    winds_at_.resize(nb);
    sites_at_.resize(nb);
    for (std::size_t g = 0; g < net.generators.size(); ++g) gens_at_[net.bus_index(net.generators[g].bus)].push_back(g);
    for (std::size_t w = 0; w < net.wind_farms.size(); ++w) winds_at_[net.bus_index(net.wind_farms[w].bus)].push_back(w);
    for (std::size_t i = 0; i < net.storage_sites.size(); ++i)
      sites_at_[net.bus_index(net.storage_sites[i].bus)].push_back(i);
    for (std::size_t c = 0; c < net.corridors.size(); ++c) {
      from_.push_back(static_cast<int>(net.bus_index(net.corridors[c].from_bus)));
      to_.push_back(static_cast<int>(net.bus_index(net.corridors[c].to_bus)));
    }
  }

  void first_stage(VariableIndex& idx) {
    const auto& net = ctx_.net;
    idx.x = {mb_.num_cols(), 1, static_cast<int>(net.corridors.size())};
    std::vector<std::pair<int, double>> line_budget, storage_budget;
    for (const auto& c : net.corridors) {
      const int col = mb_.add_col("x[" + std::to_string(c.id) + "]", 0, 1, c.hardening_cost, true);
      line_budget.emplace_back(col, c.hardening_cost);
    }
    idx.z = {mb_.num_cols(), 1, static_cast<int>(net.storage_sites.size())};
    for (const auto& site : net.storage_sites) {
      const double cb = storage_cost_per_mwh(site, ctx_.costs) * base_;
      const int col = mb_.add_col("Z[" + std::to_string(site.bus) + "]", 0, site.z_max / base_, cb);
      storage_budget.emplace_back(col, cb);
    }
    if (std::isfinite(ctx_.budgets.lines) && !line_budget.empty())
      mb_.add_row("budget_lines", -kInf, ctx_.budgets.lines, line_budget);
    if (std::isfinite(ctx_.budgets.storage) && !storage_budget.empty())
      mb_.add_row("budget_storage", -kInf, ctx_.budgets.storage, storage_budget);
  }

  ScenarioColumns scenario(const ScenarioData& sc, double weight, const VariableIndex& idx) {
    const auto& net = ctx_.net;
    const auto& h = ctx_.horizon;
    const auto& costs = ctx_.costs;
    const int T = h.total;
    const int nb = static_cast<int>(net.buses.size()), nc = static_cast<int>(net.corridors.size());
    const int ng = static_cast<int>(net.generators.size()), nw = static_cast<int>(net.wind_farms.size());
    const int ns = static_cast<int>(net.storage_sites.size());
    const double dt = h.step_hours;
    const int s = sc.id;
    ScenarioColumns cols;

    const auto load_pu = [&](int b, int t) { return sc.load[b][t - 1] / base_; };
    const auto wind_pu = [&](int w, int t) {
      double avail = 1.0;
      if (!h.is_normal(t)) avail = sc.damage.gamma[w][t - h.storm_start] ? 1.0 : 0.0;
      return avail * sc.wind[w][t - 1] / base_;
    };
    const auto phase = [&](int t) { return h.phase(t); };
    const auto shed_mult = [&](int b) { return net.buses[b].is_critical ? costs.critical_factor : 1.0; };

    cols.pg = {mb_.num_cols(), T, ng};
    for (int t = 1; t <= T; ++t)
      for (int g = 0; g < ng; ++g) {
        const auto& gen = net.generators[g];
        const double cg = costs.gen_override >= 0 ? costs.gen_override : gen.marginal_cost;
        const double c = h.is_normal(t) ? weight * cg * base_ * dt : 0.0;
        mb_.add_col(tag("pg", s, t, g), gen.p_min / base_, gen.p_max / base_, c);
      }
    cols.flow = {mb_.num_cols(), T, nc};
    for (int t = 1; t <= T; ++t)
      for (int c = 0; c < nc; ++c) {
        const auto& cor = net.corridors[c];
        double lim = cor.capacity_pmax / base_;
        double lo = -lim, hi = lim;
        if (!h.is_normal(t)) {
          const int k = t - h.storm_start;
          if (sc.damage.phi_o[c][k] && sc.damage.phi_w[c][k]) lo = hi = 0.0;
        }
        mb_.add_col(tag("flow", s, t, cor.id), lo, hi, 0.0);
      }
    cols.theta = {mb_.num_cols(), T, nb};
    const double th = ctx_.options.theta_max;
    for (int t = 1; t <= T; ++t)
      for (int b = 0; b < nb; ++b) {
        const bool ref = b == ref_bus_;
        mb_.add_col(tag("theta", s, t, net.buses[b].id), ref ? 0.0 : -th, ref ? 0.0 : th, 0.0);
      }
    cols.shed = {mb_.num_cols(), T, nb};
    for (int t = 1; t <= T; ++t)
      for (int b = 0; b < nb; ++b) {
        double cap = 0.0, c = 0.0;
        switch (phase(t)) {
          case predictive::Phase::PreAwareness: break;
          case predictive::Phase::Preparation:
            cap = net.buses[b].alpha_shed * load_pu(b, t);
            c = predictive::penalty_at(costs.penalty, h.hours_to_storm(t)) * shed_mult(b);
            break;
          case predictive::Phase::Emergency:
            cap = net.buses[b].beta_shed * load_pu(b, t);
            c = costs.shed_emergency * shed_mult(b);
            break;
        }
        mb_.add_col(tag("shed", s, t, net.buses[b].id), 0.0, std::max(cap, 0.0), weight * c * base_ * dt);
      }
    cols.curtail = {mb_.num_cols(), T, nw};
    for (int t = 1; t <= T; ++t)
      for (int w = 0; w < nw; ++w) {
        const double c = h.is_normal(t) ? weight * costs.wind_curtail * base_ * dt : 0.0;
        mb_.add_col(tag("curtail", s, t, w), 0.0, wind_pu(w, t), c);
      }
    cols.charge = {mb_.num_cols(), T, ns};
    for (int t = 1; t <= T; ++t)
      for (int i = 0; i < ns; ++i) {
        const auto& site = net.storage_sites[i];
        mb_.add_col(tag("pch", s, t, site.bus), 0.0, site.z_max / base_ / site.ep_ratio_hours, 0.0);
      }
    cols.discharge = {mb_.num_cols(), T, ns};
    for (int t = 1; t <= T; ++t)
      for (int i = 0; i < ns; ++i) {
        const auto& site = net.storage_sites[i];
        const double c = h.is_normal(t) ? weight * costs.discharge * base_ * dt : 0.0;
        mb_.add_col(tag("pdis", s, t, site.bus), 0.0, site.z_max / base_ / site.ep_ratio_hours, c);
      }
    cols.soc = {mb_.num_cols(), T, ns};
    for (int t = 1; t <= T; ++t)
      for (int i = 0; i < ns; ++i) mb_.add_col(tag("soc", s, t, net.storage_sites[i].bus), 0.0, net.storage_sites[i].z_max / base_, 0.0);

    const int normal_steps = h.storm_start - 1;
    const int te = h.storm_steps();
    const int normal_mode_rows = ns == 0 ? 0 : (ctx_.options.per_step_modes ? normal_steps : (normal_steps > 0 ? 1 : 0));
    cols.mode_ch_n = {mb_.num_cols(), normal_mode_rows, ns};
    for (int r = 0; r < normal_mode_rows; ++r)
      for (int i = 0; i < ns; ++i) mb_.add_col(tag("mch_n", s, r + 1, net.storage_sites[i].bus), 0, 1, 0, true);
    cols.mode_dis_n = {mb_.num_cols(), normal_mode_rows, ns};
    for (int r = 0; r < normal_mode_rows; ++r)
      for (int i = 0; i < ns; ++i) mb_.add_col(tag("mdis_n", s, r + 1, net.storage_sites[i].bus), 0, 1, 0, true);
    cols.mode_ch_e = {mb_.num_cols(), ns ? te : 0, ns};
    for (int r = 0; r < cols.mode_ch_e.rows; ++r)
      for (int i = 0; i < ns; ++i) mb_.add_col(tag("mch_e", s, h.storm_start + r, net.storage_sites[i].bus), 0, 1, 0, true);
    cols.mode_dis_e = {mb_.num_cols(), ns ? te : 0, ns};
    for (int r = 0; r < cols.mode_dis_e.rows; ++r)
      for (int i = 0; i < ns; ++i) mb_.add_col(tag("mdis_e", s, h.storm_start + r, net.storage_sites[i].bus), 0, 1, 0, true);

    const auto mode_cols = [&](int t, int i) -> std::pair<int, int> {
      if (h.is_normal(t)) {
        const int r = ctx_.options.per_step_modes ? t - 1 : 0;
        return {cols.mode_ch_n(r, i), cols.mode_dis_n(r, i)};
      }
      const int r = t - h.storm_start;
      return {cols.mode_ch_e(r, i), cols.mode_dis_e(r, i)};
    };

    for (int t = 1; t <= T; ++t) {
      const int t0 = t - 1;
      // bus balance: generation + inflow - outflow + shed - curtail - charge + discharge = load - wind
      for (int b = 0; b < nb; ++b) {
        std::vector<std::pair<int, double>> e;
        double rhs = load_pu(b, t);
        for (auto g : gens_at_[b]) e.emplace_back(cols.pg(t0, g), 1.0);
        for (int c = 0; c < nc; ++c) {
          if (from_[c] == b) e.emplace_back(cols.flow(t0, c), -1.0);
          if (to_[c] == b) e.emplace_back(cols.flow(t0, c), 1.0);
        }
        e.emplace_back(cols.shed(t0, b), 1.0);
        for (auto w : winds_at_[b]) {
          rhs -= wind_pu(w, t);
          e.emplace_back(cols.curtail(t0, w), -1.0);
        }
        for (auto i : sites_at_[b]) {
          e.emplace_back(cols.charge(t0, i), -1.0);
          e.emplace_back(cols.discharge(t0, i), 1.0);
        }
        mb_.add_row(tag("balance", s, t, net.buses[b].id), rhs, rhs, std::move(e));
      }
      // flows
      for (int c = 0; c < nc; ++c) {
        const auto& cor = net.corridors[c];
        const int f = cols.flow(t0, c), ti = cols.theta(t0, from_[c]), tj = cols.theta(t0, to_[c]);
        const double B = cor.susceptance_b;
        int po = 0, pw = 0;
        if (!h.is_normal(t)) {
          po = sc.damage.phi_o[c][t - h.storm_start];
          pw = sc.damage.phi_w[c][t - h.storm_start];
        }
        if (po == 0 && pw == 0) {
          mb_.add_row(tag("flowdef", s, t, cor.id), 0, 0, {{f, 1.0}, {ti, -B}, {tj, B}});
          continue;
        }
        if (po == 1 && pw == 1) continue;
        // mu = po + a x, a = pw - po
        const double a = pw - po;
        const int x = idx.x(0, c);
        const double pmax = cor.capacity_pmax / base_;
        const double M = std::abs(B) * 2.0 * ctx_.options.theta_max;
        mb_.add_row(tag("flowcap_hi", s, t, cor.id), -kInf, pmax * (1 - po), {{f, 1.0}, {x, pmax * a}});
        mb_.add_row(tag("flowcap_lo", s, t, cor.id), -pmax * (1 - po), kInf, {{f, 1.0}, {x, -pmax * a}});
        mb_.add_row(tag("flowdef_hi", s, t, cor.id), -kInf, M * po, {{f, 1.0}, {ti, -B}, {tj, B}, {x, -M * a}});
        mb_.add_row(tag("flowdef_lo", s, t, cor.id), -M * po, kInf, {{f, 1.0}, {ti, -B}, {tj, B}, {x, M * a}});
      }
      // storage
      for (int i = 0; i < ns; ++i) {
        const auto& site = net.storage_sites[i];
        const int bus = site.bus;
        const int z = idx.z(0, i);
        const int ch = cols.charge(t0, i), dis = cols.discharge(t0, i), soc = cols.soc(t0, i);
        std::vector<std::pair<int, double>> dyn{{soc, 1.0}, {ch, -site.eta_charge * dt}, {dis, dt / site.eta_discharge}};
        if (t > 1) dyn.emplace_back(cols.soc(t0 - 1, i), -1.0);
        mb_.add_row(tag("soc_dyn", s, t, bus), 0, 0, std::move(dyn));
        mb_.add_row(tag("soc_cap", s, t, bus), -kInf, 0, {{soc, 1.0}, {z, -1.0}});
        mb_.add_row(tag("pch_cap", s, t, bus), -kInf, 0, {{ch, 1.0}, {z, -1.0 / site.ep_ratio_hours}});
        mb_.add_row(tag("pdis_cap", s, t, bus), -kInf, 0, {{dis, 1.0}, {z, -1.0 / site.ep_ratio_hours}});
        const double pm = site.z_max / base_ / site.ep_ratio_hours;
        const auto [mch, mdis] = mode_cols(t, i);
        mb_.add_row(tag("pch_mode", s, t, bus), -kInf, 0, {{ch, 1.0}, {mch, -pm}});
        mb_.add_row(tag("pdis_mode", s, t, bus), -kInf, 0, {{dis, 1.0}, {mdis, -pm}});
      }
    }
    for (const Block* blk : {&cols.mode_ch_n, &cols.mode_ch_e}) {
      const Block& other = blk == &cols.mode_ch_n ? cols.mode_dis_n : cols.mode_dis_e;
      for (int r = 0; r < blk->rows; ++r)
        for (int i = 0; i < ns; ++i)
          mb_.add_row(tag(blk == &cols.mode_ch_n ? "mode_n" : "mode_e", s, r + 1, net.storage_sites[i].bus), -kInf, 1,
                      {{(*blk)(r, i), 1.0}, {other(r, i), 1.0}});
    }
    return cols;
  }

 private:
  const BuildContext& ctx_;
  ModelBuilder& mb_;
  double base_;
  int ref_bus_ = 0;
  std::vector<std::vector<std::size_t>> gens_at_, winds_at_, sites_at_;
  std::vector<int> from_, to_;
};

std::shared_ptr<BuildContext> make_context(const grid::Network& net, const predictive::Horizon& horizon,
                                           const Costs& costs, const Budgets& budgets, const BuildOptions& options) {
  auto ctx = std::make_shared<BuildContext>();
  ctx->net = net;
  ctx->horizon = horizon;
  ctx->costs = costs;
  ctx->budgets = budgets;
  ctx->options = options;
  return ctx;
}

}  // namespace

MilpProblem build_extensive(const grid::Network& net, const scenario::ScenarioSet& set,
                            const predictive::Horizon& horizon, const Costs& costs, const Budgets& budgets,
                            const BuildOptions& options) {
  check_inputs(net, set, horizon);
  auto ctx = make_context(net, horizon, costs, budgets, options);
  for (const auto& sc : set.scenarios) ctx->scenarios.push_back(scenario_data(sc));
  double psum = 0.0;
  for (const auto& sc : ctx->scenarios) psum += sc.probability;
  if (!(psum > 0)) throw std::invalid_argument("scenario probabilities must be positive");
  for (auto& sc : ctx->scenarios) sc.probability /= psum;

  ModelBuilder mb;
  MilpProblem p;
  Assembler as(*ctx, mb);
  as.first_stage(p.index);
  for (const auto& sc : ctx->scenarios) p.index.scenarios.push_back(as.scenario(sc, sc.probability, p.index));
  p.model = mb.build();
  p.power_unit = net.base_mva;
  p.context = std::move(ctx);
  return p;
}

MilpProblem build_subproblem(const grid::Network& net, const scenario::ScenarioSet& set, std::size_t scenario_pos,
                             const predictive::Horizon& horizon, const Costs& costs, const Budgets& budgets,
                             std::span<const double> w, std::span<const double> v_hat, std::span<const double> rho,
                             const BuildOptions& options) {
  check_inputs(net, set, horizon);
  if (scenario_pos >= set.scenarios.size()) throw std::out_of_range("scenario position out of range");
  const std::size_t nv = net.corridors.size() + net.storage_sites.size();
  if (w.size() != nv || v_hat.size() != nv || rho.size() != nv)
    throw std::invalid_argument("multiplier, anchor and rho must match the first-stage dimension");
  auto ctx = make_context(net, horizon, costs, budgets, options);
  ctx->scenarios.push_back(scenario_data(set.scenarios[scenario_pos]));
  double psum = 0.0;
  for (const auto& sc : set.scenarios) psum += sc.probability;
  ctx->scenarios.back().probability /= psum;

  ModelBuilder mb;
  MilpProblem p;
  p.is_subproblem = true;
  p.proximal = {{w.begin(), w.end()}, {v_hat.begin(), v_hat.end()}, {rho.begin(), rho.end()}};
  Assembler as(*ctx, mb);
  as.first_stage(p.index);
  p.index.scenarios.push_back(as.scenario(ctx->scenarios.back(), 1.0, p.index));

  const auto v = p.index.first_stage();
  const int nx = p.index.x.size();
  const int nz = p.index.z.size();
  p.index.dev_pos = {mb.num_cols(), 1, nz};
  for (int i = 0; i < nz; ++i) mb.add_col("dev_pos[" + std::to_string(i) + "]", 0, kInf, rho[nx + i] / 2);
  p.index.dev_neg = {mb.num_cols(), 1, nz};
  for (int i = 0; i < nz; ++i) mb.add_col("dev_neg[" + std::to_string(i) + "]", 0, kInf, rho[nx + i] / 2);
  for (std::size_t j = 0; j < v.size(); ++j) {
    mb.add_cost(v[j], w[j]);
    if (static_cast<int>(j) < nx) {
      // v^2 = v for binaries: rho/2 (v - v_hat)^2 = rho/2 (1 - 2 v_hat) v + rho/2 v_hat^2
      mb.add_cost(v[j], rho[j] / 2 * (1 - 2 * v_hat[j]));
      mb.add_offset(rho[j] / 2 * v_hat[j] * v_hat[j]);
    } else {
      const int i = static_cast<int>(j) - nx;
      mb.add_row("prox[" + std::to_string(i) + "]", v_hat[j], v_hat[j],
                 {{v[j], 1.0}, {p.index.dev_pos(0, i), -1.0}, {p.index.dev_neg(0, i), 1.0}});
    }
  }
  p.model = mb.build();
  p.power_unit = net.base_mva;
  p.context = std::move(ctx);
  return p;
}

void fix_first_stage(MilpProblem& problem, std::span<const double> v) {
  const auto cols = problem.index.first_stage();
  if (v.size() != cols.size()) throw std::invalid_argument("first-stage vector length mismatch");
  for (std::size_t j = 0; j < cols.size(); ++j) {
    double val = v[j];
    const int c = cols[j];
    val = std::clamp(val, problem.model.col_lower[c], problem.model.col_upper[c]);
    problem.model.col_lower[c] = problem.model.col_upper[c] = val;
  }
}

std::vector<double> default_rho(const MilpProblem& problem) {
  const auto& net = problem.context->net;
  std::vector<double> rho;
  for (const auto& c : net.corridors) rho.push_back(std::abs(c.hardening_cost));
  for (const auto& site : net.storage_sites) {
    const double c = storage_cost_per_mwh(site, problem.context->costs) * net.base_mva;
    rho.push_back(std::abs(c) / std::max(1.0, site.z_max / net.base_mva));
  }
  return rho;
}

PlanSolution decode_solution(const MilpProblem& problem, std::span<const double> values) {
  const Model& m = problem.model;
  if (static_cast<int>(values.size()) != m.num_cols())
    throw std::invalid_argument("solution has " + std::to_string(values.size()) + " values, model has " +
                                std::to_string(m.num_cols()) + " columns");
  std::vector<double> v(values.begin(), values.end());
  for (int j = 0; j < m.num_cols(); ++j)
    if (m.is_integer[j]) {
      if (std::abs(v[j] - std::round(v[j])) > 1e-6)
        throw std::invalid_argument("integer column " + m.col_names[j] + " has fractional value " + std::to_string(v[j]));
      v[j] = std::round(v[j]);
    }

  const BuildContext& ctx = *problem.context;
  const auto& net = ctx.net;
  const auto& h = ctx.horizon;
  const auto& costs = ctx.costs;
  const double base = net.base_mva;
  const double dt = h.step_hours;
  const auto& idx = problem.index;

  PlanSolution out;
  for (int c = 0; c < idx.x.size(); ++c) {
    out.x.push_back(static_cast<int>(v[idx.x(0, c)]));
    out.hardening_cost += net.corridors[c].hardening_cost * v[idx.x(0, c)];
  }
  for (int i = 0; i < idx.z.size(); ++i) {
    const double z = v[idx.z(0, i)] * base;
    out.z_mwh.push_back(z);
    out.storage_cost += storage_cost_per_mwh(net.storage_sites[i], costs) * z;
  }
  out.investment = out.hardening_cost + out.storage_cost;

  const auto extract = [&](const Block& blk, double scale) {
    std::vector<std::vector<double>> r(blk.rows, std::vector<double>(blk.cols));
    for (int t = 0; t < blk.rows; ++t)
      for (int k = 0; k < blk.cols; ++k) r[t][k] = v[blk(t, k)] * scale;
    return r;
  };

  for (std::size_t s = 0; s < idx.scenarios.size(); ++s) {
    const auto& cols = idx.scenarios[s];
    const auto& data = ctx.scenarios[s];
    ScenarioSchedule sch;
    sch.scenario_id = data.id;
    sch.probability = data.probability;
    sch.pg = extract(cols.pg, base);
    sch.flow = extract(cols.flow, base);
    sch.theta = extract(cols.theta, 1.0);
    sch.shed = extract(cols.shed, base);
    sch.curtail = extract(cols.curtail, base);
    sch.charge = extract(cols.charge, base);
    sch.discharge = extract(cols.discharge, base);
    sch.soc = extract(cols.soc, base);
    for (int t = 1; t <= h.total; ++t) {
      const int t0 = t - 1;
      const auto ph = h.phase(t);
      if (ph == predictive::Phase::Emergency) {
        for (std::size_t b = 0; b < net.buses.size(); ++b) {
          const double mult = net.buses[b].is_critical ? costs.critical_factor : 1.0;
          sch.psi_e += costs.shed_emergency * mult * sch.shed[t0][b] * dt;
          sch.emergency_shed_mwh += sch.shed[t0][b] * dt;
        }
        continue;
      }
      for (std::size_t g = 0; g < net.generators.size(); ++g) {
        const double cg = costs.gen_override >= 0 ? costs.gen_override : net.generators[g].marginal_cost;
        sch.psi_n += cg * sch.pg[t0][g] * dt;
      }
      for (std::size_t i = 0; i < net.storage_sites.size(); ++i) sch.psi_n += costs.discharge * sch.discharge[t0][i] * dt;
      for (std::size_t w = 0; w < net.wind_farms.size(); ++w) sch.psi_n += costs.wind_curtail * sch.curtail[t0][w] * dt;
      if (ph == predictive::Phase::Preparation) {
        const double pen = predictive::penalty_at(costs.penalty, h.hours_to_storm(t));
        for (std::size_t b = 0; b < net.buses.size(); ++b) {
          const double mult = net.buses[b].is_critical ? costs.critical_factor : 1.0;
          const double c = pen * mult * sch.shed[t0][b] * dt;
          sch.psi_n += c;
          sch.preventive_shed_cost += c;
          sch.preventive_shed_mwh += sch.shed[t0][b] * dt;
        }
      }
    }
    const double p = problem.is_subproblem ? 1.0 : data.probability;
    out.psi_n += p * sch.psi_n;
    out.psi_e += p * sch.psi_e;
    out.preventive_shed_mwh += p * sch.preventive_shed_mwh;
    out.emergency_shed_mwh += p * sch.emergency_shed_mwh;
    out.schedules.push_back(std::move(sch));
  }
  out.total = out.investment + out.psi_n + out.psi_e;

  if (problem.is_subproblem) {
    const auto fs = idx.first_stage();
    const auto& px = problem.proximal;
    const int nx = idx.x.size();
    for (std::size_t j = 0; j < fs.size(); ++j) {
      const double vj = v[fs[j]];
      out.proximal_terms += px.w[j] * vj;
      if (static_cast<int>(j) < nx) out.proximal_terms += px.rho[j] / 2 * (vj - px.v_hat[j]) * (vj - px.v_hat[j]);
      else {
        const int i = static_cast<int>(j) - nx;
        out.proximal_terms += px.rho[j] / 2 * (v[idx.dev_pos(0, i)] + v[idx.dev_neg(0, i)]);
      }
    }
  }

  const double reported = m.objective(v);
  const double recomputed = out.total + out.proximal_terms;
  if (std::abs(reported - recomputed) > 1e-6 * std::max(1.0, std::abs(reported)))
    throw std::runtime_error("cost split " + std::to_string(recomputed) + " disagrees with objective " +
                             std::to_string(reported));
  return out;
}

void export_mps(const MilpProblem& problem, const std::string& path) { mps::write_file(problem.model, path); }

}  // namespace icegrid::milp
