#include "icegrid/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "text_util.hpp"

namespace icegrid::report {

using detail::num;

const char* to_string(Mode m) { return m == Mode::Pha ? "pha" : "extensive"; }

predictive::Horizon horizon_for(const scenario::ScenarioSet& set, int xi) {
  const auto& w = set.window;
  return predictive::partition_horizon(w.total, w.storm_start, w.storm_end, xi, w.step_hours);
}

PlanOutcome plan(const PlanInputs& in, int xi) {
  if (!in.net || !in.scenarios) throw std::invalid_argument("plan inputs need a network and a scenario set");
  const auto h = horizon_for(*in.scenarios, xi);
  PlanOutcome out;
  out.xi = xi;

  if (in.mode == Mode::Pha) {
    auto cfg = in.pha;
    cfg.threads = std::max(cfg.threads, in.threads);
    cfg.solver = in.solve;
    auto r = pha::run(*in.net, *in.scenarios, h, in.costs, in.budgets, cfg, in.build);
    out.status = pha::to_string(r.termination);
    out.feasible = r.termination != pha::Termination::Infeasible && r.evaluation.feasible;
    out.infeasible_scenarios = r.termination == pha::Termination::Infeasible ? r.infeasible_scenarios
                                                                            : r.evaluation.infeasible_scenarios;
    if (out.feasible) {
      out.solution = r.evaluation.expected;
      out.bound = out.solution.total;
    } else if (r.termination != pha::Termination::Infeasible) {
      out.status = "infeasible";
    }
    out.pha = std::move(r);
    return out;
  }

  const auto problem = milp::build_extensive(*in.net, *in.scenarios, h, in.costs, in.budgets, in.build);
  const auto r = in.backend ? in.backend->solve(problem.model, in.solve) : solver::solve_milp(problem.model, in.solve);
  out.status = solver::to_string(r.status);
  out.feasible = solver::has_solution(r.status);
  out.bound = r.best_bound;
  out.gap = r.gap;
  if (out.feasible) out.solution = milp::decode_solution(problem, r.values);
  return out;
}

SweepRow to_row(const PlanOutcome& o, const grid::Network& net) {
  SweepRow row;
  row.xi = o.xi;
  row.feasible = o.feasible;
  row.status = o.status;
  if (!o.feasible) return row;
  const auto& s = o.solution;
  row.preventive_shed_mwh = s.preventive_shed_mwh;
  row.emergency_shed_mwh = s.emergency_shed_mwh;
  row.preventive_cost = s.psi_n;
  row.emergency_cost = s.psi_e;
  row.total_cost = s.total;
  row.hardening_cost = s.hardening_cost;
  row.storage_cost = s.storage_cost;
  row.storage_mwh_by_bus = s.z_mwh;
  row.storage_mwh_by_bus.resize(net.storage_sites.size(), 0.0);
  return row;
}

std::vector<SweepRow> sweep_xi(const PlanInputs& in, std::vector<int> xi_values) {
  std::sort(xi_values.begin(), xi_values.end());
  xi_values.erase(std::unique(xi_values.begin(), xi_values.end()), xi_values.end());
  std::vector<SweepRow> rows;
  for (int xi : xi_values) rows.push_back(to_row(plan(in, xi), *in.net));
  for (std::size_t k = 1; k < rows.size(); ++k)
    if (rows[k].feasible && rows[k - 1].feasible)
      rows[k].marginal_preventive_cost_increment = rows[k].preventive_cost - rows[k - 1].preventive_cost;
  return rows;
}

std::vector<StrategyResult> strategy_compare(const PlanInputs& in, int xi) {
  struct Variant {
    const char* id;
    const char* description;
    PlanInputs inputs;
    int xi;
  };
  std::vector<Variant> variants;
  variants.push_back({"I", "full model", in, xi});
  variants.push_back({"II", "no preparation time (xi = 0)", in, 0});
  PlanInputs constant = in;
  constant.costs.penalty.b = 0.0;
  variants.push_back({"III", "constant preventive penalty", constant, xi});
  PlanInputs no_hardening = in;
  no_hardening.budgets.lines = 0.0;
  variants.push_back({"IV", "no line hardening", no_hardening, xi});

  std::vector<StrategyResult> out;
  for (const auto& v : variants) {
    StrategyResult r;
    r.id = v.id;
    r.description = v.description;
    const auto o = plan(v.inputs, v.xi);
    r.feasible = o.feasible;
    r.status = o.status;
    if (o.feasible) {
      r.preparation_cost = o.solution.psi_n;
      r.emergency_cost = o.solution.psi_e;
      r.total_cost = o.solution.total;
    }
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += csv_field(fields[i]);
  }
  return line + "\n";
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string storage_list(const std::vector<double>& z, const grid::Network& net) {
  std::string s;
  for (std::size_t i = 0; i < z.size() && i < net.storage_sites.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(net.storage_sites[i].bus) + ":" + num(z[i]);
  }
  return s;
}

std::string money(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << v;
  return os.str();
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
  if (!f) throw std::runtime_error("failed writing " + p.string());
}

}  // namespace

std::string sweep_csv(const std::vector<SweepRow>& rows, const grid::Network& net) {
  std::string out = csv_line({"xi", "feasible", "status", "preventive_shed_mwh", "emergency_shed_mwh", "preventive_cost",
                              "emergency_cost", "total_cost", "hardening_cost", "storage_cost", "storage_mwh_by_bus",
                              "marginal_preventive_cost_increment"});
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    if (!r.feasible) {
      out += csv_line({num(r.xi), "false", r.status, "", "", "", "", "", "", "", "", ""});
      continue;
    }
    out += csv_line({num(r.xi), "true", r.status, num(r.preventive_shed_mwh), num(r.emergency_shed_mwh),
                     num(r.preventive_cost), num(r.emergency_cost), num(r.total_cost), num(r.hardening_cost),
                     num(r.storage_cost), storage_list(r.storage_mwh_by_bus, net),
                     k == 0 ? "-" : opt(r.marginal_preventive_cost_increment)});
  }
  return out;
}

std::string strategies_csv(const std::vector<StrategyResult>& rows) {
  std::string out =
      csv_line({"strategy", "description", "feasible", "status", "preparation_cost", "emergency_cost", "total_cost"});
  for (const auto& r : rows)
    out += csv_line({r.id, r.description, r.feasible ? "true" : "false", r.status, opt(r.preparation_cost),
                     opt(r.emergency_cost), opt(r.total_cost)});
  return out;
}

std::string investment_csv(const std::optional<PlanOutcome>& plan, const grid::Network& net) {
  std::string out = csv_line({"kind", "id", "value"});
  if (!plan || !plan->feasible) return out;
  const auto& s = plan->solution;
  for (std::size_t c = 0; c < s.x.size() && c < net.corridors.size(); ++c)
    out += csv_line({"corridor", std::to_string(net.corridors[c].id), std::to_string(s.x[c])});
  for (std::size_t i = 0; i < s.z_mwh.size() && i < net.storage_sites.size(); ++i)
    out += csv_line({"storage_bus", std::to_string(net.storage_sites[i].bus), num(s.z_mwh[i])});
  return out;
}

std::string summary_md(const Results& res, const grid::Network& net) {
  std::ostringstream md;
  md << "# Planning summary\n\n";
  if (!res.header.empty()) md << res.header << "\n\n";

  md << "## Investment\n\n";
  if (!res.plan) {
    md << "No plan in this run.\n\n";
  } else if (!res.plan->feasible) {
    md << "Plan at xi = " << res.plan->xi << " is infeasible (" << res.plan->status << ").\n\n";
  } else {
    const auto& s = res.plan->solution;
    md << "Status " << res.plan->status << " at xi = " << res.plan->xi << ". Expected total cost $" << money(s.total)
       << ".\n\n";
    md << "| corridor | hardened |\n|---|---|\n";
    for (std::size_t c = 0; c < s.x.size(); ++c) md << "| " << net.corridors[c].id << " | " << s.x[c] << " |\n";
    md << "\n| storage bus | capacity (MWh) |\n|---|---|\n";
    for (std::size_t i = 0; i < s.z_mwh.size(); ++i) md << "| " << net.storage_sites[i].bus << " | " << money(s.z_mwh[i]) << " |\n";
    md << "\nHardening $" << money(s.hardening_cost) << ", storage $" << money(s.storage_cost) << " (daily pro-rated).\n\n";
  }

  md << "## Strategy Comparison\n\n";
  if (res.strategies.empty()) {
    md << "Not run.\n\n";
  } else {
    md << "| strategy | description | preparation ($) | emergency ($) |\n|---|---|---|---|\n";
    for (const auto& r : res.strategies) {
      md << "| " << r.id << " | " << r.description << " | ";
      if (r.feasible)
        md << money(*r.preparation_cost) << " | " << money(*r.emergency_cost) << " |\n";
      else
        md << "infeasible | infeasible |\n";
    }
    md << "\n";
  }

  md << "## Preparation-Time Sweep\n\n";
  if (res.sweep.empty()) {
    md << "Not run.\n";
  } else {
    md << "| xi (h) | preventive shed (MWh) | emergency shed (MWh) | preventive cost ($) | emergency cost ($) | "
          "total ($) | marginal preventive increment ($) |\n|---|---|---|---|---|---|---|\n";
    for (std::size_t k = 0; k < res.sweep.size(); ++k) {
      const auto& r = res.sweep[k];
      md << "| " << num(r.xi) << " | ";
      if (!r.feasible) {
        md << "infeasible | | | | | |\n";
        continue;
      }
      md << money(r.preventive_shed_mwh) << " | " << money(r.emergency_shed_mwh) << " | " << money(r.preventive_cost)
         << " | " << money(r.emergency_cost) << " | " << money(r.total_cost) << " | "
         << (k == 0 ? "−" : r.marginal_preventive_cost_increment ? money(*r.marginal_preventive_cost_increment) : "")
         << " |\n";
    }
  }
  return md.str();
}

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<double>& x, const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  const double W = 640, H = 400, L = 80, R = 160, T = 40, B = 60;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool any = false;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (const auto& [_, ys] : series) {
      if (i >= ys.size() || !std::isfinite(ys[i])) continue;
      if (!any) xmin = xmax = x[i], ymin = ymax = ys[i], any = true;
      xmin = std::min(xmin, x[i]), xmax = std::max(xmax, x[i]);
      ymin = std::min(ymin, ys[i]), ymax = std::max(ymax, ys[i]);
    }
  ymin = std::min(ymin, 0.0);
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto px = [&](double v) { return L + (v - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - ymin) / (ymax - ymin) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << xml_escape(title) << "</text>\n"
    << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
    << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\" font-size=\"12\">"
    << xml_escape(x_label) << "</text>\n"
    << "<text x=\"15\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 15 "
    << (T + H - B) / 2 << ")\">" << xml_escape(y_label) << "</text>\n";
  for (double v : x)
    s << "<text x=\"" << px(v) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"10\">" << num(v)
      << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = ymin + (ymax - ymin) * k / 4;
    s << "<text x=\"" << L - 6 << "\" y=\"" << py(v) + 3 << "\" text-anchor=\"end\" font-size=\"10\">" << money(v)
      << "</text>\n";
  }
  for (std::size_t j = 0; j < series.size(); ++j) {
    const auto& [name, ys] = series[j];
    const char* color = colors[j % 5];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < x.size() && i < ys.size(); ++i) {
      if (!std::isfinite(ys[i])) continue;
      s << (first ? "" : " ") << px(x[i]) << ',' << py(ys[i]);
      first = false;
    }
    s << "\"/>\n";
    s << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (j + 1) << "\" font-size=\"12\" fill=\"" << color << "\">"
      << xml_escape(name) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void render_reports(const Results& res, const grid::Network& net, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
  const fs::path d(dir);
  write_text(d / "sweep.csv", sweep_csv(res.sweep, net));
  write_text(d / "strategies.csv", strategies_csv(res.strategies));
  write_text(d / "investment.csv", investment_csv(res.plan, net));
  write_text(d / "summary.md", summary_md(res, net));

  std::vector<double> xs, prev_cost, em_cost, total, prev_shed, em_shed;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : res.sweep) {
    xs.push_back(r.xi);
    prev_cost.push_back(r.feasible ? r.preventive_cost : nan);
    em_cost.push_back(r.feasible ? r.emergency_cost : nan);
    total.push_back(r.feasible ? r.total_cost : nan);
    prev_shed.push_back(r.feasible ? r.preventive_shed_mwh : nan);
    em_shed.push_back(r.feasible ? r.emergency_shed_mwh : nan);
  }
  write_text(d / "cost_vs_xi.svg",
             line_chart_svg("Expected cost vs preparation time", "xi (h)", "$",
                            xs, {{"preventive", prev_cost}, {"emergency", em_cost}, {"total", total}}));
  write_text(d / "shed_vs_xi.svg", line_chart_svg("Load shedding vs preparation time", "xi (h)", "MWh", xs,
                                                  {{"preventive", prev_shed}, {"emergency", em_shed}}));
}

std::string plan_json(const PlanOutcome& o, const grid::Network& net, const std::string& header_json) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["meta"] = header_json.empty() ? ordered_json::object() : ordered_json::parse(header_json);
  j["status"] = o.status;
  j["feasible"] = o.feasible;
  j["xi"] = o.xi;
  if (!o.infeasible_scenarios.empty()) j["infeasible_scenarios"] = o.infeasible_scenarios;
  if (o.feasible) {
    const auto& s = o.solution;
    auto& h = j["hardening"] = ordered_json::array();
    for (std::size_t c = 0; c < s.x.size(); ++c) h.push_back({{"corridor", net.corridors[c].id}, {"x", s.x[c]}});
    auto& z = j["storage"] = ordered_json::array();
    for (std::size_t i = 0; i < s.z_mwh.size(); ++i)
      z.push_back({{"bus", net.storage_sites[i].bus}, {"z_mwh", s.z_mwh[i]}});
    j["costs"] = {{"hardening", s.hardening_cost}, {"storage", s.storage_cost}, {"investment", s.investment},
                  {"preventive", s.psi_n}, {"emergency", s.psi_e}, {"total", s.total}};
    j["shed_mwh"] = {{"preventive", s.preventive_shed_mwh}, {"emergency", s.emergency_shed_mwh}};
  }
  if (o.pha) {
    j["pha"] = {{"termination", pha::to_string(o.pha->termination)},
                {"iterations", o.pha->iterations},
                {"residuals", o.pha->residuals}};
  } else if (o.feasible) {
    j["bound"] = o.bound;
    j["gap"] = o.gap;
  }
  return j.dump(1) + "\n";
}

}  // namespace icegrid::report
