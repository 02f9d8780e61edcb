#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "icegrid/cli.hpp"
#include "icegrid/error.hpp"
#include "json_util.hpp"

namespace icegrid::cli {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string resolve(const std::string& p, const std::string& base) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base) / p).lexically_normal().string();
}

double budget_of(const json& j, const char* key, double fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  if (j[key].is_null()) return std::numeric_limits<double>::infinity();
  if (!j[key].is_number()) throw ParseError(path + "/" + key, "expected a number or null");
  const double v = j[key].get<double>();
  if (v < 0) throw ParseError(path + "/" + key, "must be non-negative");
  return v;
}

ordered_json budget_json(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

}  // namespace

RunConfig parse_run_config(std::string_view text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("", std::string("invalid JSON: ") + e.what());
  }
  detail::check_keys(j, "", {"network", "scenarios", "horizon", "xi_grid", "penalty", "costs", "budgets", "storage",
                             "solver", "pha", "seed", "mode", "threads", "out"});
  RunConfig c;
  using detail::get_or;

  if (!j.contains("network") || !j["network"].is_string()) throw ParseError("/network", "expected a file path");
  c.network = resolve(j["network"].get<std::string>(), base_dir);

  if (j.contains("horizon")) {
    const auto& h = j["horizon"];
    detail::check_keys(h, "/horizon", {"total", "storm_start", "storm_end", "xi", "step_hours"});
    c.total = get_or(h, "total", c.total, "/horizon");
    c.storm_start = get_or(h, "storm_start", c.storm_start, "/horizon");
    c.storm_end = get_or(h, "storm_end", c.storm_end, "/horizon");
    c.xi = get_or(h, "xi", c.xi, "/horizon");
    c.step_hours = get_or(h, "step_hours", c.step_hours, "/horizon");
  }

  if (j.contains("scenarios")) {
    const auto& s = j["scenarios"];
    detail::check_keys(s, "/scenarios", {"file", "count", "storm", "load", "repair"});
    c.scenario_file = resolve(get_or<std::string>(s, "file", "", "/scenarios"), base_dir);
    c.count = get_or(s, "count", c.count, "/scenarios");
    json sub = json::object();
    for (const char* k : {"storm", "load", "repair"})
      if (s.contains(k)) sub[k] = s[k];
    try {
      c.scenario = scenario::scenario_config_from_json(sub.dump());
    } catch (const ParseError& e) {
      throw ParseError("/scenarios" + e.path(), e.what());
    }
  }
  c.scenario.window = {c.total, c.storm_start, c.storm_end, c.step_hours};

  if (j.contains("xi_grid")) {
    if (!j["xi_grid"].is_array()) throw ParseError("/xi_grid", "expected an array of integers");
    c.xi_grid.clear();
    for (const auto& v : j["xi_grid"]) {
      if (!v.is_number_integer()) throw ParseError("/xi_grid", "expected an array of integers");
      c.xi_grid.push_back(v.get<int>());
    }
  }

  if (j.contains("penalty")) {
    const auto& p = j["penalty"];
    detail::check_keys(p, "/penalty", {"a", "b", "c"});
    auto& s = c.costs.penalty;
    s.a = get_or(p, "a", s.a, "/penalty");
    s.b = get_or(p, "b", s.b, "/penalty");
    s.c = get_or(p, "c", s.c, "/penalty");
  }
  if (j.contains("costs")) {
    const auto& k = j["costs"];
    detail::check_keys(k, "/costs", {"generator_cost_override", "discharge", "wind_curtail", "shed_emergency",
                                     "critical_factor", "discount_rate", "lifetime_years", "days_per_year"});
    auto& s = c.costs;
    s.gen_override = get_or(k, "generator_cost_override", s.gen_override, "/costs");
    s.discharge = get_or(k, "discharge", s.discharge, "/costs");
    s.wind_curtail = get_or(k, "wind_curtail", s.wind_curtail, "/costs");
    s.shed_emergency = get_or(k, "shed_emergency", s.shed_emergency, "/costs");
    s.critical_factor = get_or(k, "critical_factor", s.critical_factor, "/costs");
    s.discount_rate = get_or(k, "discount_rate", s.discount_rate, "/costs");
    s.lifetime_years = get_or(k, "lifetime_years", s.lifetime_years, "/costs");
    s.days_per_year = get_or(k, "days_per_year", s.days_per_year, "/costs");
  }
  if (j.contains("budgets")) {
    const auto& b = j["budgets"];
    detail::check_keys(b, "/budgets", {"lines", "storage"});
    c.budgets.lines = budget_of(b, "lines", c.budgets.lines, "/budgets");
    c.budgets.storage = budget_of(b, "storage", c.budgets.storage, "/budgets");
  }
  if (j.contains("storage")) {
    detail::check_keys(j["storage"], "/storage", {"per_step_modes"});
    c.build.per_step_modes = get_or(j["storage"], "per_step_modes", c.build.per_step_modes, "/storage");
  }
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    detail::check_keys(s, "/solver", {"relative_mip_gap", "absolute_mip_gap", "time_limit_s", "node_limit",
                                      "iteration_limit", "feasibility_tol", "integrality_tol", "backend", "command"});
    auto& o = c.solve;
    o.relative_mip_gap = get_or(s, "relative_mip_gap", o.relative_mip_gap, "/solver");
    o.absolute_mip_gap = get_or(s, "absolute_mip_gap", o.absolute_mip_gap, "/solver");
    if (s.contains("time_limit_s") && s["time_limit_s"].is_null())
      o.time_limit_s = std::numeric_limits<double>::infinity();
    else
      o.time_limit_s = get_or(s, "time_limit_s", o.time_limit_s, "/solver");
    o.node_limit = get_or(s, "node_limit", o.node_limit, "/solver");
    o.iteration_limit = get_or(s, "iteration_limit", o.iteration_limit, "/solver");
    o.feasibility_tol = get_or(s, "feasibility_tol", o.feasibility_tol, "/solver");
    o.integrality_tol = get_or(s, "integrality_tol", o.integrality_tol, "/solver");
    c.backend = get_or<std::string>(s, "backend", c.backend, "/solver");
    c.external_command = get_or<std::string>(s, "command", c.external_command, "/solver");
    if (c.backend != "internal" && c.backend != "external")
      throw ParseError("/solver/backend", "expected \"internal\" or \"external\"");
  }
  if (j.contains("pha")) {
    const auto& p = j["pha"];
    detail::check_keys(p, "/pha", {"rho", "rho_scale", "epsilon", "max_iterations", "fix_after_k", "enable_fixing"});
    auto& o = c.pha;
    if (p.contains("rho") && !p["rho"].is_null()) o.rho = get_or(p, "rho", 1.0, "/pha");
    o.rho_scale = get_or(p, "rho_scale", o.rho_scale, "/pha");
    o.epsilon = get_or(p, "epsilon", o.epsilon, "/pha");
    o.max_iterations = get_or(p, "max_iterations", o.max_iterations, "/pha");
    o.fix_after_k = get_or(p, "fix_after_k", o.fix_after_k, "/pha");
    o.enable_fixing = get_or(p, "enable_fixing", o.enable_fixing, "/pha");
  }
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed, "");
  const std::string mode = get_or<std::string>(j, "mode", "extensive", "");
  if (mode == "extensive")
    c.mode = report::Mode::Extensive;
  else if (mode == "pha")
    c.mode = report::Mode::Pha;
  else
    throw ParseError("/mode", "expected \"extensive\" or \"pha\"");
  c.threads = get_or(j, "threads", c.threads, "");
  c.out = get_or<std::string>(j, "out", c.out, "");  // relative to the working directory
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto base = fs::path(path).parent_path().string();
  return parse_run_config(ss.str(), base.empty() ? "." : base);
}

void validate(const RunConfig& c) {
  if (!fs::exists(c.network)) throw ValidationError("network file not found: " + c.network);
  if (!c.scenario_file.empty() && !fs::exists(c.scenario_file))
    throw ValidationError("scenario file not found: " + c.scenario_file);
  if (c.count < 1) throw ValidationError("scenario count must be at least 1");
  if (c.threads < 1) throw ValidationError("threads must be at least 1");
  if (c.backend == "external" && c.external_command.empty())
    throw ValidationError("external backend needs solver.command");
  try {
    predictive::partition_horizon(c.total, c.storm_start, c.storm_end, c.xi, c.step_hours);
    for (int xi : c.xi_grid) predictive::partition_horizon(c.total, c.storm_start, c.storm_end, xi, c.step_hours);
    predictive::penalty_at(c.costs.penalty, 0.0);
    pha::validate(c.pha);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  if (!(c.costs.penalty.a > 1) || c.costs.penalty.b < 0)
    throw ValidationError("penalty requires a > 1 and b >= 0");
}

std::string to_json(const RunConfig& c) {
  ordered_json j;
  j["network"] = c.network;
  ordered_json sc = ordered_json::parse(scenario::to_json(c.scenario));
  sc.erase("window");
  ordered_json scen;
  if (!c.scenario_file.empty()) scen["file"] = c.scenario_file;
  scen["count"] = c.count;
  for (auto& [k, v] : sc.items()) scen[k] = v;
  j["scenarios"] = scen;
  j["horizon"] = {{"total", c.total}, {"storm_start", c.storm_start}, {"storm_end", c.storm_end}, {"xi", c.xi},
                  {"step_hours", c.step_hours}};
  j["xi_grid"] = c.xi_grid;
  j["penalty"] = {{"a", c.costs.penalty.a}, {"b", c.costs.penalty.b}, {"c", c.costs.penalty.c}};
  j["costs"] = {{"generator_cost_override", c.costs.gen_override},
                {"discharge", c.costs.discharge},
                {"wind_curtail", c.costs.wind_curtail},
                {"shed_emergency", c.costs.shed_emergency},
                {"critical_factor", c.costs.critical_factor},
                {"discount_rate", c.costs.discount_rate},
                {"lifetime_years", c.costs.lifetime_years},
                {"days_per_year", c.costs.days_per_year}};
  j["budgets"] = {{"lines", budget_json(c.budgets.lines)}, {"storage", budget_json(c.budgets.storage)}};
  j["storage"] = {{"per_step_modes", c.build.per_step_modes}};
  j["solver"] = {{"relative_mip_gap", c.solve.relative_mip_gap},
                 {"absolute_mip_gap", c.solve.absolute_mip_gap},
                 {"time_limit_s", budget_json(c.solve.time_limit_s)},
                 {"node_limit", c.solve.node_limit},
                 {"iteration_limit", c.solve.iteration_limit},
                 {"feasibility_tol", c.solve.feasibility_tol},
                 {"integrality_tol", c.solve.integrality_tol},
                 {"backend", c.backend},
                 {"command", c.external_command}};
  j["pha"] = {{"rho", c.pha.rho ? ordered_json(*c.pha.rho) : ordered_json(nullptr)},
              {"rho_scale", c.pha.rho_scale},
              {"epsilon", c.pha.epsilon},
              {"max_iterations", c.pha.max_iterations},
              {"fix_after_k", c.pha.fix_after_k},
              {"enable_fixing", c.pha.enable_fixing}};
  j["seed"] = c.seed;
  j["mode"] = report::to_string(c.mode);
  j["threads"] = c.threads;
  j["out"] = c.out;
  return j.dump();
}

std::string config_hash(const RunConfig& c) {
  // threads and out do not change results
  auto j = json::parse(to_json(c));
  j.erase("threads");
  j.erase("out");
  return detail::fnv1a_hex(j.dump());
}

}  // namespace icegrid::cli
