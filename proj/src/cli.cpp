#include "icegrid/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "icegrid/error.hpp"
#include "icegrid/mps.hpp"

namespace icegrid::cli {

namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string scenarios;
  std::string plan_file;
  std::string mode;
  std::string xi_list;
  std::uint64_t seed = 0;
  int count = 0;
  int threads = 0;
  int xi = -1;
  bool has_seed = false;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--xi expects a comma-separated list of integers, got '" + s + "'");
    }
  }
  if (out.empty()) throw UsageError("--xi list is empty");
  return out;
}

RunConfig resolve_config(const Flags& f, bool xi_is_list) {
  RunConfig c = load_run_config(f.config);
  if (const char* env = std::getenv("ICEGRID_SEED")) {
    try {
      std::size_t used = 0;
      c.seed = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw ValidationError(std::string("ICEGRID_SEED is not an unsigned integer: ") + env);
    }
  }
  if (f.has_seed) c.seed = f.seed;
  if (f.count > 0) c.count = f.count;
  if (f.threads > 0) c.threads = f.threads;
  if (!f.scenarios.empty()) c.scenario_file = f.scenarios;
  if (!f.out.empty()) c.out = f.out;
  if (!f.mode.empty()) c.mode = f.mode == "pha" ? report::Mode::Pha : report::Mode::Extensive;
  if (xi_is_list) {
    if (!f.xi_list.empty()) c.xi_grid = parse_int_list(f.xi_list);
  } else if (f.xi >= 0) {
    c.xi = f.xi;
  }
  validate(c);
  return c;
}

void echo(std::ostream& out, const std::string& command, const RunConfig& c) {
  out << "icegrid " << command << "\n"
      << "seed: " << c.seed << "\n"
      << "config_hash: " << config_hash(c) << "\n"
      << "config: " << to_json(c) << "\n";
}

std::string header_json(const std::string& command, const RunConfig& c, const scenario::ScenarioSet& set) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["seed"] = set.seed;
  j["config_hash"] = config_hash(c);
  j["scenario_config_hash"] = set.config_hash;
  j["scenarios"] = set.scenarios.size();
  return j.dump();
}

std::string header_line(const std::string& command, const RunConfig& c, const scenario::ScenarioSet& set) {
  return "Run `" + command + "`: seed " + std::to_string(set.seed) + ", config hash " + config_hash(c) + ", " +
         std::to_string(set.scenarios.size()) + " scenarios (scenario config hash " + set.config_hash + ").";
}

scenario::ScenarioSet scenarios_for(const RunConfig& c, const grid::Network& net) {
  if (c.scenario_file.empty()) return scenario::generate_set(net, c.scenario, c.seed, c.count, c.threads);
  auto set = scenario::load_scenario_set(c.scenario_file);
  const auto& w = set.window;
  if (w.total != c.total || w.storm_start != c.storm_start || w.storm_end != c.storm_end ||
      w.step_hours != c.step_hours)
    throw ValidationError("scenario file window does not match the configured horizon");
  if (set.scenarios.empty()) throw ValidationError("scenario file holds no scenarios");
  return set;
}

report::PlanInputs inputs_for(const RunConfig& c, const grid::Network& net, const scenario::ScenarioSet& set) {
  report::PlanInputs in;
  in.net = &net;
  in.scenarios = &set;
  in.costs = c.costs;
  in.budgets = c.budgets;
  in.build = c.build;
  in.mode = c.mode;
  in.pha = c.pha;
  in.solve = c.solve;
  in.threads = c.threads;
  if (c.backend == "external")
    in.backend = std::make_shared<solver::ExternalBackend>(c.external_command, (fs::path(c.out) / "external").string());
  return in;
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
  if (!f) throw std::runtime_error("failed writing " + p.string());
}

void write_run_json(const RunConfig& c, const std::string& header) {
  nlohmann::ordered_json j;
  j["meta"] = nlohmann::ordered_json::parse(header);
  j["config"] = nlohmann::ordered_json::parse(to_json(c));
  write_file(fs::path(c.out) / "run.json", j.dump(1) + "\n");
}

int cmd_gen(const Flags& f, std::ostream& out) {
  const auto c = resolve_config(f, false);
  if (f.out.empty()) throw UsageError("gen needs --out <scenario file>");
  echo(out, "gen", c);
  const auto net = grid::load_network(c.network);
  const auto set = scenario::generate_set(net, c.scenario, c.seed, c.count, c.threads);
  write_file(f.out, scenario::serialize(set));
  out << "wrote " << set.scenarios.size() << " scenarios to " << f.out << "\n";
  return 0;
}

int cmd_plan(const Flags& f, std::ostream& out) {
  const auto c = resolve_config(f, false);
  echo(out, "plan", c);
  const auto net = grid::load_network(c.network);
  const auto set = scenarios_for(c, net);
  const auto o = report::plan(inputs_for(c, net, set), c.xi);
  const auto header = header_json("plan", c, set);
  write_run_json(c, header);
  write_file(fs::path(c.out) / "plan.json", report::plan_json(o, net, header));
  if (o.pha) pha::write_log_csv(o.pha->log, (fs::path(c.out) / "pha_log.csv").string());
  report::Results res;
  res.plan = o;
  if (o.feasible) res.sweep.push_back(report::to_row(o, net));
  res.header = header_line("plan", c, set);
  report::render_reports(res, net, c.out);
  out << "status: " << o.status << "\n";
  if (!o.feasible) {
    out << "infeasible";
    for (int s : o.infeasible_scenarios) out << " " << s;
    out << "\n";
    return 1;
  }
  out << "total_cost: " << o.solution.total << "\n";
  return 0;
}

int cmd_evaluate(const Flags& f, std::ostream& out) {
  const auto c = resolve_config(f, false);
  if (f.plan_file.empty()) throw UsageError("evaluate needs --plan <plan.json>");
  echo(out, "evaluate", c);
  const auto net = grid::load_network(c.network);
  const auto set = scenarios_for(c, net);

  std::ifstream in(f.plan_file, std::ios::binary);
  if (!in) throw ValidationError("cannot open plan file " + f.plan_file);
  nlohmann::json pj;
  try {
    pj = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(f.plan_file, e.what());
  }
  if (!pj.value("feasible", false)) throw ValidationError("plan file holds no feasible plan");
  std::vector<int> x(net.corridors.size(), 0);
  std::vector<double> z(net.storage_sites.size(), 0.0);
  try {
    for (const auto& h : pj.at("hardening")) {
      const int id = h.at("corridor").get<int>();
      bool found = false;
      for (std::size_t k = 0; k < net.corridors.size(); ++k)
        if (net.corridors[k].id == id) x[k] = h.at("x").get<int>(), found = true;
      if (!found) throw ValidationError("plan names unknown corridor " + std::to_string(id));
    }
    for (const auto& s : pj.at("storage")) {
      const int bus = s.at("bus").get<int>();
      bool found = false;
      for (std::size_t k = 0; k < net.storage_sites.size(); ++k)
        if (net.storage_sites[k].bus == bus) z[k] = s.at("z_mwh").get<double>(), found = true;
      if (!found) throw ValidationError("plan names unknown storage bus " + std::to_string(bus));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(f.plan_file, e.what());
  }

  const auto h = report::horizon_for(set, c.xi);
  const auto ev = pha::evaluate_plan(net, set, h, c.costs, c.budgets, x, z, c.build, c.solve, c.threads);
  const auto header = header_json("evaluate", c, set);
  write_run_json(c, header);
  nlohmann::ordered_json j;
  j["meta"] = nlohmann::ordered_json::parse(header);
  j["plan"] = f.plan_file;
  j["feasible"] = ev.feasible;
  j["infeasible_scenarios"] = ev.infeasible_scenarios;
  if (ev.feasible) {
    const auto& e = ev.expected;
    j["costs"] = {{"hardening", e.hardening_cost}, {"storage", e.storage_cost}, {"preventive", e.psi_n},
                  {"emergency", e.psi_e}, {"total", e.total}};
    j["shed_mwh"] = {{"preventive", e.preventive_shed_mwh}, {"emergency", e.emergency_shed_mwh}};
    j["scenario_totals"] = ev.scenario_totals;
  }
  write_file(fs::path(c.out) / "evaluation.json", j.dump(1) + "\n");
  if (!ev.feasible) {
    out << "status: infeasible\n";
    return 1;
  }
  out << "status: feasible\ntotal_cost: " << ev.expected.total << "\n";
  return 0;
}

int cmd_sweep(const Flags& f, std::ostream& out) {
  const auto c = resolve_config(f, true);
  echo(out, "sweep", c);
  const auto net = grid::load_network(c.network);
  const auto set = scenarios_for(c, net);
  report::Results res;
  res.sweep = report::sweep_xi(inputs_for(c, net, set), c.xi_grid);
  res.header = header_line("sweep", c, set);
  write_run_json(c, header_json("sweep", c, set));
  report::render_reports(res, net, c.out);
  for (const auto& r : res.sweep)
    out << "xi " << r.xi << ": " << (r.feasible ? "feasible" : "infeasible") << " (" << r.status << ")\n";
  return 0;
}

int cmd_compare(const Flags& f, std::ostream& out) {
  const auto c = resolve_config(f, false);
  echo(out, "compare", c);
  const auto net = grid::load_network(c.network);
  const auto set = scenarios_for(c, net);
  report::Results res;
  res.strategies = report::strategy_compare(inputs_for(c, net, set), c.xi);
  res.header = header_line("compare", c, set);
  write_run_json(c, header_json("compare", c, set));
  report::render_reports(res, net, c.out);
  for (const auto& r : res.strategies)
    out << "strategy " << r.id << ": " << (r.feasible ? "feasible" : "infeasible") << " (" << r.status << ")\n";
  return 0;
}

int cmd_export(const Flags& f, std::ostream& out) {
  const auto c = resolve_config(f, false);
  if (f.out.empty()) throw UsageError("export-mps needs --out <file.mps>");
  echo(out, "export-mps", c);
  const auto net = grid::load_network(c.network);
  const auto set = scenarios_for(c, net);
  const auto problem =
      milp::build_extensive(net, set, report::horizon_for(set, c.xi), c.costs, c.budgets, c.build);
  const fs::path p(f.out);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  milp::export_mps(problem, f.out);
  out << "wrote " << problem.model.num_cols() << " columns, " << problem.model.num_rows() << " rows to " << f.out
      << "\n";
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ice-storm resilience planning: scenario generation, planning and reports", "icegrid"};
  app.require_subcommand(1);
  Flags f;
  std::string seed_text;

  auto common = [&](CLI::App* s, bool xi_list) {
    s->add_option("--config", f.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    s->add_option("--seed", seed_text, "Master seed (overrides config and ICEGRID_SEED)");
    s->add_option("--count", f.count, "Number of generated scenarios")->check(CLI::PositiveNumber);
    s->add_option("--threads", f.threads, "Concurrency cap")->check(CLI::PositiveNumber);
    s->add_option("--scenarios", f.scenarios, "Use a saved scenario file instead of generating")
        ->check(CLI::ExistingFile);
    if (xi_list)
      s->add_option("--xi", f.xi_list, "Comma-separated preparation times, e.g. 2,4,6");
    else
      s->add_option("--xi", f.xi, "Preparation time in steps")->check(CLI::NonNegativeNumber);
  };

  auto* gen = app.add_subcommand("gen", "Generate a scenario file");
  gen->add_option("--config", f.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("--seed", seed_text, "Master seed");
  gen->add_option("--count", f.count, "Number of scenarios")->check(CLI::PositiveNumber);
  gen->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
  gen->add_option("--out", f.out, "Scenario file to write")->required();

  auto* plan = app.add_subcommand("plan", "Solve the planning problem and write plan.json plus reports");
  common(plan, false);
  plan->add_option("--mode", f.mode, "extensive or pha")->check(CLI::IsMember({"extensive", "pha"}));
  plan->add_option("--out", f.out, "Output directory");

  auto* evaluate = app.add_subcommand("evaluate", "Price a fixed plan on a scenario set");
  common(evaluate, false);
  evaluate->add_option("--plan", f.plan_file, "plan.json from a previous run")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--out", f.out, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Solve across preparation times");
  common(sweep, true);
  sweep->add_option("--mode", f.mode, "extensive or pha")->check(CLI::IsMember({"extensive", "pha"}));
  sweep->add_option("--out", f.out, "Output directory");

  auto* compare = app.add_subcommand("compare", "Compare strategies I-IV");
  common(compare, false);
  compare->add_option("--mode", f.mode, "extensive or pha")->check(CLI::IsMember({"extensive", "pha"}));
  compare->add_option("--out", f.out, "Output directory");

  auto* exp = app.add_subcommand("export-mps", "Write the extensive form as fixed-format MPS");
  common(exp, false);
  exp->add_option("--out", f.out, "MPS file to write")->required();

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!seed_text.empty()) {
      std::size_t used = 0;
      try {
        f.seed = std::stoull(seed_text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != seed_text.size() || seed_text[0] == '-') throw UsageError("--seed expects an unsigned integer");
      f.has_seed = true;
    }
    if (gen->parsed()) return cmd_gen(f, out);
    if (plan->parsed()) return cmd_plan(f, out);
    if (evaluate->parsed()) return cmd_evaluate(f, out);
    if (sweep->parsed()) return cmd_sweep(f, out);
    if (compare->parsed()) return cmd_compare(f, out);
    if (exp->parsed()) return cmd_export(f, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const ParseError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace icegrid::cli
