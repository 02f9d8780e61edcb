#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "doctest.h"
#include "icegrid/cli.hpp"
#include "icegrid/error.hpp"

using namespace icegrid;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = std::string(ICEGRID_DATA_DIR) + "/configs";

struct Run {
  int code = 0;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "icegrid");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("icegrid_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("run config parsing") {
  const auto c = cli::parse_run_config(R"({
    "network": "net.json",
    "scenarios": {"count": 7, "storm": {"precip_mean": 2.5}, "load": {"kappa_std": 0}},
    "horizon": {"total": 12, "storm_start": 7, "storm_end": 12, "xi": 3},
    "penalty": {"b": 0},
    "budgets": {"lines": 5e6, "storage": null},
    "solver": {"relative_mip_gap": 1e-6},
    "pha": {"rho": 50, "max_iterations": 9},
    "mode": "pha", "seed": 9, "out": "results"
  })",
                                       "/base/dir");
  CHECK(c.network == "/base/dir/net.json");
  CHECK(c.out == "results");
  CHECK(c.count == 7);
  CHECK(c.scenario.storm.precip_mean == 2.5);
  CHECK(c.scenario.load.kappa_std == 0);
  CHECK(c.scenario.window.total == 12);
  CHECK(c.scenario.window.storm_start == 7);
  CHECK(c.xi == 3);
  CHECK(c.costs.penalty.b == 0);
  CHECK(c.budgets.lines == 5e6);
  CHECK(std::isinf(c.budgets.storage));
  CHECK(c.solve.relative_mip_gap == 1e-6);
  REQUIRE(c.pha.rho);
  CHECK(*c.pha.rho == 50);
  CHECK(c.pha.max_iterations == 9);
  CHECK(c.mode == report::Mode::Pha);
  CHECK(c.seed == 9);

  // canonical form round-trips to the same hash
  const auto again = cli::parse_run_config(cli::to_json(c), "/elsewhere");
  CHECK(cli::config_hash(again) == cli::config_hash(c));
  auto other = c;
  other.threads = 8;
  other.out = "x";
  CHECK(cli::config_hash(other) == cli::config_hash(c));
  other.seed = 10;
  CHECK(cli::config_hash(other) != cli::config_hash(c));
}

TEST_CASE("run config errors") {
  CHECK_THROWS_AS(cli::parse_run_config("{", "."), ParseError);
  CHECK_THROWS_AS(cli::parse_run_config(R"({"scenarios": {}})", "."), ParseError);
  try {
    cli::parse_run_config(R"({"network": "n.json", "solver": {"gapp": 1}})", ".");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.path() == "/solver/gapp");
  }
  CHECK_THROWS_AS(cli::parse_run_config(R"({"network": "n.json", "mode": "fast"})", "."), ParseError);
  CHECK_THROWS_AS(cli::parse_run_config(R"({"network": "n.json", "budgets": {"lines": -1}})", "."), ParseError);

  auto c = cli::load_run_config(kConfigs + "/six_bus.json");
  CHECK_NOTHROW(cli::validate(c));
  auto bad = c;
  bad.xi = 7;  // longer than the pre-storm window
  CHECK_THROWS_AS(cli::validate(bad), ValidationError);
  bad = c;
  bad.network = "/nonexistent/net.json";
  CHECK_THROWS_AS(cli::validate(bad), ValidationError);
  bad = c;
  bad.costs.penalty.a = 1.0;
  CHECK_THROWS_AS(cli::validate(bad), ValidationError);
}

TEST_CASE("cli usage errors exit 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"plan", "--config", kConfigs + "/six_bus.json", "--bogus"}).code == 2);
  CHECK(run({"plan"}).code == 2);
  CHECK(run({"sweep", "--config", kConfigs + "/six_bus.json", "--xi", "2,x"}).code == 2);
  const auto dir = scratch("badcfg");
  std::ofstream(dir / "c.json") << R"({"network": "missing.json"})";
  const auto r = run({"plan", "--config", (dir / "c.json").string(), "--out", (dir / "o").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("missing.json") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli gen echoes provenance and honours seed precedence") {
  const auto dir = scratch("gen");
  const auto a = run({"gen", "--config", kConfigs + "/six_bus.json", "--count", "2", "--out", (dir / "a.json").string()});
  REQUIRE(a.code == 0);
  CHECK(a.out.find("seed: 42\n") != std::string::npos);
  CHECK(a.out.find("config_hash: ") != std::string::npos);
  CHECK(nlohmann::json::parse(std::ifstream(dir / "a.json"))["meta"]["seed"] == 42);

  ::setenv("ICEGRID_SEED", "5", 1);
  const auto b = run({"gen", "--config", kConfigs + "/six_bus.json", "--count", "2", "--out", (dir / "b.json").string()});
  const auto c = run({"gen", "--config", kConfigs + "/six_bus.json", "--count", "2", "--seed", "6", "--out",
                      (dir / "c.json").string()});
  ::setenv("ICEGRID_SEED", "five", 1);
  const auto d = run({"gen", "--config", kConfigs + "/six_bus.json", "--out", (dir / "d.json").string()});
  ::unsetenv("ICEGRID_SEED");
  CHECK(b.out.find("seed: 5\n") != std::string::npos);
  CHECK(c.out.find("seed: 6\n") != std::string::npos);
  CHECK(d.code == 2);
  fs::remove_all(dir);
}

TEST_CASE("cli plan, evaluate and infeasible exit codes") {
  const auto dir = scratch("plan");
  const auto p = run({"plan", "--config", kConfigs + "/toy3.json", "--out", (dir / "p").string()});
  REQUIRE(p.code == 0);
  for (const char* name : {"plan.json", "run.json", "sweep.csv", "strategies.csv", "investment.csv", "summary.md"})
    CHECK(fs::exists(dir / "p" / name));
  const auto plan = nlohmann::json::parse(std::ifstream(dir / "p" / "plan.json"));
  CHECK(plan["feasible"] == true);

  const auto e = run({"evaluate", "--config", kConfigs + "/toy3.json", "--plan", (dir / "p" / "plan.json").string(),
                      "--out", (dir / "e").string()});
  CHECK(e.code == 0);
  const auto ev = nlohmann::json::parse(std::ifstream(dir / "e" / "evaluation.json"));
  CHECK(ev.dump().find("total") != std::string::npos);

  // tight budget with no preparation time cannot serve the critical load
  const auto bad = run({"plan", "--config", kConfigs + "/tight_budget.json", "--xi", "0", "--out", (dir / "t").string()});
  CHECK(bad.code == 1);
  const auto sw = run({"sweep", "--config", kConfigs + "/tight_budget.json", "--xi", "0,6", "--out", (dir / "s").string()});
  CHECK(sw.code == 0);
  std::ifstream csv(dir / "s" / "sweep.csv");
  std::string header, row0, row6;
  std::getline(csv, header), std::getline(csv, row0), std::getline(csv, row6);
  CHECK(row0.rfind("0,false,", 0) == 0);
  CHECK(row6.rfind("6,true,", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("cli export-mps") {
  const auto dir = scratch("mps");
  const auto r = run({"export-mps", "--config", kConfigs + "/toy3.json", "--out", (dir / "m.mps").string()});
  CHECK(r.code == 0);
  std::ifstream in(dir / "m.mps");
  std::string first;
  bool has_name = false;
  while (std::getline(in, first))
    if (first.rfind("NAME", 0) == 0) has_name = true;
  CHECK(has_name);
  fs::remove_all(dir);
}
