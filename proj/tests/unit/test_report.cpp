#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "doctest.h"
#include "icegrid/cli.hpp"
#include "icegrid/report.hpp"

using namespace icegrid;
namespace fs = std::filesystem;

namespace {

const char* kOneSite = R"({
  "buses": [{"id": 1, "load_profile": [5]}, {"id": 4, "load_profile": [5]}],
  "corridors": [{"id": 9, "from": 1, "to": 4, "b_pu": 10, "pmax_mw": 50, "length_miles": 10, "r_base_mm": 5}],
  "generators": [{"bus": 1, "p_max_mw": 100, "cost_per_mwh": 10}],
  "storage_sites": [{"bus": 4, "z_max_mwh": 12}]
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Tag balance over a flat SVG document: every opened element is closed in order.
bool balanced_xml(const std::string& doc) {
  std::vector<std::string> stack;
  const std::regex tag(R"(<(/?)([a-zA-Z]+)[^>]*?(/?)>)");
  for (auto it = std::sregex_iterator(doc.begin(), doc.end(), tag); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    if (m[3] == "/") continue;
    if (m[1] == "/") {
      if (stack.empty() || stack.back() != m[2]) return false;
      stack.pop_back();
    } else {
      stack.push_back(m[2]);
    }
  }
  return stack.empty();
}

struct Fixture {
  cli::RunConfig cfg;
  grid::Network net;
  scenario::ScenarioSet set;
  explicit Fixture(const std::string& name)
      : cfg(cli::load_run_config(std::string(ICEGRID_DATA_DIR) + "/configs/" + name + ".json")),
        net(grid::load_network(cfg.network)),
        set(scenario::generate_set(net, cfg.scenario, cfg.seed, cfg.count)) {}
  report::PlanInputs inputs() const {
    report::PlanInputs in;
    in.net = &net;
    in.scenarios = &set;
    in.costs = cfg.costs;
    in.budgets = cfg.budgets;
    return in;
  }
};

}  // namespace

TEST_CASE("empty results give header-only CSV") {
  const auto net = grid::parse_network(kOneSite);
  CHECK(report::sweep_csv({}, net) ==
        "xi,feasible,status,preventive_shed_mwh,emergency_shed_mwh,preventive_cost,emergency_cost,total_cost,"
        "hardening_cost,storage_cost,storage_mwh_by_bus,marginal_preventive_cost_increment\n");
  CHECK(report::strategies_csv({}) ==
        "strategy,description,feasible,status,preparation_cost,emergency_cost,total_cost\n");
  CHECK(report::investment_csv(std::nullopt, net) == "kind,id,value\n");
  const auto md = report::summary_md({}, net);
  CHECK(md.find("## Investment") != std::string::npos);
  CHECK(md.find("## Strategy Comparison") != std::string::npos);
  CHECK(md.find("## Preparation-Time Sweep") != std::string::npos);
}

TEST_CASE("sweep CSV golden rows") {
  const auto net = grid::parse_network(kOneSite);
  report::SweepRow a;
  a.xi = 0, a.feasible = true, a.status = "optimal";
  a.preventive_shed_mwh = 1.5, a.emergency_shed_mwh = 20, a.preventive_cost = 3000.25, a.emergency_cost = 40000;
  a.total_cost = 43100.25, a.hardening_cost = 0, a.storage_cost = 100, a.storage_mwh_by_bus = {7.5};
  report::SweepRow b = a;
  b.xi = 2, b.preventive_cost = 3500.25, b.marginal_preventive_cost_increment = 500;
  report::SweepRow c;
  c.xi = 4, c.status = "infeasible";
  CHECK(report::sweep_csv({a, b, c}, net) ==
        "xi,feasible,status,preventive_shed_mwh,emergency_shed_mwh,preventive_cost,emergency_cost,total_cost,"
        "hardening_cost,storage_cost,storage_mwh_by_bus,marginal_preventive_cost_increment\n"
        "0,true,optimal,1.5,20,3000.25,40000,43100.25,0,100,4:7.5,-\n"
        "2,true,optimal,1.5,20,3500.25,40000,43100.25,0,100,4:7.5,500\n"
        "4,false,infeasible,,,,,,,,,\n");
  const auto md = report::summary_md({std::nullopt, {a, b, c}, {}, ""}, net);
  CHECK(md.find("| 0 | 1.50 | 20.00 | 3000.25 | 40000.00 | 43100.25 | \xE2\x88\x92 |") != std::string::npos);
  CHECK(md.find("| 4 | infeasible |") != std::string::npos);
}

TEST_CASE("CSV fields with commas and quotes are quoted") {
  report::StrategyResult r;
  r.id = "I";
  r.description = "full \"model\", all options";
  r.status = "optimal";
  r.feasible = true;
  r.preparation_cost = 1, r.emergency_cost = 2, r.total_cost = 3;
  CHECK(report::strategies_csv({r}) ==
        "strategy,description,feasible,status,preparation_cost,emergency_cost,total_cost\n"
        "I,\"full \"\"model\"\", all options\",true,optimal,1,2,3\n");
}

TEST_CASE("SVG charts are well formed") {
  const auto svg = report::line_chart_svg("cost <&> shed", "xi", "$", {0, 2, 4},
                                          {{"a", {1, 2, 3}}, {"b", {3, std::nan(""), 1}}});
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("cost &lt;&amp;&gt; shed") != std::string::npos);
  CHECK(balanced_xml(svg));
  CHECK(svg.find("nan") == std::string::npos);
  // constant and empty series still produce a finite viewport
  const auto flat = report::line_chart_svg("t", "x", "y", {1}, {{"c", {5}}});
  CHECK(balanced_xml(flat));
  CHECK(flat.find("inf") == std::string::npos);
  CHECK(balanced_xml(report::line_chart_svg("t", "x", "y", {}, {})));
}

TEST_CASE("sweep increments telescope and render to disk") {
  Fixture f("hazard_heavy");
  auto in = f.inputs();
  const auto rows = report::sweep_xi(in, {6, 0, 2, 2});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].xi == 0);
  CHECK(rows[2].xi == 6);
  CHECK_FALSE(rows[0].marginal_preventive_cost_increment);
  double sum = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    REQUIRE(rows[k].marginal_preventive_cost_increment);
    sum += *rows[k].marginal_preventive_cost_increment;
  }
  CHECK(sum == doctest::Approx(rows.back().preventive_cost - rows.front().preventive_cost));

  const auto dir = fs::temp_directory_path() / "icegrid_report_test";
  fs::remove_all(dir);
  report::Results res;
  res.plan = report::plan(in, 4);
  res.sweep = rows;
  res.header = "Run `test`.";
  report::render_reports(res, f.net, dir.string());
  for (const char* name :
       {"sweep.csv", "strategies.csv", "investment.csv", "summary.md", "cost_vs_xi.svg", "shed_vs_xi.svg"})
    CHECK(fs::exists(dir / name));
  CHECK(balanced_xml(slurp(dir / "cost_vs_xi.svg")));
  const auto inv = slurp(dir / "investment.csv");
  CHECK(inv.find("corridor,") != std::string::npos);
  CHECK(inv.find("storage_bus,3,") != std::string::npos);
  const auto plan = nlohmann::json::parse(report::plan_json(*res.plan, f.net, R"({"command":"test"})"));
  CHECK(plan["meta"]["command"] == "test");
  CHECK(plan["feasible"] == true);
  CHECK(plan["hardening"].size() == f.net.corridors.size());
  CHECK(plan["costs"]["total"].get<double>() ==
        doctest::Approx(plan["costs"]["investment"].get<double>() + plan["costs"]["preventive"].get<double>() +
                        plan["costs"]["emergency"].get<double>()));
  fs::remove_all(dir);
}

TEST_CASE("strategy comparison respects the ordering of the variants") {
  Fixture f("hazard_heavy");
  auto in = f.inputs();
  in.costs.penalty.b = 1.5;  // steep decay
  in.solve.relative_mip_gap = 1e-9;
  const auto s = report::strategy_compare(in, 4);
  REQUIRE(s.size() == 4);
  for (const auto& r : s) REQUIRE(r.feasible);
  const double tol = 1e-6;
  // III prices preventive shedding no higher than I; II and IV restrict I
  CHECK(*s[2].total_cost <= *s[0].total_cost * (1 + tol));
  CHECK(*s[0].total_cost <= *s[1].total_cost * (1 + tol));
  CHECK(*s[0].total_cost <= *s[3].total_cost * (1 + tol));
  CHECK(*s[1].preparation_cost < *s[0].preparation_cost);
}

TEST_CASE("hazard-free instance: every strategy feasible with zero emergency cost") {
  Fixture f("six_bus");
  f.cfg.scenario.storm.precip_mean = 0;
  f.cfg.scenario.storm.precip_std = 0;
  f.set = scenario::generate_set(f.net, f.cfg.scenario, f.cfg.seed, f.cfg.count);
  const auto s = report::strategy_compare(f.inputs(), 4);
  REQUIRE(s.size() == 4);
  for (const auto& r : s) {
    CHECK(r.feasible);
    CHECK(*r.emergency_cost == 0.0);
    CHECK(*r.total_cost == doctest::Approx(*s[0].total_cost));
  }
}

TEST_CASE("tight budget: no preparation time is infeasible and recorded as data") {
  Fixture f("tight_budget");
  const auto s = report::strategy_compare(f.inputs(), f.cfg.xi);
  CHECK(s[0].feasible);
  CHECK_FALSE(s[1].feasible);
  CHECK(s[1].status == "infeasible");
  CHECK_FALSE(s[1].total_cost);
  const auto csv = report::strategies_csv(s);
  CHECK(csv.find("II,no preparation time (xi = 0),false,infeasible,,,\n") != std::string::npos);
}
