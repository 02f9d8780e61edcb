#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "icegrid/cli.hpp"
#include "icegrid/error.hpp"
#include "icegrid/hazard.hpp"
#include "icegrid/mps.hpp"
#include "icegrid/predictive.hpp"
#include "icegrid/scenario.hpp"
#include "icegrid/solver.hpp"

namespace py = pybind11;
using namespace icegrid;

namespace {

std::vector<double> thickness(const std::vector<std::tuple<double, double, bool, double>>& steps) {
  std::vector<hazard::WeatherStep> w;
  for (const auto& [p, v, f, d] : steps) w.push_back({p, v, f, d});
  return hazard::accumulate_thickness(w);
}

py::dict horizon(int total, int storm_start, int storm_end, int xi, double step_hours) {
  const auto h = predictive::partition_horizon(total, storm_start, storm_end, xi, step_hours);
  py::dict d;
  d["pre_awareness"] = h.pre_awareness();
  d["preparation"] = h.preparation();
  d["emergency"] = h.emergency();
  return d;
}

std::string generate(const std::string& config, std::optional<std::uint64_t> seed, std::optional<int> count,
                     int threads) {
  auto c = cli::load_run_config(config);
  if (seed) c.seed = *seed;
  if (count) c.count = *count;
  cli::validate(c);
  const auto net = grid::load_network(c.network);
  py::gil_scoped_release release;
  return scenario::serialize(scenario::generate_set(net, c.scenario, c.seed, c.count, threads));
}

py::dict solve_mps(const std::string& path, double gap) {
  const Model m = mps::read_file(path);
  solver::SolveOptions o;
  o.relative_mip_gap = gap;
  solver::SolveResult r;
  {
    py::gil_scoped_release release;
    r = solver::solve_milp(m, o);
  }
  py::dict d;
  d["status"] = solver::to_string(r.status);
  d["objective"] = r.objective + 0.0;
  d["best_bound"] = r.best_bound;
  d["nodes"] = r.nodes;
  d["values"] = r.values;
  d["columns"] = m.num_cols();
  d["rows"] = m.num_rows();
  return d;
}

py::tuple run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "icegrid");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Ice-storm resilience planning core";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  m.def("segment_failure_prob", &hazard::segment_failure_prob, py::arg("r"), py::arg("design_r"));
  m.def("corridor_failure_prob", [](const std::vector<double>& p) { return hazard::corridor_failure_prob(p); },
        py::arg("segment_probs"));
  m.def("wt_failure_prob",
        [](double r, double alpha_mm, double beta) { return hazard::wt_failure_prob(r, {alpha_mm, beta}); },
        py::arg("r"), py::arg("alpha_mm") = 20.0, py::arg("beta") = 4.0);
  m.def("repair_time_sample",
        [](double u, double alpha, double beta) { return hazard::repair_time_sample({alpha, beta}, u); }, py::arg("u"),
        py::arg("alpha") = 4.0, py::arg("beta") = 10.0);
  m.def("accumulate_thickness", &thickness, py::arg("steps"),
        "Ice thickness (mm) after each (precip mm/h, wind m/s, freezing, hours) step.");
  m.def("penalty_at",
        [](double tau, double a, double b, double c) { return predictive::penalty_at({a, b, c}, tau); },
        py::arg("tau_hours"), py::arg("a") = 2.718281828459045, py::arg("b") = 0.1, py::arg("c") = 1999.0);
  m.def("partition_horizon", &horizon, py::arg("total"), py::arg("storm_start"), py::arg("storm_end"), py::arg("xi"),
        py::arg("step_hours") = 1.0);
  m.def("generate_scenarios", &generate, py::arg("config"), py::arg("seed") = py::none(), py::arg("count") = py::none(),
        py::arg("threads") = 1, "Scenario set for a run config, serialized as JSON.");
  m.def("solve_mps", &solve_mps, py::arg("path"), py::arg("relative_mip_gap") = 1e-4);
  m.def("run_cli", &run_cli, py::arg("args"), "Runs the command-line tool in-process: (exit code, stdout, stderr).");
}
