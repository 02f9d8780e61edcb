#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "icegrid/report.hpp"

namespace icegrid::cli {

/// Resolved run configuration. Paths are absolute or relative to the working
/// directory once loaded.
struct RunConfig {
  std::string network;
  std::string scenario_file;  ///< empty means generate from `scenario`
  scenario::ScenarioConfig scenario;
  int count = 3;
  int total = 36;
  int storm_start = 13;
  int storm_end = 36;
  int xi = 4;
  double step_hours = 1.0;
  std::vector<int> xi_grid{0, 2, 4, 6};
  milp::Costs costs;
  milp::Budgets budgets;
  milp::BuildOptions build;
  solver::SolveOptions solve;
  std::string backend = "internal";  ///< internal | external
  std::string external_command;      ///< {mps} and {sol} are substituted
  pha::PhaConfig pha;
  std::uint64_t seed = 42;
  report::Mode mode = report::Mode::Extensive;
  int threads = 1;
  std::string out = "out";
};

/// Parses a config document. Relative input paths resolve against `base_dir`;
/// `out` stays relative to the working directory.
/// Throws ParseError on schema problems.
RunConfig parse_run_config(std::string_view text, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

/// Throws ValidationError when a referenced file is missing or the horizon is
/// inconsistent.
void validate(const RunConfig& cfg);

/// Canonical resolved form; the config hash is computed over it.
std::string to_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

/// Entry point. Returns 0 on success, 1 when the run reports infeasibility,
/// 2 on usage or configuration errors.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace icegrid::cli
