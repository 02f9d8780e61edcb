#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "icegrid/grid_model.hpp"
#include "icegrid/hazard.hpp"
#include "icegrid/rng.hpp"

namespace icegrid::scenario {

/// Storm parameter distributions. Precipitation and wind follow AR(1)
/// normals censored at zero; corridors and wind farms scale the storm's
/// thickness by a uniform intensity factor.
struct StormConfig {
  double precip_mean = 4.0;  // mm/h
  double precip_std = 1.5;
  double wind_mean = 8.0;  // m/s
  double wind_std = 3.0;
  double ar1 = 0.8;
  double intensity_min = 0.8;
  double intensity_max = 1.2;
  bool freezing = true;
};

struct LoadConfig {
  double kappa_mean = 1.0;
  double kappa_std = 0.1;
  double kappa_min = 0.5;
  double kappa_max = 1.5;
};

/// Time layout of the sampled window: loads span 1..total, the storm spans
/// storm_start..storm_end.
struct Window {
  int total = 36;
  int storm_start = 13;
  int storm_end = 36;
  double step_hours = 1.0;
  int storm_steps() const { return storm_end - storm_start + 1; }
};

struct ScenarioConfig {
  StormConfig storm;
  LoadConfig load;
  hazard::RepairDist repair;
  Window window;
};

struct StormSample {
  std::vector<hazard::WeatherStep> weather;  // one per storm step
  std::vector<double> corridor_intensity;
  std::vector<double> wind_intensity;
};

using BinarySeries = std::vector<std::uint8_t>;

/// Damage realisation over the storm steps (index 0 = storm_start).
struct DamageSeries {
  std::vector<BinarySeries> phi_o;  // [corridor][k], 1 = damaged without hardening
  std::vector<BinarySeries> phi_w;  // [corridor][k], 1 = damaged when hardened
  std::vector<BinarySeries> gamma;  // [wind farm][k], 1 = available
  std::vector<double> corridor_repair_hours;  // 0 when the corridor survives
  std::vector<double> wind_repair_hours;
};

struct Scenario {
  int id = 0;
  double probability = 1.0;
  DamageSeries damage;
  std::vector<double> kappa;              // [bus]
  std::vector<std::vector<double>> load;  // [bus][t-1], MW
  std::vector<std::vector<double>> wind;  // [farm][t-1], MW forecast
};

struct ScenarioSet {
  std::uint64_t seed = 0;
  std::string config_hash;
  Window window;
  std::vector<int> corridor_ids;
  std::vector<Scenario> scenarios;
};

StormSample sample_storm(const StormConfig& cfg, int storm_steps, double step_hours, std::size_t corridors,
                         std::size_t wind_farms, Stream& stream);

struct LoadSample {
  std::vector<double> kappa;
  std::vector<std::vector<double>> load;
};
LoadSample sample_loads(const grid::Network& net, const LoadConfig& cfg, int total_steps, Stream& stream);

/// Draw sources for damage sampling, one per purpose.
struct DamageSources {
  UniformSource& damage;
  UniformSource& wind;
  UniformSource& repair;
};

/// Per-step failure draws from the conditional fragility hazard; one repair
/// window per failed component; hardened outcomes are a thinning of the
/// unhardened ones so phi_w <= phi_o holds on every path.
DamageSeries sample_damage_series(const StormSample& storm, const grid::Network& net, const ScenarioConfig& cfg,
                                  DamageSources sources);

/// mu = (1 - x) phi_o + x phi_w, per corridor and storm step. x must be 0/1.
std::vector<BinarySeries> compose_line_status(std::span<const double> x, const DamageSeries& d);

ScenarioSet generate_set(const grid::Network& net, const ScenarioConfig& cfg, std::uint64_t seed, int count,
                         int threads = 1);

/// Outage episodes of a binary series as [start, length] pairs; `offset` is
/// added to every start.
std::vector<std::pair<int, int>> episodes(const BinarySeries& s, int offset = 0);

std::string config_hash(const ScenarioConfig& cfg);
std::string to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_config_from_json(std::string_view text);

std::string serialize(const ScenarioSet& set);
ScenarioSet parse_scenario_set(std::string_view text);
ScenarioSet load_scenario_set(const std::string& path);
void save_scenario_set(const ScenarioSet& set, const std::string& path);

}  // namespace icegrid::scenario
