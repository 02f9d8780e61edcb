#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace icegrid::grid {

struct Bus {
  int id = 0;
  bool is_critical = false;
  /// Base demand per time step (MW, or per unit after to_per_unit).
  std::vector<double> base_load;
  double alpha_shed = 0.2;  ///< preventive shedding cap as a fraction of load
  double beta_shed = 1.0;   ///< emergency shedding cap as a fraction of load
};

struct Corridor {
  int id = 0;
  int from_bus = 0;
  int to_bus = 0;
  double susceptance_b = 0.0;  ///< per unit on the network base
  double capacity_pmax = 0.0;
  double length_miles = 0.0;
  int segment_count = 1;
  double design_thickness_mm = 0.0;  ///< R before hardening
  double hardening_factor = 2.0;     ///< hardened R = factor * design R
  double hardening_cost = 0.0;       ///< $
};

struct Generator {
  int bus = 0;
  double p_min = 0.0;
  double p_max = 0.0;
  double marginal_cost = 0.0;  ///< $/MWh
};

struct WTFragility {
  double alpha_mm = 20.0;
  double beta = 4.0;
};

struct WindFarm {
  int bus = 0;
  double capacity = 0.0;
  std::vector<double> forecast_profile;
  WTFragility fragility;
};

struct StorageSite {
  int bus = 0;
  double energy_cost_per_kwh = 75.0;
  double power_cost_per_kw = 1300.0;
  double ep_ratio_hours = 6.0;
  double eta_charge = 0.9;
  double eta_discharge = 0.9;
  double z_max = 0.0;  ///< sizing cap (MWh, or per-unit hours)
};

struct Network {
  std::string name;
  double base_mva = 100.0;
  /// 1.0 while power quantities are in MW; equals the base after to_per_unit.
  double power_unit = 1.0;
  std::vector<Bus> buses;
  std::vector<Corridor> corridors;
  std::vector<Generator> generators;
  std::vector<WindFarm> wind_farms;
  std::vector<StorageSite> storage_sites;

  /// Position of a bus id in `buses`, or npos.
  std::size_t bus_index(int id) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Network-wide defaults applied while parsing.
struct ParseDefaults {
  double hardening_cost_per_mile = 1.0e6;
  double miles_per_segment = 10.0;
  double hardening_factor = 2.0;
  double alpha_critical = 0.1;
  double alpha_normal = 0.2;
  double beta_critical = 0.2;
  double beta_normal = 1.0;
};

/// Parses the network JSON document. Throws ParseError on schema violations
/// and ValidationError when the result breaks a network invariant.
Network parse_network(std::string_view document, const ParseDefaults& defaults = {});
Network load_network(const std::string& path, const ParseDefaults& defaults = {});

/// Every violated invariant, one description per entry. Empty means valid.
std::vector<std::string> validate(const Network& net);

/// Divides every power and energy quantity by `base_mva` (relative to the
/// current unit). Susceptances are already per unit and stay unchanged.
Network to_per_unit(const Network& net, double base_mva);
/// Inverse of to_per_unit: back to MW quantities.
Network from_per_unit(const Network& net);

}  // namespace icegrid::grid
