#pragma once

#include <span>
#include <vector>

#include "icegrid/grid_model.hpp"

/// Ice accretion, fragility curves and repair-time distributions.
namespace icegrid::hazard {

struct WeatherStep {
  double precipitation_mm_h = 0.0;
  double wind_speed_m_s = 0.0;
  bool freezing = true;
  double duration_h = 1.0;
};

struct IceConstants {
  static constexpr double rho_ice = 0.9;    // g/cm^3
  static constexpr double rho_water = 1.0;  // g/cm^3
};

/// Weibull repair-time law (scale alpha in hours, shape beta).
struct RepairDist {
  double alpha = 4.0;
  double beta = 10.0;
};

using grid::WTFragility;

/// Empirical liquid water content (g/m^3) of freezing rain at `precip_mm_h`.
double liquid_water_content(double precip_mm_h);

/// Radial ice (mm) accreted during one weather step. Zero when not freezing.
double accretion_step(const WeatherStep& step);

/// Running ice thickness after each step; accretion only, no melting.
std::vector<double> accumulate_thickness(std::span<const WeatherStep> steps);

/// Segment failure probability at thickness `r` for design thickness `design_r`.
///   0                                  r <  R
///   exp(0.6931 (r - R) / (4 R)) - 1    R <= r < 5R
///   1                                  r >= 5R
double segment_failure_prob(double r, double design_r);

/// Series system: 1 - prod(1 - p_l).
double corridor_failure_prob(std::span<const double> segment_probs);

/// Log-logistic turbine icing failure probability.
double wt_failure_prob(double r, const WTFragility& frag);

/// Inverse-CDF Weibull draw for uniform `u` in (0,1): alpha * (-ln(1-u))^(1/beta).
double repair_time_sample(const RepairDist& dist, double u);

/// Weibull density of the repair-time law.
double repair_time_density(const RepairDist& dist, double t);

/// Whole time steps covering `hours` (at least one).
int repair_steps(double hours, double step_hours);

/// Per-step conditional hazard given the cumulative failure probability at the
/// previous and current step: max(0, (F_now - F_prev) / (1 - F_prev)).
double conditional_hazard(double f_prev, double f_now);

}  // namespace icegrid::hazard
