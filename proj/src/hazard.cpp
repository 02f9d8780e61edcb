#include "icegrid/hazard.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace icegrid::hazard {

double liquid_water_content(double precip_mm_h) {
  if (!(precip_mm_h >= 0)) throw std::invalid_argument("precipitation rate must be non-negative");
  return 0.067 * std::pow(precip_mm_h, 0.846);
}

double accretion_step(const WeatherStep& step) {
  if (!(step.precipitation_mm_h >= 0) || !(step.wind_speed_m_s >= 0) || !(step.duration_h > 0))
    throw std::invalid_argument("invalid weather step");
  if (!step.freezing) return 0.0;
  const double lwc = liquid_water_content(step.precipitation_mm_h);
  const double rain = step.precipitation_mm_h * IceConstants::rho_water;
  const double wind = 3.6 * step.wind_speed_m_s * lwc;
  return step.duration_h / (IceConstants::rho_ice * std::numbers::pi) * std::sqrt(rain * rain + wind * wind);
}

std::vector<double> accumulate_thickness(std::span<const WeatherStep> steps) {
  if (steps.empty()) throw std::invalid_argument("weather sequence must be non-empty");
  std::vector<double> out;
  out.reserve(steps.size());
  double r = 0.0;
  for (const auto& s : steps) {
    r += accretion_step(s);
    out.push_back(r);
  }
  return out;
}

double segment_failure_prob(double r, double design_r) {
  if (!(design_r > 0)) throw std::invalid_argument("design ice thickness must be positive");
  if (!(r >= 0)) throw std::invalid_argument("ice thickness must be non-negative");
  if (r < design_r) return 0.0;
  if (r >= 5.0 * design_r) return 1.0;
  return std::clamp(std::exp(0.6931 * (r - design_r) / (4.0 * design_r)) - 1.0, 0.0, 1.0);
}

double corridor_failure_prob(std::span<const double> segment_probs) {
  double survive = 1.0;
  for (double p : segment_probs) {
    if (!(p >= 0 && p <= 1)) throw std::invalid_argument("segment probability outside [0,1]");
    survive *= 1.0 - p;
  }
  return 1.0 - survive;
}

double wt_failure_prob(double r, const WTFragility& frag) {
  if (!(r >= 0)) throw std::invalid_argument("ice thickness must be non-negative");
  if (!(frag.alpha_mm > 0) || !(frag.beta > 0)) throw std::invalid_argument("invalid turbine fragility");
  const double q = std::pow(r / frag.alpha_mm, frag.beta);
  if (std::isinf(q)) return 1.0;
  return q / (1.0 + q);
}

double repair_time_sample(const RepairDist& dist, double u) {
  if (!(u > 0 && u < 1)) throw std::invalid_argument("uniform draw must lie in (0,1)");
  return dist.alpha * std::pow(-std::log1p(-u), 1.0 / dist.beta);
}

double repair_time_density(const RepairDist& dist, double t) {
  if (t < 0) return 0.0;
  const double z = t / dist.alpha;
  return dist.beta / dist.alpha * std::pow(z, dist.beta - 1.0) * std::exp(-std::pow(z, dist.beta));
}

int repair_steps(double hours, double step_hours) {
  if (!(step_hours > 0)) throw std::invalid_argument("step length must be positive");
  // Guard against 4.0000000001 / 1.0 rounding up to an extra step.
  const double steps = std::ceil(hours / step_hours - 1e-9);
  return std::max(1, static_cast<int>(steps));
}

double conditional_hazard(double f_prev, double f_now) {
  if (f_prev >= 1.0) return 1.0;
  return std::clamp((f_now - f_prev) / (1.0 - f_prev), 0.0, 1.0);
}

}  // namespace icegrid::hazard
