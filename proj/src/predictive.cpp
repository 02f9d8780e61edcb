#include "icegrid/predictive.hpp"

#include <cmath>
#include <stdexcept>

namespace icegrid::predictive {

double penalty_at(const PenaltySchedule& sched, double tau_hours) {
  if (!(tau_hours >= 0)) throw std::invalid_argument("tau must be non-negative");
  if (!(sched.a > 1) || !(sched.b >= 0)) throw std::invalid_argument("penalty schedule requires a > 1 and b >= 0");
  return std::pow(sched.a, sched.b * tau_hours) + sched.c;
}

Horizon partition_horizon(int total, int storm_start, int storm_end, int xi, double step_hours) {
  if (total < 1) throw std::invalid_argument("horizon must contain at least one step");
  if (storm_start < 1 || storm_start > storm_end || storm_end > total)
    throw std::invalid_argument("storm window outside horizon");
  if (storm_end != total) throw std::invalid_argument("storm window must close the horizon");
  if (xi < 0 || xi > storm_start - 1) throw std::invalid_argument("preparation time exceeds pre-storm window");
  if (!(step_hours > 0)) throw std::invalid_argument("step length must be positive");
  return Horizon{total, storm_start, storm_end, xi, step_hours};
}

std::vector<int> Horizon::pre_awareness() const {
  std::vector<int> out;
  for (int t = 1; t < storm_start - xi; ++t) out.push_back(t);
  return out;
}

std::vector<int> Horizon::preparation() const {
  std::vector<int> out;
  for (int t = storm_start - xi; t < storm_start; ++t) out.push_back(t);
  return out;
}

std::vector<int> Horizon::emergency() const {
  std::vector<int> out;
  for (int t = storm_start; t <= storm_end; ++t) out.push_back(t);
  return out;
}

Phase Horizon::phase(int t) const {
  if (t >= storm_start) return Phase::Emergency;
  if (t >= storm_start - xi) return Phase::Preparation;
  return Phase::PreAwareness;
}

bool ForecastEnvelope::valid() const {
  if (mu.size() != sigma.size()) return false;
  for (std::size_t t = 0; t < sigma.size(); ++t) {
    if (sigma[t] < 0) return false;
    if (t > 0 && sigma[t] > sigma[t - 1]) return false;
  }
  return true;
}

std::pair<double, double> forecast_interval(const ForecastEnvelope& env, std::size_t t, double z) {
  if (z < 0) throw std::invalid_argument("z-score must be non-negative");
  if (t >= env.mu.size() || t >= env.sigma.size()) throw std::out_of_range("forecast step out of range");
  return {env.mu[t] - z * env.sigma[t], env.mu[t] + z * env.sigma[t]};
}

}  // namespace icegrid::predictive
