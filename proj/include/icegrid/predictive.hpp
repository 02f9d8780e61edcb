#pragma once

#include <utility>
#include <vector>

namespace icegrid::predictive {

/// Preventive shedding penalty a^(b*tau) + c ($/MWh), tau = hours until the
/// storm starts. a > 1 and b >= 0 make it non-decreasing in tau.
struct PenaltySchedule {
  double a = 2.718281828459045;
  double b = 0.1;
  double c = 1999.0;
};

double penalty_at(const PenaltySchedule& sched, double tau_hours);

enum class Phase { PreAwareness, Preparation, Emergency };

/// Partition of steps 1..total into pre-awareness (T0), preparation (TN) and
/// emergency (TE) sets. Step numbers are 1-based.
struct Horizon {
  int total = 0;
  int storm_start = 0;
  int storm_end = 0;
  int xi = 0;
  double step_hours = 1.0;

  std::vector<int> pre_awareness() const;  // T0
  std::vector<int> preparation() const;    // TN
  std::vector<int> emergency() const;      // TE

  Phase phase(int t) const;
  bool is_normal(int t) const { return phase(t) != Phase::Emergency; }
  int storm_steps() const { return storm_end - storm_start + 1; }
  /// Hours between the start of step t and storm onset.
  double hours_to_storm(int t) const { return (storm_start - t) * step_hours; }
};

/// Builds the partition. Throws std::invalid_argument when xi exceeds the
/// pre-storm window or the storm window does not close the horizon.
Horizon partition_horizon(int total, int storm_start, int storm_end, int xi, double step_hours = 1.0);

/// Forecast of a storm attribute whose spread narrows as onset approaches.
struct ForecastEnvelope {
  std::vector<double> mu;
  std::vector<double> sigma;  // non-increasing
  bool valid() const;
};

/// [mu_t - z sigma_t, mu_t + z sigma_t] for 0-based index t.
std::pair<double, double> forecast_interval(const ForecastEnvelope& env, std::size_t t, double z);

}  // namespace icegrid::predictive
