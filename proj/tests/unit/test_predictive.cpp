#include <cmath>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "icegrid/predictive.hpp"

using namespace icegrid::predictive;

TEST_CASE("preventive shedding penalty") {
  const PenaltySchedule s;
  CHECK(penalty_at(s, 0.0) == doctest::Approx(2000.0).epsilon(1e-15));
  CHECK(penalty_at(s, 10.0) == doctest::Approx(1999.0 + std::exp(1.0)).epsilon(1e-14));
  const PenaltySchedule flat{2.718281828459045, 0.0, 1999.0};
  for (double tau : {0.0, 3.0, 12.0}) CHECK(penalty_at(flat, tau) == 2000.0);
  for (double tau = 0; tau < 24; tau += 0.5) CHECK(penalty_at(s, tau + 0.5) >= penalty_at(s, tau));
  CHECK_THROWS_AS(penalty_at(s, -1.0), std::invalid_argument);
}

TEST_CASE("horizon partition") {
  const auto h = partition_horizon(36, 13, 36, 4);
  CHECK(h.preparation() == std::vector<int>{9, 10, 11, 12});
  CHECK(h.pre_awareness().size() == 8);
  CHECK(h.pre_awareness().back() == 8);
  CHECK(h.emergency().size() == 24);
  CHECK(h.phase(9) == Phase::Preparation);
  CHECK(h.phase(13) == Phase::Emergency);
  CHECK(h.hours_to_storm(9) == 4.0);

  CHECK(partition_horizon(36, 13, 36, 0).preparation().empty());
  CHECK(partition_horizon(36, 13, 36, 12).pre_awareness().empty());

  for (int xi = 0; xi <= 12; ++xi) {
    const auto p = partition_horizon(36, 13, 36, xi);
    std::multiset<int> all;
    for (const auto& part : {p.pre_awareness(), p.preparation(), p.emergency()}) all.insert(part.begin(), part.end());
    CHECK(all.size() == 36);
    CHECK(std::set<int>(all.begin(), all.end()).size() == 36);
    CHECK(*all.begin() == 1);
    CHECK(*all.rbegin() == 36);
    CHECK(p.preparation().size() == static_cast<std::size_t>(xi));
  }
  CHECK_THROWS_AS(partition_horizon(36, 13, 36, 13), std::invalid_argument);
  CHECK_THROWS_AS(partition_horizon(36, 13, 37, 2), std::invalid_argument);
}

TEST_CASE("forecast envelope") {
  ForecastEnvelope env{{10, 10, 10}, {2, 1, 0}};
  CHECK(env.valid());
  CHECK(forecast_interval(env, 0, 1.0) == std::pair<double, double>{8, 12});
  CHECK(forecast_interval(env, 2, 1.96) == std::pair<double, double>{10, 10});
  for (std::size_t t = 0; t + 1 < 3; ++t) {
    const auto a = forecast_interval(env, t, 1.5), b = forecast_interval(env, t + 1, 1.5);
    CHECK(b.second - b.first <= a.second - a.first);
  }
  CHECK_THROWS_AS(forecast_interval(env, 0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(forecast_interval(env, 3, 1.0), std::out_of_range);
  CHECK_FALSE(ForecastEnvelope{{1, 1}, {1, 2}}.valid());
}
