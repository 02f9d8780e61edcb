#include "icegrid/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json_util.hpp"

namespace icegrid::scenario {

using nlohmann::json;

namespace {

// AR(1) standard-normal path with stationary N(0,1) marginals.
std::vector<double> ar1_path(int n, double phi, Stream& stream) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(static_cast<std::size_t>(n));
  const double innov = std::sqrt(std::max(0.0, 1.0 - phi * phi));
  for (int k = 0; k < n; ++k) {
    const double e = normal(stream);
    z[k] = k == 0 ? e : phi * z[k - 1] + innov * e;
  }
  return z;
}

}  // namespace

StormSample sample_storm(const StormConfig& cfg, int storm_steps, double step_hours, std::size_t corridors,
                         std::size_t wind_farms, Stream& stream) {
  if (storm_steps < 1) throw std::invalid_argument("storm must span at least one step");
  if (cfg.precip_std < 0 || cfg.wind_std < 0 || cfg.precip_mean < 0 || cfg.wind_mean < 0)
    throw std::invalid_argument("storm distribution parameters must be non-negative");
  if (!(cfg.ar1 > -1 && cfg.ar1 < 1)) throw std::invalid_argument("AR(1) coefficient must lie in (-1,1)");
  if (!(cfg.intensity_min >= 0 && cfg.intensity_min <= cfg.intensity_max))
    throw std::invalid_argument("invalid intensity range");

  StormSample out;
  const auto zp = ar1_path(storm_steps, cfg.ar1, stream);
  const auto zv = ar1_path(storm_steps, cfg.ar1, stream);
  out.weather.reserve(storm_steps);
  for (int k = 0; k < storm_steps; ++k) {
    hazard::WeatherStep w;
    w.precipitation_mm_h = std::max(0.0, cfg.precip_mean + cfg.precip_std * zp[k]);
    w.wind_speed_m_s = std::max(0.0, cfg.wind_mean + cfg.wind_std * zv[k]);
    w.freezing = cfg.freezing;
    w.duration_h = step_hours;
    out.weather.push_back(w);
  }
  auto intensity = [&] {
    return cfg.intensity_min + (cfg.intensity_max - cfg.intensity_min) * stream.uniform();
  };
  for (std::size_t c = 0; c < corridors; ++c) out.corridor_intensity.push_back(intensity());
  for (std::size_t w = 0; w < wind_farms; ++w) out.wind_intensity.push_back(intensity());
  return out;
}

LoadSample sample_loads(const grid::Network& net, const LoadConfig& cfg, int total_steps, Stream& stream) {
  if (cfg.kappa_std < 0 || cfg.kappa_min > cfg.kappa_max) throw std::invalid_argument("invalid load distribution");
  LoadSample out;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& bus : net.buses) {
    if (static_cast<int>(bus.base_load.size()) < total_steps)
      throw std::invalid_argument("load profile of bus " + std::to_string(bus.id) + " is shorter than the horizon");
    double kappa = cfg.kappa_mean;
    if (cfg.kappa_std > 0) {
      // Truncation by rejection; the clamp only triggers on absurd configs.
      int tries = 0;
      do {
        kappa = cfg.kappa_mean + cfg.kappa_std * normal(stream);
      } while ((kappa < cfg.kappa_min || kappa > cfg.kappa_max) && ++tries < 1000);
      kappa = std::clamp(kappa, cfg.kappa_min, cfg.kappa_max);
    }
    out.kappa.push_back(kappa);
    std::vector<double> series(bus.base_load.begin(), bus.base_load.begin() + total_steps);
    for (double& v : series) v *= kappa;
    out.load.push_back(std::move(series));
  }
  return out;
}

namespace {

// First failing step (or -1) of a component whose cumulative failure
// probability after each storm step is `cum`. One draw per step, always.
int first_failure(const std::vector<double>& cum, UniformSource& src) {
  int failed = -1;
  double prev = 0.0;
  for (std::size_t k = 0; k < cum.size(); ++k) {
    const double u = src.uniform();
    if (failed < 0 && u < hazard::conditional_hazard(prev, cum[k])) failed = static_cast<int>(k);
    prev = cum[k];
  }
  return failed;
}

void mark_window(BinarySeries& s, int start, int steps) {
  const int end = std::min<int>(static_cast<int>(s.size()), start + steps);
  for (int k = start; k < end; ++k) s[k] = 1;
}

}  // namespace

DamageSeries sample_damage_series(const StormSample& storm, const grid::Network& net, const ScenarioConfig& cfg,
                                  DamageSources src) {
  const int steps = static_cast<int>(storm.weather.size());
  if (steps < 1) throw std::invalid_argument("storm sample has no steps");
  if (storm.corridor_intensity.size() != net.corridors.size() ||
      storm.wind_intensity.size() != net.wind_farms.size())
    throw std::invalid_argument("storm sample does not match network");

  const auto base_r = hazard::accumulate_thickness(storm.weather);
  const double dt = cfg.window.step_hours;
  DamageSeries d;

  for (std::size_t c = 0; c < net.corridors.size(); ++c) {
    const auto& cor = net.corridors[c];
    std::vector<double> cum(steps);
    for (int k = 0; k < steps; ++k)
      cum[k] = hazard::segment_failure_prob(storm.corridor_intensity[c] * base_r[k], cor.design_thickness_mm);

    int fail = -1;
    for (int l = 0; l < cor.segment_count; ++l) {
      const int f = first_failure(cum, src.damage);
      if (f >= 0 && (fail < 0 || f < fail)) fail = f;
    }

    // Storm-level corridor failure probabilities with and without hardening.
    const double r_end = storm.corridor_intensity[c] * base_r.back();
    const double seg_o = hazard::segment_failure_prob(r_end, cor.design_thickness_mm);
    const double seg_w = hazard::segment_failure_prob(r_end, cor.hardening_factor * cor.design_thickness_mm);
    const double p_o = 1.0 - std::pow(1.0 - seg_o, cor.segment_count);
    const double p_w = 1.0 - std::pow(1.0 - seg_w, cor.segment_count);
    const double v = src.damage.uniform();
    const double u_repair = src.repair.uniform();

    BinarySeries phi_o(steps, 0), phi_w(steps, 0);
    double hours = 0.0;
    if (fail >= 0) {
      hours = hazard::repair_time_sample(cfg.repair, u_repair);
      const int len = hazard::repair_steps(hours, dt);
      mark_window(phi_o, fail, len);
      if (v * p_o < p_w) phi_w = phi_o;
    }
    d.phi_o.push_back(std::move(phi_o));
    d.phi_w.push_back(std::move(phi_w));
    d.corridor_repair_hours.push_back(hours);
  }

  for (std::size_t w = 0; w < net.wind_farms.size(); ++w) {
    std::vector<double> cum(steps);
    for (int k = 0; k < steps; ++k)
      cum[k] = hazard::wt_failure_prob(storm.wind_intensity[w] * base_r[k], net.wind_farms[w].fragility);
    const int fail = first_failure(cum, src.wind);
    const double u_repair = src.repair.uniform();
    BinarySeries out(steps, 0);
    double hours = 0.0;
    if (fail >= 0) {
      hours = hazard::repair_time_sample(cfg.repair, u_repair);
      mark_window(out, fail, hazard::repair_steps(hours, dt));
    }
    for (auto& g : out) g = 1 - g;  // availability
    d.gamma.push_back(std::move(out));
    d.wind_repair_hours.push_back(hours);
  }
  return d;
}

std::vector<BinarySeries> compose_line_status(std::span<const double> x, const DamageSeries& d) {
  if (x.size() != d.phi_o.size()) throw std::invalid_argument("hardening vector does not match corridors");
  std::vector<BinarySeries> mu;
  mu.reserve(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) {
    if (x[c] != 0.0 && x[c] != 1.0) throw std::invalid_argument("hardening decisions must be binary");
    mu.push_back(x[c] == 1.0 ? d.phi_w[c] : d.phi_o[c]);
  }
  return mu;
}

ScenarioSet generate_set(const grid::Network& net, const ScenarioConfig& cfg, std::uint64_t seed, int count,
                         int threads) {
  if (count < 1) throw std::invalid_argument("scenario count must be at least 1");
  const auto& win = cfg.window;
  if (win.storm_start < 1 || win.storm_start > win.storm_end || win.storm_end > win.total)
    throw std::invalid_argument("storm window outside horizon");

  ScenarioSet set;
  set.seed = seed;
  set.config_hash = config_hash(cfg);
  set.window = win;
  for (const auto& c : net.corridors) set.corridor_ids.push_back(c.id);
  set.scenarios.resize(static_cast<std::size_t>(count));

  auto make = [&](int id) {
    Stream storm_rng(seed, id, StreamPurpose::Storm), load_rng(seed, id, StreamPurpose::Load);
    Stream damage_rng(seed, id, StreamPurpose::Damage), wind_rng(seed, id, StreamPurpose::Wind),
        repair_rng(seed, id, StreamPurpose::Repair);
    Scenario s;
    s.id = id;
    s.probability = 1.0 / count;
    auto storm = sample_storm(cfg.storm, win.storm_steps(), win.step_hours, net.corridors.size(),
                              net.wind_farms.size(), storm_rng);
    auto loads = sample_loads(net, cfg.load, win.total, load_rng);
    s.kappa = std::move(loads.kappa);
    s.load = std::move(loads.load);
    s.damage = sample_damage_series(storm, net, cfg, {damage_rng, wind_rng, repair_rng});
    for (const auto& w : net.wind_farms) {
      if (static_cast<int>(w.forecast_profile.size()) < win.total)
        throw std::invalid_argument("wind profile shorter than the horizon");
      s.wind.emplace_back(w.forecast_profile.begin(), w.forecast_profile.begin() + win.total);
    }
    set.scenarios[static_cast<std::size_t>(id)] = std::move(s);
  };

  const int workers = std::clamp(threads, 1, count);
  if (workers == 1) {
    for (int id = 0; id < count; ++id) make(id);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (int id = w; id < count; id += workers) make(id);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    pool.clear();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return set;
}

std::vector<std::pair<int, int>> episodes(const BinarySeries& s, int offset) {
  std::vector<std::pair<int, int>> out;
  std::size_t k = 0;
  while (k < s.size()) {
    if (!s[k]) {
      ++k;
      continue;
    }
    std::size_t j = k;
    while (j < s.size() && s[j]) ++j;
    out.emplace_back(static_cast<int>(k) + offset, static_cast<int>(j - k));
    k = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json window_json(const Window& w) {
  return json{{"total", w.total}, {"storm_start", w.storm_start}, {"storm_end", w.storm_end},
              {"step_hours", w.step_hours}};
}

json config_json(const ScenarioConfig& cfg) {
  const auto& s = cfg.storm;
  const auto& l = cfg.load;
  return json{{"storm",
               {{"precip_mean", s.precip_mean},
                {"precip_std", s.precip_std},
                {"wind_mean", s.wind_mean},
                {"wind_std", s.wind_std},
                {"ar1", s.ar1},
                {"intensity_min", s.intensity_min},
                {"intensity_max", s.intensity_max},
                {"freezing", s.freezing}}},
              {"load",
               {{"kappa_mean", l.kappa_mean},
                {"kappa_std", l.kappa_std},
                {"kappa_min", l.kappa_min},
                {"kappa_max", l.kappa_max}}},
              {"repair", {{"alpha", cfg.repair.alpha}, {"beta", cfg.repair.beta}}},
              {"window", window_json(cfg.window)}};
}

Window window_from_json(const json& j, const std::string& path) {
  detail::check_keys(j, path, {"total", "storm_start", "storm_end", "step_hours"});
  Window w;
  w.total = detail::get_or(j, "total", w.total, path);
  w.storm_start = detail::get_or(j, "storm_start", w.storm_start, path);
  w.storm_end = detail::get_or(j, "storm_end", w.storm_end, path);
  w.step_hours = detail::get_or(j, "step_hours", w.step_hours, path);
  return w;
}

}  // namespace

std::string to_json(const ScenarioConfig& cfg) { return config_json(cfg).dump(); }

std::string config_hash(const ScenarioConfig& cfg) { return detail::fnv1a_hex(to_json(cfg)); }

ScenarioConfig scenario_config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("", std::string("invalid JSON: ") + e.what());
  }
  detail::check_keys(j, "", {"storm", "load", "repair", "window"});
  ScenarioConfig cfg;
  if (j.contains("storm")) {
    const auto& s = j["storm"];
    detail::check_keys(s, "/storm",
                       {"precip_mean", "precip_std", "wind_mean", "wind_std", "ar1", "intensity_min",
                        "intensity_max", "freezing"});
    auto& c = cfg.storm;
    c.precip_mean = detail::get_or(s, "precip_mean", c.precip_mean, "/storm");
    c.precip_std = detail::get_or(s, "precip_std", c.precip_std, "/storm");
    c.wind_mean = detail::get_or(s, "wind_mean", c.wind_mean, "/storm");
    c.wind_std = detail::get_or(s, "wind_std", c.wind_std, "/storm");
    c.ar1 = detail::get_or(s, "ar1", c.ar1, "/storm");
    c.intensity_min = detail::get_or(s, "intensity_min", c.intensity_min, "/storm");
    c.intensity_max = detail::get_or(s, "intensity_max", c.intensity_max, "/storm");
    c.freezing = detail::get_or(s, "freezing", c.freezing, "/storm");
  }
  if (j.contains("load")) {
    const auto& s = j["load"];
    detail::check_keys(s, "/load", {"kappa_mean", "kappa_std", "kappa_min", "kappa_max"});
    auto& c = cfg.load;
    c.kappa_mean = detail::get_or(s, "kappa_mean", c.kappa_mean, "/load");
    c.kappa_std = detail::get_or(s, "kappa_std", c.kappa_std, "/load");
    c.kappa_min = detail::get_or(s, "kappa_min", c.kappa_min, "/load");
    c.kappa_max = detail::get_or(s, "kappa_max", c.kappa_max, "/load");
  }
  if (j.contains("repair")) {
    const auto& s = j["repair"];
    detail::check_keys(s, "/repair", {"alpha", "beta"});
    cfg.repair.alpha = detail::get_or(s, "alpha", cfg.repair.alpha, "/repair");
    cfg.repair.beta = detail::get_or(s, "beta", cfg.repair.beta, "/repair");
    if (!(cfg.repair.alpha > 0) || !(cfg.repair.beta > 0)) throw ParseError("/repair", "parameters must be positive");
  }
  if (j.contains("window")) cfg.window = window_from_json(j["window"], "/window");
  return cfg;
}

std::string serialize(const ScenarioSet& set) {
  json scenarios = json::array();
  for (const auto& s : set.scenarios) {
    const int off = set.window.storm_start;
    auto rle = [&](const std::vector<BinarySeries>& series, bool invert) {
      json out = json::array();
      for (const auto& row : series) {
        BinarySeries r = row;
        if (invert)
          for (auto& b : r) b = 1 - b;
        json eps = json::array();
        for (auto [start, len] : episodes(r, off)) eps.push_back({start, len});
        out.push_back(eps);
      }
      return out;
    };
    scenarios.push_back({{"id", s.id},
                         {"probability", s.probability},
                         {"kappa", s.kappa},
                         {"load", s.load},
                         {"wind", s.wind},
                         {"phi_o", rle(s.damage.phi_o, false)},
                         {"phi_w", rle(s.damage.phi_w, false)},
                         {"wind_outages", rle(s.damage.gamma, true)},
                         {"repair_hours",
                          {{"corridors", s.damage.corridor_repair_hours}, {"wind_farms", s.damage.wind_repair_hours}}}});
  }
  json doc{{"meta",
            {{"seed", set.seed},
             {"config_hash", set.config_hash},
             {"count", set.scenarios.size()},
             {"horizon", window_json(set.window)},
             {"corridor_ids", set.corridor_ids}}},
           {"scenarios", scenarios}};
  return doc.dump(1) + "\n";
}

ScenarioSet parse_scenario_set(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("", std::string("invalid JSON: ") + e.what());
  }
  detail::check_keys(doc, "", {"meta", "scenarios"});
  ScenarioSet set;
  const auto& meta = doc.at("meta");
  detail::check_keys(meta, "/meta", {"seed", "config_hash", "count", "horizon", "corridor_ids"});
  set.seed = meta.at("seed").get<std::uint64_t>();
  set.config_hash = meta.at("config_hash").get<std::string>();
  set.window = window_from_json(meta.at("horizon"), "/meta/horizon");
  set.corridor_ids = meta.at("corridor_ids").get<std::vector<int>>();
  const int steps = set.window.storm_steps();
  const int off = set.window.storm_start;

  auto unrle = [&](const json& rows, const std::string& path, bool invert) {
    std::vector<BinarySeries> out;
    for (const auto& eps : rows) {
      BinarySeries s(steps, 0);
      for (const auto& ep : eps) {
        const int start = ep.at(0).get<int>() - off, len = ep.at(1).get<int>();
        if (start < 0 || len < 1 || start + len > steps) throw ParseError(path, "episode outside storm window");
        for (int k = start; k < start + len; ++k) s[k] = 1;
      }
      if (invert)
        for (auto& b : s) b = 1 - b;
      out.push_back(std::move(s));
    }
    return out;
  };

  const auto& arr = doc.at("scenarios");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& js = arr[i];
    const std::string path = "/scenarios/" + std::to_string(i);
    detail::check_keys(js, path,
                       {"id", "probability", "kappa", "load", "wind", "phi_o", "phi_w", "wind_outages", "repair_hours"});
    Scenario s;
    s.id = js.at("id").get<int>();
    s.probability = js.at("probability").get<double>();
    s.kappa = js.at("kappa").get<std::vector<double>>();
    s.load = js.at("load").get<std::vector<std::vector<double>>>();
    s.wind = js.at("wind").get<std::vector<std::vector<double>>>();
    s.damage.phi_o = unrle(js.at("phi_o"), path + "/phi_o", false);
    s.damage.phi_w = unrle(js.at("phi_w"), path + "/phi_w", false);
    s.damage.gamma = unrle(js.at("wind_outages"), path + "/wind_outages", true);
    s.damage.corridor_repair_hours = js.at("repair_hours").at("corridors").get<std::vector<double>>();
    s.damage.wind_repair_hours = js.at("repair_hours").at("wind_farms").get<std::vector<double>>();
    set.scenarios.push_back(std::move(s));
  }
  if (meta.at("count").get<std::size_t>() != set.scenarios.size())
    throw ParseError("/meta/count", "does not match the number of scenarios");
  return set;
}

ScenarioSet load_scenario_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open scenario file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_set(buf.str());
}

void save_scenario_set(const ScenarioSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << serialize(set);
}

}  // namespace icegrid::scenario
