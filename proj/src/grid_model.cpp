#include "icegrid/grid_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "icegrid/error.hpp"

namespace icegrid::grid {

using nlohmann::json;

std::size_t Network::bus_index(int id) const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == id) return i;
  return npos;
}

namespace {

class Reader {
 public:
  Reader(const json& node, std::string path, std::set<std::string> allowed)
      : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ParseError(path_, "expected an object");
    for (const auto& [key, _] : node_.items())
      if (!allowed.count(key)) throw ParseError(path_ + "/" + key, "unknown key");
  }

  bool has(const std::string& key) const { return node_.contains(key) && !node_[key].is_null(); }
  std::string at(const std::string& key) const { return path_ + "/" + key; }

  double number(const std::string& key) const {
    if (!has(key)) throw ParseError(at(key), "missing required number");
    return as_number(node_[key], at(key));
  }
  double number(const std::string& key, double fallback) const {
    return has(key) ? as_number(node_[key], at(key)) : fallback;
  }
  int integer(const std::string& key) const {
    if (!has(key)) throw ParseError(at(key), "missing required integer");
    return as_integer(node_[key], at(key));
  }
  int integer(const std::string& key, int fallback) const {
    return has(key) ? as_integer(node_[key], at(key)) : fallback;
  }
  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!node_[key].is_boolean()) throw ParseError(at(key), "expected a boolean");
    return node_[key].get<bool>();
  }
  const json& raw(const std::string& key) const { return node_[key]; }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ParseError(path, "expected a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) throw ParseError(path, "expected a finite number");
    return x;
  }
  static int as_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ParseError(path, "expected an integer");
    return v.get<int>();
  }

 private:
  const json& node_;
  std::string path_;
};

std::vector<double> number_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(Reader::as_number(v[i], path + "/" + std::to_string(i)));
  return out;
}

// A profile is either an explicit array or the name of an entry in `profiles`,
// in which case the named shape is multiplied by `scale`.
std::vector<double> resolve_profile(const json& v, const std::string& path,
                                    const std::map<std::string, std::vector<double>>& profiles,
                                    double scale, bool scale_arrays) {
  if (v.is_string()) {
    auto it = profiles.find(v.get<std::string>());
    if (it == profiles.end()) throw ParseError(path, "unknown profile '" + v.get<std::string>() + "'");
    std::vector<double> out = it->second;
    for (double& x : out) x *= scale;
    return out;
  }
  std::vector<double> out = number_array(v, path);
  if (scale_arrays)
    for (double& x : out) x *= scale;
  return out;
}

void scale_all(std::vector<double>& v, double k) {
  for (double& x : v) x *= k;
}

Network rescale(const Network& net, double factor, double new_unit) {
  Network out = net;
  out.power_unit = new_unit;
  for (auto& b : out.buses) scale_all(b.base_load, factor);
  for (auto& c : out.corridors) c.capacity_pmax *= factor;
  for (auto& g : out.generators) {
    g.p_min *= factor;
    g.p_max *= factor;
  }
  for (auto& w : out.wind_farms) {
    w.capacity *= factor;
    scale_all(w.forecast_profile, factor);
  }
  for (auto& s : out.storage_sites) s.z_max *= factor;
  return out;
}

}  // namespace

Network parse_network(std::string_view document, const ParseDefaults& defaults) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError("", std::string("invalid JSON: ") + e.what());
  }

  Reader top(doc, "", {"name", "base_mva", "profiles", "buses", "corridors", "generators",
                       "wind_farms", "storage_sites", "hardening_cost_per_mile"});
  Network net;
  if (top.has("name")) {
    if (!doc["name"].is_string()) throw ParseError("/name", "expected a string");
    net.name = doc["name"].get<std::string>();
  }
  net.base_mva = top.number("base_mva", 100.0);
  if (net.base_mva <= 0) throw ParseError("/base_mva", "must be positive");
  const double cost_per_mile = top.number("hardening_cost_per_mile", defaults.hardening_cost_per_mile);

  std::map<std::string, std::vector<double>> profiles;
  if (top.has("profiles")) {
    if (!doc["profiles"].is_object()) throw ParseError("/profiles", "expected an object");
    for (const auto& [name, values] : doc["profiles"].items())
      profiles[name] = number_array(values, "/profiles/" + name);
  }

  auto array_of = [&](const char* key) -> const json& {
    static const json empty = json::array();
    if (!top.has(key)) return empty;
    if (!doc[key].is_array()) throw ParseError(std::string("/") + key, "expected an array");
    return doc[key];
  };

  const json& buses = array_of("buses");
  if (buses.empty()) throw ValidationError("network must contain at least one bus");
  for (std::size_t i = 0; i < buses.size(); ++i) {
    const std::string path = "/buses/" + std::to_string(i);
    Reader r(buses[i], path, {"id", "critical", "load_profile", "load_scale", "alpha_shed", "beta_shed"});
    Bus b;
    b.id = r.integer("id");
    b.is_critical = r.boolean("critical", false);
    const double scale = r.number("load_scale", 1.0);
    if (!r.has("load_profile")) throw ParseError(r.at("load_profile"), "missing load profile");
    b.base_load = resolve_profile(r.raw("load_profile"), r.at("load_profile"), profiles, scale, true);
    b.alpha_shed = r.number("alpha_shed", b.is_critical ? defaults.alpha_critical : defaults.alpha_normal);
    b.beta_shed = r.number("beta_shed", b.is_critical ? defaults.beta_critical : defaults.beta_normal);
    net.buses.push_back(std::move(b));
  }

  const json& corridors = array_of("corridors");
  for (std::size_t i = 0; i < corridors.size(); ++i) {
    const std::string path = "/corridors/" + std::to_string(i);
    Reader r(corridors[i], path,
             {"id", "from", "to", "b_pu", "pmax_mw", "length_miles", "segments", "r_base_mm",
              "hardening_factor", "hardening_cost"});
    Corridor c;
    c.id = r.integer("id");
    c.from_bus = r.integer("from");
    c.to_bus = r.integer("to");
    c.susceptance_b = r.number("b_pu");
    c.capacity_pmax = r.number("pmax_mw");
    c.length_miles = r.number("length_miles");
    if (c.length_miles < 0) throw ParseError(r.at("length_miles"), "must be non-negative");
    const int default_segments =
        std::max(1, static_cast<int>(std::ceil(c.length_miles / defaults.miles_per_segment)));
    c.segment_count = r.integer("segments", default_segments);
    c.design_thickness_mm = r.number("r_base_mm");
    c.hardening_factor = r.number("hardening_factor", defaults.hardening_factor);
    c.hardening_cost = r.number("hardening_cost", cost_per_mile * c.length_miles);
    net.corridors.push_back(c);
  }

  const json& gens = array_of("generators");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    Reader r(gens[i], "/generators/" + std::to_string(i), {"bus", "p_min_mw", "p_max_mw", "cost_per_mwh"});
    Generator g;
    g.bus = r.integer("bus");
    g.p_min = r.number("p_min_mw", 0.0);
    g.p_max = r.number("p_max_mw");
    g.marginal_cost = r.number("cost_per_mwh", 0.0);
    net.generators.push_back(g);
  }

  const json& winds = array_of("wind_farms");
  for (std::size_t i = 0; i < winds.size(); ++i) {
    const std::string path = "/wind_farms/" + std::to_string(i);
    Reader r(winds[i], path, {"bus", "capacity_mw", "profile", "fragility"});
    WindFarm w;
    w.bus = r.integer("bus");
    w.capacity = r.number("capacity_mw");
    if (!r.has("profile")) throw ParseError(r.at("profile"), "missing wind profile");
    // Named profiles are capacity factors; explicit arrays are MW.
    w.forecast_profile = resolve_profile(r.raw("profile"), r.at("profile"), profiles, w.capacity, false);
    if (r.has("fragility")) {
      Reader f(r.raw("fragility"), r.at("fragility"), {"alpha_mm", "beta"});
      w.fragility.alpha_mm = f.number("alpha_mm", w.fragility.alpha_mm);
      w.fragility.beta = f.number("beta", w.fragility.beta);
    }
    net.wind_farms.push_back(std::move(w));
  }

  const json& sites = array_of("storage_sites");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    Reader r(sites[i], "/storage_sites/" + std::to_string(i),
             {"bus", "z_max_mwh", "energy_cost_per_kwh", "power_cost_per_kw", "ep_ratio_hours", "eta_charge",
              "eta_discharge"});
    StorageSite s;
    s.bus = r.integer("bus");
    s.z_max = r.number("z_max_mwh");
    s.energy_cost_per_kwh = r.number("energy_cost_per_kwh", s.energy_cost_per_kwh);
    s.power_cost_per_kw = r.number("power_cost_per_kw", s.power_cost_per_kw);
    s.ep_ratio_hours = r.number("ep_ratio_hours", s.ep_ratio_hours);
    s.eta_charge = r.number("eta_charge", s.eta_charge);
    s.eta_discharge = r.number("eta_discharge", s.eta_discharge);
    net.storage_sites.push_back(s);
  }

  // Referential integrity first so the message names the offending element.
  for (const auto& c : net.corridors)
    for (int end : {c.from_bus, c.to_bus})
      if (net.bus_index(end) == Network::npos)
        throw ValidationError("corridor " + std::to_string(c.id) + " references unknown bus " +
                              std::to_string(end));
  auto check_bus = [&](const char* what, std::size_t i, int bus) {
    if (net.bus_index(bus) == Network::npos)
      throw ValidationError(std::string(what) + " " + std::to_string(i) + " references unknown bus " +
                            std::to_string(bus));
  };
  for (std::size_t i = 0; i < net.generators.size(); ++i) check_bus("generator", i, net.generators[i].bus);
  for (std::size_t i = 0; i < net.wind_farms.size(); ++i) check_bus("wind farm", i, net.wind_farms[i].bus);
  for (std::size_t i = 0; i < net.storage_sites.size(); ++i)
    check_bus("storage site", i, net.storage_sites[i].bus);

  auto problems = validate(net);
  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "invalid network:";
    for (const auto& p : problems) msg << "\n  " << p;
    throw ValidationError(msg.str());
  }
  return net;
}

Network load_network(const std::string& path, const ParseDefaults& defaults) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open network file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_network(buf.str(), defaults);
}

std::vector<std::string> validate(const Network& net) {
  std::vector<std::string> out;
  auto fmt = [](const std::string& what, int id, const std::string& problem) {
    return what + " " + std::to_string(id) + ": " + problem;
  };

  if (net.buses.empty()) out.push_back("network must contain at least one bus");
  std::set<int> ids;
  for (const auto& b : net.buses) {
    if (!ids.insert(b.id).second) out.push_back(fmt("bus", b.id, "duplicate id"));
    if (b.alpha_shed < 0 || b.alpha_shed > 1) out.push_back(fmt("bus", b.id, "alpha_shed outside [0,1]"));
    if (b.beta_shed < 0 || b.beta_shed > 1) out.push_back(fmt("bus", b.id, "beta_shed outside [0,1]"));
    for (double x : b.base_load)
      if (x < 0) {
        out.push_back(fmt("bus", b.id, "negative load"));
        break;
      }
  }

  std::set<int> corridor_ids;
  for (const auto& c : net.corridors) {
    if (!corridor_ids.insert(c.id).second) out.push_back(fmt("corridor", c.id, "duplicate id"));
    if (net.bus_index(c.from_bus) == Network::npos || net.bus_index(c.to_bus) == Network::npos)
      out.push_back(fmt("corridor", c.id, "references unknown bus"));
    if (c.from_bus == c.to_bus) out.push_back(fmt("corridor", c.id, "connects a bus to itself"));
    if (c.segment_count < 1) out.push_back(fmt("corridor", c.id, "segment count must be at least 1"));
    if (!(c.capacity_pmax > 0)) out.push_back(fmt("corridor", c.id, "capacity must be positive"));
    if (!(c.hardening_factor > 1)) out.push_back(fmt("corridor", c.id, "hardening factor must exceed 1"));
    if (!(c.design_thickness_mm > 0)) out.push_back(fmt("corridor", c.id, "design ice thickness must be positive"));
    if (!(c.susceptance_b > 0)) out.push_back(fmt("corridor", c.id, "susceptance must be positive"));
    if (c.hardening_cost < 0) out.push_back(fmt("corridor", c.id, "negative hardening cost"));
  }

  for (std::size_t i = 0; i < net.generators.size(); ++i) {
    const auto& g = net.generators[i];
    if (net.bus_index(g.bus) == Network::npos) out.push_back(fmt("generator", int(i), "references unknown bus"));
    if (g.p_min < 0 || g.p_min > g.p_max) out.push_back(fmt("generator", int(i), "requires 0 <= p_min <= p_max"));
  }
  for (std::size_t i = 0; i < net.wind_farms.size(); ++i) {
    const auto& w = net.wind_farms[i];
    if (net.bus_index(w.bus) == Network::npos) out.push_back(fmt("wind farm", int(i), "references unknown bus"));
    for (double p : w.forecast_profile)
      if (p < 0 || p > w.capacity * (1 + 1e-12)) {
        out.push_back(fmt("wind farm", int(i), "profile outside [0, capacity]"));
        break;
      }
    if (!(w.fragility.alpha_mm > 0) || !(w.fragility.beta > 0))
      out.push_back(fmt("wind farm", int(i), "fragility parameters must be positive"));
  }
  for (std::size_t i = 0; i < net.storage_sites.size(); ++i) {
    const auto& s = net.storage_sites[i];
    if (net.bus_index(s.bus) == Network::npos) out.push_back(fmt("storage site", int(i), "references unknown bus"));
    if (!(s.ep_ratio_hours > 0)) out.push_back(fmt("storage site", int(i), "energy-to-power ratio must be positive"));
    if (!(s.eta_charge > 0 && s.eta_charge <= 1) || !(s.eta_discharge > 0 && s.eta_discharge <= 1))
      out.push_back(fmt("storage site", int(i), "efficiencies must lie in (0,1]"));
    if (s.z_max < 0) out.push_back(fmt("storage site", int(i), "negative sizing cap"));
  }

  // Connectivity over all corridors (union-find on bus positions).
  if (!net.buses.empty()) {
    std::vector<std::size_t> parent(net.buses.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& c : net.corridors) {
      auto a = net.bus_index(c.from_bus), b = net.bus_index(c.to_bus);
      if (a == Network::npos || b == Network::npos) continue;
      parent[find(a)] = find(b);
    }
    std::size_t root = find(0);
    for (std::size_t i = 1; i < parent.size(); ++i)
      if (find(i) != root) {
        out.push_back("network not connected");
        break;
      }
  }
  return out;
}

Network to_per_unit(const Network& net, double base_mva) {
  if (!(base_mva > 0)) throw std::invalid_argument("base_mva must be positive");
  return rescale(net, net.power_unit / base_mva, base_mva);
}

Network from_per_unit(const Network& net) { return rescale(net, net.power_unit, 1.0); }

}  // namespace icegrid::grid
