#pragma once

#include <array>
#include <map>
#include <numbers>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gridshed/common.hpp"
#include "json.hpp"

namespace gridshed {

// Angle-difference window applied when a line omits explicit bounds.
inline constexpr double kDefaultAngleLimitRad = std::numbers::pi / 6.0;

struct Bus {
  std::string id;
  double latitude = 0.0;
  double longitude = 0.0;

  bool operator==(const Bus&) const = default;
};

struct Line {
  std::string id;
  std::string from_bus;
  std::string to_bus;
  double susceptance = 0.0;  // MW per radian
  double flow_limit = 0.0;   // MW
  double angle_min = -kDefaultAngleLimitRad;
  double angle_max = kDefaultAngleLimitRad;

  bool operator==(const Line&) const = default;
};

struct Generator {
  std::string id;
  std::string bus;
  double p_min = 0.0;  // MW
  double p_max = 0.0;  // MW

  bool operator==(const Generator&) const = default;
};

struct LoadPoint {
  std::string bus;
  double base_demand = 0.0;  // MW

  bool operator==(const LoadPoint&) const = default;
};

/// Immutable transmission network. All collections are sorted by id and the
/// per-bus adjacency lists are derived at parse time, so the object is safe
/// to share across concurrent readers.
class Network {
 public:
  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }
  const std::vector<Generator>& generators() const { return generators_; }
  const std::vector<LoadPoint>& loads() const { return loads_; }

  bool has_bus(const std::string& id) const { return bus_index_.count(id) != 0; }
  bool has_line(const std::string& id) const { return line_index_.count(id) != 0; }

  std::size_t bus_index(const std::string& id) const { return bus_index_.at(id); }
  std::size_t line_index(const std::string& id) const { return line_index_.at(id); }

  /// Indices of lines whose from_bus / to_bus is the given bus.
  const std::vector<std::size_t>& lines_from(std::size_t bus) const { return lines_from_[bus]; }
  const std::vector<std::size_t>& lines_to(std::size_t bus) const { return lines_to_[bus]; }

  /// Indices of generators located at the given bus.
  const std::vector<std::size_t>& generators_at(std::size_t bus) const { return gens_at_[bus]; }

  /// Aggregated base demand per bus index (0 when the bus has no load point).
  double base_demand(std::size_t bus) const { return demand_[bus]; }

  bool operator==(const Network& other) const {
    return buses_ == other.buses_ && lines_ == other.lines_ &&
           generators_ == other.generators_ && loads_ == other.loads_;
  }

  friend Network parse_network(std::string_view text);

 private:
  void build_indexes() {
    bus_index_.clear();
    line_index_.clear();
    for (std::size_t i = 0; i < buses_.size(); ++i) bus_index_[buses_[i].id] = i;
    for (std::size_t i = 0; i < lines_.size(); ++i) line_index_[lines_[i].id] = i;
    lines_from_.assign(buses_.size(), {});
    lines_to_.assign(buses_.size(), {});
    gens_at_.assign(buses_.size(), {});
    demand_.assign(buses_.size(), 0.0);
    for (std::size_t i = 0; i < lines_.size(); ++i) {
      lines_from_[bus_index_.at(lines_[i].from_bus)].push_back(i);
      lines_to_[bus_index_.at(lines_[i].to_bus)].push_back(i);
    }
    for (std::size_t i = 0; i < generators_.size(); ++i) {
      gens_at_[bus_index_.at(generators_[i].bus)].push_back(i);
    }
    for (const auto& load : loads_) demand_[bus_index_.at(load.bus)] += load.base_demand;
  }

  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  std::vector<Generator> generators_;
  std::vector<LoadPoint> loads_;
  std::unordered_map<std::string, std::size_t> bus_index_;
  std::unordered_map<std::string, std::size_t> line_index_;
  std::vector<std::vector<std::size_t>> lines_from_;
  std::vector<std::vector<std::size_t>> lines_to_;
  std::vector<std::vector<std::size_t>> gens_at_;
  std::vector<double> demand_;
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& obj, const char* key,
                                           const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field \"" + key + "\"");
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key,
                                  const std::string& where) {
  const auto& v = require_field(obj, key, where);
  if (!v.is_string()) throw ParseError(where + ": field \"" + key + "\" must be a string");
  return v.get<std::string>();
}

inline double require_number(const nlohmann::json& obj, const char* key, const std::string& where) {
  const auto& v = require_field(obj, key, where);
  if (!v.is_number()) throw ParseError(where + ": field \"" + key + "\" must be a number");
  return v.get<double>();
}

inline double optional_number(const nlohmann::json& obj, const char* key, double fallback,
                              const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw ParseError(where + ": field \"" + key + "\" must be a number");
  return it->get<double>();
}

inline const nlohmann::json& require_array(const nlohmann::json& root, const char* key,
                                           const std::string& where) {
  auto it = root.find(key);
  if (it == root.end()) throw ParseError(where + ": missing top-level array \"" + key + "\"");
  if (!it->is_array()) throw ParseError(where + ": \"" + key + "\" must be an array");
  return *it;
}

inline nlohmann::json parse_json_document(std::string_view text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

}  // namespace detail

/// Parses a network file: a JSON document with top-level arrays `buses`,
/// `lines`, `generators`, `loads`. Duplicate load points on one bus are
/// aggregated by summation. Every referential or range violation is reported
/// with the entity id and its record position.
inline Network parse_network(std::string_view text) {
  using nlohmann::json;
  json root = detail::parse_json_document(text, "network");
  if (!root.is_object()) throw ParseError("network: document root must be an object");

  Network net;

  const json& buses = detail::require_array(root, "buses", "network");
  std::set<std::string> seen_bus;
  for (std::size_t i = 0; i < buses.size(); ++i) {
    std::string where = "network: buses[" + std::to_string(i) + "]";
    const json& rec = buses[i];
    if (!rec.is_object()) throw ParseError(where + ": record must be an object");
    Bus b;
    b.id = detail::require_string(rec, "id", where);
    if (b.id.empty()) throw ParseError(where + ": bus id must be nonempty");
    where += " (\"" + b.id + "\")";
    if (!seen_bus.insert(b.id).second) throw ParseError(where + ": duplicate bus id");
    b.latitude = detail::require_number(rec, "latitude", where);
    b.longitude = detail::require_number(rec, "longitude", where);
    if (b.latitude < -90.0 || b.latitude > 90.0)
      throw ParseError(where + ": latitude out of range [-90, 90]");
    if (b.longitude < -180.0 || b.longitude > 180.0)
      throw ParseError(where + ": longitude out of range [-180, 180]");
    net.buses_.push_back(std::move(b));
  }
  std::sort(net.buses_.begin(), net.buses_.end(),
            [](const Bus& a, const Bus& b) { return a.id < b.id; });

  const json& lines = detail::require_array(root, "lines", "network");
  std::set<std::string> seen_line;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string where = "network: lines[" + std::to_string(i) + "]";
    const json& rec = lines[i];
    if (!rec.is_object()) throw ParseError(where + ": record must be an object");
    Line l;
    l.id = detail::require_string(rec, "id", where);
    if (l.id.empty()) throw ParseError(where + ": line id must be nonempty");
    where += " (\"" + l.id + "\")";
    if (!seen_line.insert(l.id).second) throw ParseError(where + ": duplicate line id");
    l.from_bus = detail::require_string(rec, "from_bus", where);
    l.to_bus = detail::require_string(rec, "to_bus", where);
    if (l.from_bus == l.to_bus) throw ParseError(where + ": from_bus equals to_bus");
    for (const std::string* endpoint : {&l.from_bus, &l.to_bus}) {
      if (!seen_bus.count(*endpoint))
        throw ParseError(where + ": unknown bus id \"" + *endpoint + "\"");
    }
    l.susceptance = detail::require_number(rec, "susceptance", where);
    if (!(l.susceptance > 0.0)) throw ParseError(where + ": susceptance must be > 0");
    l.flow_limit = detail::require_number(rec, "flow_limit", where);
    if (l.flow_limit < 0.0) throw ParseError(where + ": flow_limit must be >= 0");
    l.angle_min = detail::optional_number(rec, "angle_min", -kDefaultAngleLimitRad, where);
    l.angle_max = detail::optional_number(rec, "angle_max", kDefaultAngleLimitRad, where);
    if (l.angle_min > 0.0 || l.angle_max < 0.0)
      throw ParseError(where + ": angle bounds must satisfy angle_min <= 0 <= angle_max");
    net.lines_.push_back(std::move(l));
  }
  std::sort(net.lines_.begin(), net.lines_.end(),
            [](const Line& a, const Line& b) { return a.id < b.id; });

  const json& gens = detail::require_array(root, "generators", "network");
  std::set<std::string> seen_gen;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    std::string where = "network: generators[" + std::to_string(i) + "]";
    const json& rec = gens[i];
    if (!rec.is_object()) throw ParseError(where + ": record must be an object");
    Generator g;
    g.id = detail::require_string(rec, "id", where);
    if (g.id.empty()) throw ParseError(where + ": generator id must be nonempty");
    where += " (\"" + g.id + "\")";
    if (!seen_gen.insert(g.id).second) throw ParseError(where + ": duplicate generator id");
    g.bus = detail::require_string(rec, "bus", where);
    if (!seen_bus.count(g.bus)) throw ParseError(where + ": unknown bus id \"" + g.bus + "\"");
    g.p_min = detail::require_number(rec, "p_min", where);
    g.p_max = detail::require_number(rec, "p_max", where);
    if (g.p_min < 0.0 || g.p_min > g.p_max)
      throw ParseError(where + ": generator bounds must satisfy 0 <= p_min <= p_max");
    net.generators_.push_back(std::move(g));
  }
  std::sort(net.generators_.begin(), net.generators_.end(),
            [](const Generator& a, const Generator& b) { return a.id < b.id; });

  const json& loads = detail::require_array(root, "loads", "network");
  std::map<std::string, double> demand_by_bus;
  for (std::size_t i = 0; i < loads.size(); ++i) {
    std::string where = "network: loads[" + std::to_string(i) + "]";
    const json& rec = loads[i];
    if (!rec.is_object()) throw ParseError(where + ": record must be an object");
    std::string bus = detail::require_string(rec, "bus", where);
    where += " (\"" + bus + "\")";
    if (!seen_bus.count(bus)) throw ParseError(where + ": unknown bus id \"" + bus + "\"");
    double demand = detail::require_number(rec, "base_demand", where);
    if (demand < 0.0) throw ParseError(where + ": base_demand must be >= 0");
    demand_by_bus[bus] += demand;
  }
  for (const auto& [bus, demand] : demand_by_bus) net.loads_.push_back(LoadPoint{bus, demand});

  net.build_indexes();
  return net;
}

/// Canonical serialization; parse_network(serialize_network(n)) == n.
inline std::string serialize_network(const Network& net) {
  nlohmann::ordered_json root;
  root["buses"] = nlohmann::ordered_json::array();
  for (const auto& b : net.buses()) {
    root["buses"].push_back({{"id", b.id}, {"latitude", b.latitude}, {"longitude", b.longitude}});
  }
  root["lines"] = nlohmann::ordered_json::array();
  for (const auto& l : net.lines()) {
    root["lines"].push_back({{"id", l.id},
                             {"from_bus", l.from_bus},
                             {"to_bus", l.to_bus},
                             {"susceptance", l.susceptance},
                             {"flow_limit", l.flow_limit},
                             {"angle_min", l.angle_min},
                             {"angle_max", l.angle_max}});
  }
  root["generators"] = nlohmann::ordered_json::array();
  for (const auto& g : net.generators()) {
    root["generators"].push_back(
        {{"id", g.id}, {"bus", g.bus}, {"p_min", g.p_min}, {"p_max", g.p_max}});
  }
  root["loads"] = nlohmann::ordered_json::array();
  for (const auto& l : net.loads()) {
    root["loads"].push_back({{"bus", l.bus}, {"base_demand", l.base_demand}});
  }
  return root.dump(2) + "\n";
}

/// Partition of bus ids into connected components of the graph that remains
/// after removing the given lines. Components and their members are sorted.
inline std::vector<std::vector<std::string>> connected_components(
    const Network& net, const std::set<std::string>& removed_lines) {
  for (const auto& id : removed_lines) {
    if (!net.has_line(id)) throw std::invalid_argument("unknown line id in removed set: " + id);
  }
  std::vector<bool> line_active(net.lines().size(), true);
  for (const auto& id : removed_lines) line_active[net.line_index(id)] = false;

  std::vector<int> comp(net.buses().size(), -1);
  int next_comp = 0;
  for (std::size_t start = 0; start < net.buses().size(); ++start) {
    if (comp[start] != -1) continue;
    comp[start] = next_comp;
    std::queue<std::size_t> frontier;
    frontier.push(start);
    while (!frontier.empty()) {
      std::size_t bus = frontier.front();
      frontier.pop();
      auto visit = [&](std::size_t line_idx, bool from_side) {
        if (!line_active[line_idx]) return;
        const Line& l = net.lines()[line_idx];
        std::size_t other = net.bus_index(from_side ? l.to_bus : l.from_bus);
        if (comp[other] == -1) {
          comp[other] = comp[bus];
          frontier.push(other);
        }
      };
      for (std::size_t li : net.lines_from(bus)) visit(li, true);
      for (std::size_t li : net.lines_to(bus)) visit(li, false);
    }
    ++next_comp;
  }

  std::vector<std::vector<std::string>> out(static_cast<std::size_t>(next_comp));
  for (std::size_t i = 0; i < net.buses().size(); ++i) {
    out[static_cast<std::size_t>(comp[i])].push_back(net.buses()[i].id);
  }
  // buses_ is sorted by id, so members arrive sorted and the first member of
  // each component is its lexicographic minimum.
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

/// Per-day hourly demand multipliers applied to every bus's base demand.
class DemandProfile {
 public:
  using Hours = std::array<double, 24>;

  bool has_day(int day) const { return days_.count(day) != 0; }

  const Hours& multipliers(int day) const {
    auto it = days_.find(day);
    if (it == days_.end())
      throw std::out_of_range("demand profile has no day " + std::to_string(day));
    return it->second;
  }

  const std::map<int, Hours>& days() const { return days_; }

  void set_day(int day, const Hours& hours) { days_[day] = hours; }

 private:
  std::map<int, Hours> days_;
};

/// Parses a demand profile: JSON object mapping day index ("1".."365") to an
/// array of exactly 24 non-negative multipliers.
inline DemandProfile parse_demand_profile(std::string_view text) {
  using nlohmann::json;
  json root = detail::parse_json_document(text, "demand profile");
  if (!root.is_object()) throw ParseError("demand profile: document root must be an object");
  DemandProfile profile;
  for (const auto& [key, value] : root.items()) {
    std::string where = "demand profile: day \"" + key + "\"";
    long long day = parse_int_strict(key, where);
    if (day < 1 || day > 365) throw ParseError(where + ": day index must be in 1..365");
    if (!value.is_array() || value.size() != 24)
      throw ParseError(where + ": expected an array of exactly 24 multipliers");
    DemandProfile::Hours hours{};
    for (std::size_t t = 0; t < 24; ++t) {
      if (!value[t].is_number())
        throw ParseError(where + ": multiplier at hour " + std::to_string(t) + " must be a number");
      hours[t] = value[t].get<double>();
      if (hours[t] < 0.0)
        throw ParseError(where + ": multiplier at hour " + std::to_string(t) + " must be >= 0");
    }
    if (profile.has_day(static_cast<int>(day)))
      throw ParseError(where + ": duplicate day index");
    profile.set_day(static_cast<int>(day), hours);
  }
  return profile;
}

}  // namespace gridshed
