#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "gridshed/common.hpp"

namespace gridshed {

enum class HazardType { Wildfire = 0, Hurricane = 1, Wind = 2 };

inline constexpr std::array<HazardType, 3> kAllHazards = {
    HazardType::Wildfire, HazardType::Hurricane, HazardType::Wind};

inline constexpr std::uint32_t hazard_tag(HazardType h) { return static_cast<std::uint32_t>(h); }

inline std::string_view to_string(HazardType h) {
  switch (h) {
    case HazardType::Wildfire: return "wildfire";
    case HazardType::Hurricane: return "hurricane";
    case HazardType::Wind: return "wind";
  }
  return "?";
}

inline HazardType hazard_from_string(std::string_view s, const std::string& where) {
  if (s == "wildfire") return HazardType::Wildfire;
  if (s == "hurricane") return HazardType::Hurricane;
  if (s == "wind") return HazardType::Wind;
  throw ParseError(where + ": unknown hazard label \"" + std::string(s) +
                   "\" (expected wildfire, hurricane, or wind)");
}

/// One hour of county-level outage data: the fraction of customers out.
struct OutageRecord {
  int day = 0;   // 1..365
  int hour = 0;  // 0..23
  std::string fips;
  double fraction_out = 0.0;  // in [0, 1]
};

/// Set of (day, county, hazard) storm-event flags; duplicates collapse.
class HazardCalendar {
 public:
  void add(int day, const std::string& fips, HazardType hazard) {
    flags_.insert({day, fips, hazard_tag(hazard)});
  }

  bool contains(int day, const std::string& fips, HazardType hazard) const {
    return flags_.count({day, fips, hazard_tag(hazard)}) != 0;
  }

  std::size_t size() const { return flags_.size(); }
  bool empty() const { return flags_.empty(); }

  struct Flag {
    int day;
    std::string fips;
    HazardType hazard;
  };

  std::vector<Flag> flags() const {
    std::vector<Flag> out;
    out.reserve(flags_.size());
    for (const auto& [day, fips, tag] : flags_) {
      out.push_back(Flag{day, fips, static_cast<HazardType>(tag)});
    }
    return out;
  }

 private:
  std::set<std::tuple<int, std::string, std::uint32_t>> flags_;
};

/// Daily outage-probability proxy per hazard: (hazard, day) -> fips -> rho,
/// where rho is the sum of that county's hourly outage fractions for the
/// day. Absent entries mean 0; values can exceed 1 (up to 24).
class RiskTable {
 public:
  using Slice = std::map<std::string, double>;

  void set(HazardType hazard, int day, const std::string& fips, double rho) {
    by_hazard_[hazard_tag(hazard)][day][fips] = rho;
  }

  /// Per-day slice, or nullptr when the day has no entries for the hazard.
  const Slice* slice(HazardType hazard, int day) const {
    const auto& days = by_hazard_[hazard_tag(hazard)];
    auto it = days.find(day);
    return it == days.end() ? nullptr : &it->second;
  }

  double rho(HazardType hazard, int day, const std::string& fips) const {
    const Slice* s = slice(hazard, day);
    if (!s) return 0.0;
    auto it = s->find(fips);
    return it == s->end() ? 0.0 : it->second;
  }

  const std::map<int, Slice>& days(HazardType hazard) const { return by_hazard_[hazard_tag(hazard)]; }

  bool empty() const {
    for (const auto& days : by_hazard_) {
      if (!days.empty()) return false;
    }
    return true;
  }

 private:
  std::array<std::map<int, Slice>, 3> by_hazard_;
};

/// Parses the outage CSV (header `day,hour,fips,fraction_out`). Fractions
/// outside [0, 1] and duplicate (day, hour, fips) keys are rejected, not
/// clamped; errors carry the file line number.
inline std::vector<OutageRecord> parse_outage_records(std::string_view text) {
  auto lines = split_lines(text);
  if (lines.empty()) throw ParseError("outages: empty file (expected header day,hour,fips,fraction_out)");
  if (trim(lines[0]) != "day,hour,fips,fraction_out")
    throw ParseError("outages: line 1: expected header \"day,hour,fips,fraction_out\"");

  std::vector<OutageRecord> out;
  std::set<std::tuple<int, int, std::string>> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    std::string where = "outages: line " + std::to_string(i + 1);
    auto fields = split(line, ',');
    if (fields.size() != 4) throw ParseError(where + ": expected 4 fields, got " + std::to_string(fields.size()));
    OutageRecord rec;
    rec.day = static_cast<int>(parse_int_strict(trim(fields[0]), where + ": day"));
    rec.hour = static_cast<int>(parse_int_strict(trim(fields[1]), where + ": hour"));
    rec.fips = std::string(trim(fields[2]));
    rec.fraction_out = parse_double_strict(trim(fields[3]), where + ": fraction_out");
    if (rec.day < 1 || rec.day > 365) throw ParseError(where + ": day out of range 1..365");
    if (rec.hour < 0 || rec.hour > 23) throw ParseError(where + ": hour out of range 0..23");
    if (rec.fips.empty()) throw ParseError(where + ": fips must be nonempty");
    if (rec.fraction_out < 0.0 || rec.fraction_out > 1.0)
      throw ParseError(where + ": fraction_out out of range [0, 1]: " + format_double(rec.fraction_out));
    if (!seen.insert({rec.day, rec.hour, rec.fips}).second)
      throw ParseError(where + ": duplicate (day, hour, fips) record");
    out.push_back(std::move(rec));
  }
  return out;
}

/// Parses the storm-event CSV (header `day,fips,hazard`), collapsing
/// duplicate flags.
inline HazardCalendar parse_storm_events(std::string_view text) {
  auto lines = split_lines(text);
  if (lines.empty()) throw ParseError("storms: empty file (expected header day,fips,hazard)");
  if (trim(lines[0]) != "day,fips,hazard")
    throw ParseError("storms: line 1: expected header \"day,fips,hazard\"");

  HazardCalendar calendar;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    std::string where = "storms: line " + std::to_string(i + 1);
    auto fields = split(line, ',');
    if (fields.size() != 3) throw ParseError(where + ": expected 3 fields, got " + std::to_string(fields.size()));
    int day = static_cast<int>(parse_int_strict(trim(fields[0]), where + ": day"));
    if (day < 1 || day > 365) throw ParseError(where + ": day out of range 1..365");
    std::string fips(trim(fields[1]));
    if (fips.empty()) throw ParseError(where + ": fips must be nonempty");
    HazardType hazard = hazard_from_string(trim(fields[2]), where);
    calendar.add(day, fips, hazard);
  }
  return calendar;
}

/// Pairs outage fractions with storm flags at (day, county, hazard)
/// granularity: a county-day contributes its summed hourly fractions to
/// hazard h only when flagged for h. A day flagged for two hazards
/// contributes its full rho to both slices.
inline RiskTable compute_risk_table(const std::vector<OutageRecord>& outages,
                                    const HazardCalendar& calendar) {
  std::map<std::pair<int, std::string>, double> daily_sum;
  for (const auto& rec : outages) daily_sum[{rec.day, rec.fips}] += rec.fraction_out;

  RiskTable table;
  for (const auto& flag : calendar.flags()) {
    auto it = daily_sum.find({flag.day, flag.fips});
    double rho = it == daily_sum.end() ? 0.0 : it->second;
    table.set(flag.hazard, flag.day, flag.fips, rho);
  }
  return table;
}

}  // namespace gridshed
