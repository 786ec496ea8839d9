#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridshed/common.hpp"
#include "gridshed/dcopf.hpp"
#include "gridshed/grid_model.hpp"
#include "gridshed/scenario.hpp"

namespace gridshed {

struct UndergroundPlan {
  std::string plan_id;
  std::vector<std::string> lines;  // sorted, duplicate-free

  friend bool operator==(const UndergroundPlan&, const UndergroundPlan&) = default;
};

inline UndergroundPlan parse_plan(std::string_view text) {
  nlohmann::json doc = detail::parse_json_document(text, "plan");
  if (!doc.is_object()) throw ParseError("plan: top-level value must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "plan_id" && key != "lines")
      throw ParseError("plan: unknown key \"" + key + "\"");
  }
  UndergroundPlan plan;
  plan.plan_id = detail::require_string(doc, "plan_id", "plan");
  const auto& lines = detail::require_array(doc, "lines", "plan");
  std::set<std::string> seen;
  for (const auto& entry : lines) {
    if (!entry.is_string()) throw ParseError("plan: lines entries must be strings");
    std::string id = entry.get<std::string>();
    if (!seen.insert(id).second) throw ParseError("plan: duplicate line \"" + id + "\"");
  }
  plan.lines.assign(seen.begin(), seen.end());
  return plan;
}

/// Returns the plan lines missing from the network, sorted; empty means the
/// plan is valid.
inline std::vector<std::string> validate_plan(const UndergroundPlan& plan, const Network& net) {
  std::vector<std::string> unknown;
  for (const auto& id : plan.lines) {
    if (!net.has_line(id)) unknown.push_back(id);
  }
  return unknown;
}

/// Surviving outages after undergrounding: exact set difference, sorted.
inline std::vector<std::string> apply_plan(const std::vector<std::string>& outaged,
                                           const UndergroundPlan& plan) {
  std::vector<std::string> sorted_out = outaged;
  std::sort(sorted_out.begin(), sorted_out.end());
  std::vector<std::string> result;
  std::set_difference(sorted_out.begin(), sorted_out.end(), plan.lines.begin(), plan.lines.end(),
                      std::back_inserter(result));
  return result;
}

struct ScenarioResult {
  HazardType hazard = HazardType::Wildfire;
  int day = 0;
  int k = 0;
  double pre_shed_mwh = 0.0;
  std::optional<double> post_shed_mwh;  // absent when no plan was supplied
  std::size_t pre_outage_count = 0;
  std::optional<std::size_t> post_outage_count;
  std::size_t overlap_count = 0;

  friend bool operator==(const ScenarioResult&, const ScenarioResult&) = default;
};

/// Daily shed solve, injectable so studies can share a cache across
/// scenarios with identical (day, outage set) keys.
using DayShedFn = std::function<double(int day, const std::vector<std::string>& outaged)>;

/// Pre/post evaluation of one scenario through a caller-supplied solve.
/// When the plan removes nothing the post value is the pre value copied,
/// not re-solved; the equality is exact by construction.
inline ScenarioResult evaluate_scenario_with(const DayShedFn& solve_shed,
                                             const OutageScenario& scenario,
                                             const UndergroundPlan* plan) {
  ScenarioResult result;
  result.hazard = scenario.hazard;
  result.day = scenario.day;
  result.k = scenario.k;
  result.pre_outage_count = scenario.outaged_lines.size();
  result.pre_shed_mwh = solve_shed(scenario.day, scenario.outaged_lines);
  if (!plan) return result;

  std::vector<std::string> post_lines = apply_plan(scenario.outaged_lines, *plan);
  result.post_outage_count = post_lines.size();
  result.overlap_count = scenario.outaged_lines.size() - post_lines.size();
  if (result.overlap_count == 0) {
    result.post_shed_mwh = result.pre_shed_mwh;
  } else {
    result.post_shed_mwh = solve_shed(scenario.day, post_lines);
  }
  return result;
}

inline ScenarioResult evaluate_scenario(const Network& net, const DemandProfile& profile,
                                        const OutageScenario& scenario, const UndergroundPlan* plan,
                                        const DcopfOptions& options) {
  for (const auto& id : scenario.outaged_lines) {
    if (!net.has_line(id))
      throw std::invalid_argument("scenario references unknown line \"" + id + "\"");
  }
  if (plan) {
    auto unknown = validate_plan(*plan, net);
    if (!unknown.empty())
      throw std::invalid_argument("plan references unknown line \"" + unknown.front() + "\"");
  }
  DayShedFn solve_shed = [&](int day, const std::vector<std::string>& outaged) {
    DispatchSolution solution;
    SolveReport report = solve_day(net, day, profile, outaged, options, solution);
    if (report.status != SolveStatus::Optimal) {
      throw SolveError("scenario " + std::string(to_string(scenario.hazard)) + "/d" +
                       std::to_string(scenario.day) + "/k" + std::to_string(scenario.k) + ": " +
                       to_string(report.status) +
                       (report.detail.empty() ? "" : " (" + report.detail + ")"));
    }
    return solution.objective_shed_mwh;
  };
  return evaluate_scenario_with(solve_shed, scenario, plan);
}

/// Whole-network demand for one day in MWh.
inline double total_daily_demand(const Network& net, const DemandProfile& profile, int day) {
  const auto& mult = profile.multipliers(day);
  double base = 0.0;
  for (std::size_t n = 0; n < net.buses().size(); ++n) base += net.base_demand(n);
  double total = 0.0;
  for (double m : mult) total += base * m;
  return total;
}

struct DayStats {
  HazardType hazard = HazardType::Wildfire;
  int day = 0;
  std::size_t scenario_count = 0;
  double min_shed_mwh = 0.0;
  double q1_shed_mwh = 0.0;
  double median_shed_mwh = 0.0;
  double q3_shed_mwh = 0.0;
  double max_shed_mwh = 0.0;
  double mean_shed_mwh = 0.0;
  double mean_delta_mwh = 0.0;   // mean of pre - post; 0 without a plan
  double shed_fraction = 0.0;    // mean shed over total daily demand
};

struct HazardOverlap {
  HazardType hazard = HazardType::Wildfire;
  std::size_t scenarios = 0;
  std::size_t with_overlap = 0;
  std::size_t fully_prevented = 0;  // nonempty outage set wholly undergrounded
};

struct StudySummary {
  std::vector<DayStats> days;           // sorted by (hazard, day)
  std::vector<HazardOverlap> hazards;   // hazards present in the results
};

/// Distribution statistics describe the pre-plan shed; deltas compare
/// against post where a plan was evaluated. Quartiles use inclusive linear
/// interpolation.
inline StudySummary summarize_study(const std::vector<ScenarioResult>& results, const Network& net,
                                    const DemandProfile& profile) {
  std::map<std::pair<std::uint32_t, int>, std::vector<const ScenarioResult*>> groups;
  for (const auto& r : results) groups[{hazard_tag(r.hazard), r.day}].push_back(&r);

  StudySummary summary;
  std::array<HazardOverlap, 3> overlap;
  std::array<bool, 3> seen{};
  for (auto& [key, rows] : groups) {
    auto [tag, day] = key;
    DayStats stats;
    stats.hazard = static_cast<HazardType>(tag);
    stats.day = day;
    stats.scenario_count = rows.size();

    std::vector<double> shed;
    shed.reserve(rows.size());
    double delta_sum = 0.0;
    for (const ScenarioResult* r : rows) {
      shed.push_back(r->pre_shed_mwh);
      delta_sum += r->pre_shed_mwh - r->post_shed_mwh.value_or(r->pre_shed_mwh);

      HazardOverlap& h = overlap[tag];
      h.hazard = stats.hazard;
      h.scenarios += 1;
      if (r->overlap_count > 0) h.with_overlap += 1;
      if (r->pre_outage_count > 0 && r->post_outage_count && *r->post_outage_count == 0)
        h.fully_prevented += 1;
      seen[tag] = true;
    }
    std::sort(shed.begin(), shed.end());
    stats.min_shed_mwh = shed.front();
    stats.q1_shed_mwh = quantile_linear(shed, 0.25);
    stats.median_shed_mwh = quantile_linear(shed, 0.5);
    stats.q3_shed_mwh = quantile_linear(shed, 0.75);
    stats.max_shed_mwh = shed.back();
    double sum = 0.0;
    for (double s : shed) sum += s;
    stats.mean_shed_mwh = sum / static_cast<double>(shed.size());
    stats.mean_delta_mwh = delta_sum / static_cast<double>(rows.size());
    double demand = total_daily_demand(net, profile, day);
    stats.shed_fraction = demand > 0.0 ? stats.mean_shed_mwh / demand : 0.0;
    summary.days.push_back(stats);
  }
  for (std::size_t tag = 0; tag < 3; ++tag) {
    if (seen[tag]) summary.hazards.push_back(overlap[tag]);
  }
  return summary;
}

}  // namespace gridshed
