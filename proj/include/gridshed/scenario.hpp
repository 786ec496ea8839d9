#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "gridshed/common.hpp"
#include "gridshed/geo.hpp"
#include "gridshed/grid_model.hpp"
#include "gridshed/hazard_data.hpp"
#include "gridshed/random.hpp"

namespace gridshed {

struct BetaPrimeParams {
  double alpha = 0.02;
  double beta = 3.0;  // must exceed 1 so the mean alpha/(beta-1) is finite

  void validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("beta-prime alpha must be > 0");
    if (!(beta > 1.0)) throw std::invalid_argument("beta-prime beta must be > 1");
  }

  double mean() const { return alpha / (beta - 1.0); }
};

struct ScenarioConfig {
  std::uint64_t base_seed = 0;
  int scenarios_per_day = 100;
  BetaPrimeParams params;

  void validate() const {
    if (scenarios_per_day < 1) throw std::invalid_argument("scenarios_per_day must be >= 1");
    params.validate();
  }
};

struct OutageScenario {
  HazardType hazard = HazardType::Wildfire;
  int day = 0;
  int k = 0;
  std::vector<std::string> outaged_lines;  // sorted, duplicate-free
  std::optional<std::map<std::string, double>> draws;  // present when traced

  friend bool operator==(const OutageScenario&, const OutageScenario&) = default;
};

/// Sort key for scenario emission: hazard tag, then day, then k.
inline bool scenario_order_less(const OutageScenario& a, const OutageScenario& b) {
  return std::tuple(hazard_tag(a.hazard), a.day, a.k) < std::tuple(hazard_tag(b.hazard), b.day, b.k);
}

/// One beta-prime variate as a ratio of unit-scale gammas. The numerator
/// gamma is drawn first; callers relying on stream replay depend on that
/// order.
inline double sample_beta_prime(RandomStream& stream, const BetaPrimeParams& params) {
  double g1 = stream.next_gamma(params.alpha);
  double g2 = stream.next_gamma(params.beta);
  return g1 / g2;
}

/// Outage membership given fixed draws: a line is out iff some county it
/// crosses carries risk strictly above the line's draw. Useful for replaying
/// traced scenarios under perturbed risk.
inline std::vector<std::string> lines_outaged_by(const std::map<std::string, double>& draws,
                                                 const RiskTable::Slice* risk,
                                                 const LineRegionIndex& index) {
  std::vector<std::string> out;
  if (!risk) return out;
  for (const auto& [line_id, draw] : draws) {
    for (const auto& fips : index.counties(line_id)) {
      auto it = risk->find(fips);
      if (it != risk->end() && draw < it->second) {
        out.push_back(line_id);
        break;
      }
    }
  }
  return out;
}

/// Builds the outage set for one (hazard, day, k) cell. Every line in the
/// index consumes exactly one draw, in ascending line id order, from a
/// stream keyed by (base_seed, hazard, day, k); results are therefore
/// independent of thread count and call order. When the day carries no
/// positive risk the draws are skipped entirely unless tracing asked for
/// them; the empty result is identical either way.
inline OutageScenario generate_outage_set(const Network& net, HazardType hazard, int day, int k,
                                          const RiskTable::Slice* risk, const LineRegionIndex& index,
                                          const ScenarioConfig& config, bool trace = false) {
  config.validate();
  if (k < 0 || k >= config.scenarios_per_day)
    throw std::invalid_argument("scenario index k out of range");
  for (const auto& [line_id, counties] : index.counties_by_line) {
    if (!net.has_line(line_id))
      throw std::invalid_argument("line region index references unknown line \"" + line_id + "\"");
  }

  OutageScenario scenario;
  scenario.hazard = hazard;
  scenario.day = day;
  scenario.k = k;

  bool any_risk = false;
  if (risk) {
    for (const auto& [fips, rho] : *risk) {
      if (rho > 0.0) {
        any_risk = true;
        break;
      }
    }
  }
  if (!any_risk && !trace) return scenario;

  RandomStream stream(derive_stream_key(config.base_seed, hazard_tag(hazard), day, k));
  std::map<std::string, double> draws;
  for (const auto& [line_id, counties] : index.counties_by_line) {
    double o = sample_beta_prime(stream, config.params);
    draws.emplace(line_id, o);
    if (!risk) continue;
    for (const auto& fips : counties) {
      auto it = risk->find(fips);
      if (it != risk->end() && o < it->second) {
        scenario.outaged_lines.push_back(line_id);
        break;
      }
    }
  }
  if (trace) scenario.draws = std::move(draws);
  return scenario;
}

struct OutageStats {
  double avg_outages = 0.0;  // mean |outage set| over scenarios with >= 1 outage
  std::size_t max_outages = 0;
  std::size_t days_with_outages = 0;
  std::size_t scenarios_with_outages = 0;
};

struct OutageSummary {
  std::array<OutageStats, 3> by_hazard;

  const OutageStats& stats(HazardType h) const { return by_hazard[hazard_tag(h)]; }
};

inline OutageSummary summarize_outages(const std::vector<OutageScenario>& scenarios) {
  OutageSummary summary;
  std::array<std::size_t, 3> size_sum{};
  std::array<std::set<int>, 3> days{};
  for (const auto& s : scenarios) {
    if (s.outaged_lines.empty()) continue;
    auto tag = hazard_tag(s.hazard);
    OutageStats& st = summary.by_hazard[tag];
    st.scenarios_with_outages += 1;
    st.max_outages = std::max(st.max_outages, s.outaged_lines.size());
    size_sum[tag] += s.outaged_lines.size();
    days[tag].insert(s.day);
  }
  for (std::size_t tag = 0; tag < 3; ++tag) {
    OutageStats& st = summary.by_hazard[tag];
    st.days_with_outages = days[tag].size();
    if (st.scenarios_with_outages > 0)
      st.avg_outages = static_cast<double>(size_sum[tag]) / static_cast<double>(st.scenarios_with_outages);
  }
  return summary;
}

/// One JSON object per scenario, sorted by (hazard, day, k). The draws map
/// appears only on traced scenarios.
inline std::string scenarios_to_jsonl(const std::vector<OutageScenario>& scenarios) {
  std::vector<const OutageScenario*> order;
  order.reserve(scenarios.size());
  for (const auto& s : scenarios) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](const OutageScenario* a, const OutageScenario* b) {
    return scenario_order_less(*a, *b);
  });

  std::string out;
  for (const OutageScenario* s : order) {
    nlohmann::ordered_json rec;
    rec["hazard"] = std::string(to_string(s->hazard));
    rec["day"] = s->day;
    rec["k"] = s->k;
    rec["outaged_lines"] = s->outaged_lines;
    if (s->draws) {
      nlohmann::ordered_json d = nlohmann::ordered_json::object();
      for (const auto& [line_id, value] : *s->draws) d[line_id] = value;
      rec["draws"] = std::move(d);
    }
    out += rec.dump();
    out += '\n';
  }
  return out;
}

}  // namespace gridshed
