#pragma once

#include <atomic>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gridshed/common.hpp"
#include "gridshed/dcopf.hpp"
#include "gridshed/geo.hpp"
#include "gridshed/grid_model.hpp"
#include "gridshed/hazard_data.hpp"
#include "gridshed/report.hpp"
#include "gridshed/resilience.hpp"
#include "gridshed/scenario.hpp"

namespace gridshed {

/// Study definition: input paths plus run parameters. Relative paths
/// resolve against the directory holding the config file.
struct StudyConfig {
  std::filesystem::path network_path;
  std::filesystem::path regions_path;
  std::filesystem::path outages_path;
  std::filesystem::path storms_path;
  std::filesystem::path demand_path;
  std::optional<std::filesystem::path> plan_path;
  std::filesystem::path out_dir = "out";

  std::uint64_t base_seed = 0;
  int scenarios_per_day = 100;
  BetaPrimeParams beta_prime;
  std::vector<HazardType> hazards = {HazardType::Wildfire, HazardType::Hurricane, HazardType::Wind};
  std::optional<std::pair<int, int>> days;  // inclusive; defaults to the demand profile's span
  int parallel = 0;                         // 0 picks the hardware thread count
  bool trace = false;
  bool enforce_gen_min = false;
  double lp_tolerance = 1e-9;

  DcopfOptions dcopf_options() const {
    DcopfOptions opt;
    opt.lp_tolerance = lp_tolerance;
    opt.enforce_gen_min = enforce_gen_min;
    return opt;
  }

  ScenarioConfig scenario_config() const {
    ScenarioConfig sc;
    sc.base_seed = base_seed;
    sc.scenarios_per_day = scenarios_per_day;
    sc.params = beta_prime;
    return sc;
  }
};

namespace detail {

inline std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace detail

inline StudyConfig parse_study_config(std::string_view text, const std::filesystem::path& config_path) {
  nlohmann::json doc = detail::parse_json_document(text, "config");
  if (!doc.is_object()) throw ParseError("config: top-level value must be an object");

  static const std::set<std::string> known = {
      "network", "regions", "outages", "storms",   "demand",   "plan",
      "out",     "seed",    "scenarios_per_day",   "beta_prime", "hazards",
      "days",    "parallel", "trace", "enforce_gen_min", "lp_tolerance"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw ParseError("config: unknown key \"" + key + "\"");
  }

  std::filesystem::path base = config_path.parent_path();
  StudyConfig cfg;
  cfg.network_path = detail::resolve_path(base, detail::require_string(doc, "network", "config"));
  cfg.regions_path = detail::resolve_path(base, detail::require_string(doc, "regions", "config"));
  cfg.outages_path = detail::resolve_path(base, detail::require_string(doc, "outages", "config"));
  cfg.storms_path = detail::resolve_path(base, detail::require_string(doc, "storms", "config"));
  cfg.demand_path = detail::resolve_path(base, detail::require_string(doc, "demand", "config"));
  if (doc.contains("plan"))
    cfg.plan_path = detail::resolve_path(base, detail::require_string(doc, "plan", "config"));
  if (doc.contains("out"))
    cfg.out_dir = detail::resolve_path(base, detail::require_string(doc, "out", "config"));

  if (doc.contains("seed")) {
    const auto& v = doc["seed"];
    if (!v.is_number_unsigned()) throw ParseError("config: seed must be a nonnegative integer");
    cfg.base_seed = v.get<std::uint64_t>();
  }
  if (doc.contains("scenarios_per_day")) {
    const auto& v = doc["scenarios_per_day"];
    if (!v.is_number_integer() || v.get<int>() < 1)
      throw ParseError("config: scenarios_per_day must be a positive integer");
    cfg.scenarios_per_day = v.get<int>();
  }
  if (doc.contains("beta_prime")) {
    const auto& bp = doc["beta_prime"];
    if (!bp.is_object()) throw ParseError("config: beta_prime must be an object");
    for (const auto& [key, value] : bp.items()) {
      if (key != "alpha" && key != "beta") throw ParseError("config: beta_prime: unknown key \"" + key + "\"");
    }
    cfg.beta_prime.alpha = detail::require_number(bp, "alpha", "config: beta_prime");
    cfg.beta_prime.beta = detail::require_number(bp, "beta", "config: beta_prime");
    try {
      cfg.beta_prime.validate();
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("config: beta_prime: ") + e.what());
    }
  }
  if (doc.contains("hazards")) {
    const auto& arr = doc["hazards"];
    if (!arr.is_array() || arr.empty()) throw ParseError("config: hazards must be a nonempty array");
    std::set<std::uint32_t> tags;
    for (const auto& entry : arr) {
      if (!entry.is_string()) throw ParseError("config: hazards entries must be strings");
      HazardType h = hazard_from_string(entry.get<std::string>(), "config: hazards");
      if (!tags.insert(hazard_tag(h)).second)
        throw ParseError("config: hazards lists \"" + entry.get<std::string>() + "\" twice");
    }
    cfg.hazards.clear();
    for (auto tag : tags) cfg.hazards.push_back(static_cast<HazardType>(tag));
  }
  if (doc.contains("days")) {
    const auto& arr = doc["days"];
    if (!arr.is_array() || arr.size() != 2 || !arr[0].is_number_integer() || !arr[1].is_number_integer())
      throw ParseError("config: days must be a two-element integer array [first, last]");
    int a = arr[0].get<int>();
    int b = arr[1].get<int>();
    if (a < 1 || b > 365 || a > b)
      throw ParseError("config: days range must satisfy 1 <= first <= last <= 365");
    cfg.days = {a, b};
  }
  if (doc.contains("parallel")) {
    const auto& v = doc["parallel"];
    if (!v.is_number_integer() || v.get<int>() < 0)
      throw ParseError("config: parallel must be a nonnegative integer");
    cfg.parallel = v.get<int>();
  }
  if (doc.contains("trace")) {
    if (!doc["trace"].is_boolean()) throw ParseError("config: trace must be a boolean");
    cfg.trace = doc["trace"].get<bool>();
  }
  if (doc.contains("enforce_gen_min")) {
    if (!doc["enforce_gen_min"].is_boolean()) throw ParseError("config: enforce_gen_min must be a boolean");
    cfg.enforce_gen_min = doc["enforce_gen_min"].get<bool>();
  }
  if (doc.contains("lp_tolerance")) {
    double tol = detail::require_number(doc, "lp_tolerance", "config");
    if (!(tol > 0.0)) throw ParseError("config: lp_tolerance must be positive");
    cfg.lp_tolerance = tol;
  }
  return cfg;
}

inline StudyConfig load_study_config(const std::filesystem::path& path) {
  return parse_study_config(read_text_file(path), path);
}

/// Everything a run needs, parsed and cross-linked.
struct StudyInputs {
  Network net;
  RegionSet regions;
  std::vector<OutageRecord> outages;
  HazardCalendar calendar;
  DemandProfile profile;
  std::optional<UndergroundPlan> plan;
  LineRegionIndex index;
  RiskTable risk;
};

inline StudyInputs load_study_inputs(const StudyConfig& cfg) {
  StudyInputs in;
  in.net = parse_network(read_text_file(cfg.network_path));
  in.regions = parse_regions(read_text_file(cfg.regions_path));
  in.outages = parse_outage_records(read_text_file(cfg.outages_path));
  in.calendar = parse_storm_events(read_text_file(cfg.storms_path));
  in.profile = parse_demand_profile(read_text_file(cfg.demand_path));
  if (cfg.plan_path) in.plan = parse_plan(read_text_file(*cfg.plan_path));
  in.index = map_lines_to_counties(in.net, in.regions);
  in.risk = compute_risk_table(in.outages, in.calendar);
  return in;
}

inline std::pair<int, int> resolve_day_range(const StudyConfig& cfg, const DemandProfile& profile) {
  if (cfg.days) return *cfg.days;
  if (profile.days().empty()) throw ParseError("demand profile is empty");
  return {profile.days().begin()->first, profile.days().rbegin()->first};
}

struct Finding {
  std::string file;
  std::string entity;
  std::string rule;
};

inline std::string to_string(const Finding& f) {
  return f.file + ": " + (f.entity.empty() ? "" : f.entity + ": ") + f.rule;
}

/// Checks every input against its parser and the cross-file rules, without
/// solving anything. Collects all findings rather than stopping at the
/// first.
inline std::vector<Finding> validate_study(const StudyConfig& cfg) {
  std::vector<Finding> findings;
  auto fail = [&](const std::filesystem::path& file, const std::string& rule) {
    findings.push_back({file.filename().string(), "", rule});
  };

  std::optional<Network> net;
  std::optional<RegionSet> regions;
  std::optional<DemandProfile> profile;
  std::optional<UndergroundPlan> plan;

  try {
    net = parse_network(read_text_file(cfg.network_path));
  } catch (const std::exception& e) {
    fail(cfg.network_path, e.what());
  }
  try {
    regions = parse_regions(read_text_file(cfg.regions_path));
  } catch (const std::exception& e) {
    fail(cfg.regions_path, e.what());
  }
  try {
    parse_outage_records(read_text_file(cfg.outages_path));
  } catch (const std::exception& e) {
    fail(cfg.outages_path, e.what());
  }
  try {
    parse_storm_events(read_text_file(cfg.storms_path));
  } catch (const std::exception& e) {
    fail(cfg.storms_path, e.what());
  }
  try {
    profile = parse_demand_profile(read_text_file(cfg.demand_path));
  } catch (const std::exception& e) {
    fail(cfg.demand_path, e.what());
  }
  if (cfg.plan_path) {
    try {
      plan = parse_plan(read_text_file(*cfg.plan_path));
    } catch (const std::exception& e) {
      fail(*cfg.plan_path, e.what());
    }
  }

  if (plan && net) {
    for (const auto& id : validate_plan(*plan, *net))
      findings.push_back({cfg.plan_path->filename().string(), id, "plan references unknown line"});
  }
  if (profile) {
    try {
      auto [first, last] = resolve_day_range(cfg, *profile);
      for (int day = first; day <= last; ++day) {
        if (!profile->has_day(day)) {
          findings.push_back({cfg.demand_path.filename().string(), "day " + std::to_string(day),
                              "demand profile does not cover the study day range"});
        }
      }
    } catch (const std::exception& e) {
      fail(cfg.demand_path, e.what());
    }
  }
  return findings;
}

/// Products of one full run: everything cmd_run writes, kept in memory so
/// tests can assert on them without reparsing files.
struct RunArtifacts {
  Manifest manifest;
  std::vector<OutageScenario> scenarios;
  std::vector<ScenarioResult> results;
  StudySummary summary;
};

namespace detail {

/// Thread-safe memo of daily solves keyed by (day, outage set). Duplicate
/// concurrent solves of one key are allowed and benign: solves are
/// deterministic, so both writers store the same value.
class DayShedCache {
 public:
  DayShedCache(const Network& net, const DemandProfile& profile, const DcopfOptions& options)
      : net_(net), profile_(profile), options_(options) {}

  double solve(int day, const std::vector<std::string>& outaged, HazardType hazard, int k) {
    std::string key = std::to_string(day);
    for (const auto& id : outaged) {
      key += '\x1f';
      key += id;
    }
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    DispatchSolution solution;
    SolveReport report = solve_day(net_, day, profile_, outaged, options_, solution);
    if (report.status != SolveStatus::Optimal) {
      throw SolveError("scenario " + std::string(to_string(hazard)) + "/d" + std::to_string(day) +
                       "/k" + std::to_string(k) + ": " + to_string(report.status) +
                       (report.detail.empty() ? "" : " (" + report.detail + ")"));
    }
    std::lock_guard<std::mutex> lock(mu_);
    cache_.emplace(std::move(key), solution.objective_shed_mwh);
    return solution.objective_shed_mwh;
  }

  std::size_t size() const { return cache_.size(); }

 private:
  const Network& net_;
  const DemandProfile& profile_;
  DcopfOptions options_;
  std::mutex mu_;
  std::map<std::string, double> cache_;
};

inline std::string risk_to_csv(const RiskTable& risk, const std::vector<HazardType>& hazards,
                               int first_day, int last_day) {
  std::string csv = "hazard,day,fips,rho\n";
  for (HazardType h : hazards) {
    for (const auto& [day, slice] : risk.days(h)) {
      if (day < first_day || day > last_day) continue;
      for (const auto& [fips, rho] : slice) {
        csv += std::string(to_string(h)) + ',' + std::to_string(day) + ',' + fips + ',' +
               format_double(rho) + '\n';
      }
    }
  }
  return csv;
}

inline std::string outage_summary_to_csv(const OutageSummary& summary,
                                         const std::vector<HazardType>& hazards) {
  std::string csv = "hazard,avg_outages,max_outages,days_with_outages,scenarios_with_outages\n";
  for (HazardType h : hazards) {
    const OutageStats& st = summary.stats(h);
    csv += std::string(to_string(h)) + ',' + format_double(st.avg_outages) + ',' +
           std::to_string(st.max_outages) + ',' + std::to_string(st.days_with_outages) + ',' +
           std::to_string(st.scenarios_with_outages) + '\n';
  }
  return csv;
}

/// One chart per hazard with any data in the window: the pre series always,
/// the post series when a plan was evaluated. Returns (file name, svg)
/// pairs.
inline std::vector<std::pair<std::string, std::string>> build_shed_charts(
    const std::vector<ScenarioResult>& results, const std::vector<HazardType>& hazards,
    int first_day, int last_day, bool with_post) {
  std::vector<std::pair<std::string, std::string>> charts;
  for (HazardType hazard : hazards) {
    ChartSpec spec;
    spec.title = "Daily load shed (" + std::string(to_string(hazard)) + ")";
    spec.y_label = "MWh";
    ChartSeries pre{"pre", {}};
    ChartSeries post{"post", {}};
    for (int day = first_day; day <= last_day; ++day) {
      std::vector<double> pre_samples, post_samples;
      for (const auto& r : results) {
        if (r.hazard != hazard || r.day != day) continue;
        pre_samples.push_back(r.pre_shed_mwh);
        if (with_post) post_samples.push_back(r.post_shed_mwh.value_or(r.pre_shed_mwh));
      }
      if (pre_samples.empty()) continue;
      spec.day_labels.push_back(std::to_string(day));
      pre.samples.push_back(std::move(pre_samples));
      if (with_post) post.samples.push_back(std::move(post_samples));
    }
    if (pre.samples.empty()) continue;
    spec.series.push_back(std::move(pre));
    if (with_post) spec.series.push_back(std::move(post));
    charts.emplace_back("shed_" + std::string(to_string(hazard)) + ".svg",
                        render_distribution_chart(spec));
  }
  return charts;
}

}  // namespace detail

/// Generates every (hazard, day, k) scenario in the filter, sorted.
inline std::vector<OutageScenario> generate_scenarios(const StudyInputs& in, const StudyConfig& cfg) {
  auto [first_day, last_day] = resolve_day_range(cfg, in.profile);
  ScenarioConfig sc = cfg.scenario_config();
  std::vector<OutageScenario> scenarios;
  scenarios.reserve(cfg.hazards.size() * static_cast<std::size_t>(last_day - first_day + 1) *
                    static_cast<std::size_t>(cfg.scenarios_per_day));
  for (HazardType hazard : cfg.hazards) {
    for (int day = first_day; day <= last_day; ++day) {
      const RiskTable::Slice* slice = in.risk.slice(hazard, day);
      for (int k = 0; k < cfg.scenarios_per_day; ++k)
        scenarios.push_back(generate_outage_set(in.net, hazard, day, k, slice, in.index, sc, cfg.trace));
    }
  }
  return scenarios;
}

/// Generates, evaluates, and reports one study. Scenario evaluation pulls
/// tasks from an atomic cursor over a shared day-level solve cache; results
/// land by index, so artifacts are byte-identical for any worker count. Log
/// output is plain progress lines.
inline RunArtifacts run_study(const StudyConfig& cfg, std::ostream& log) {
  auto t0 = std::chrono::steady_clock::now();
  StudyInputs in = load_study_inputs(cfg);
  auto [first_day, last_day] = resolve_day_range(cfg, in.profile);
  for (int day = first_day; day <= last_day; ++day) {
    if (!in.profile.has_day(day))
      throw ParseError("demand profile does not cover day " + std::to_string(day));
  }
  if (in.plan) {
    auto unknown = validate_plan(*in.plan, in.net);
    if (!unknown.empty())
      throw ParseError("plan references unknown line \"" + unknown.front() + "\"");
  }

  RunArtifacts artifacts;
  artifacts.scenarios = generate_scenarios(in, cfg);
  log << "generated " << artifacts.scenarios.size() << " scenarios over days " << first_day << ".."
      << last_day << "\n";

  detail::DayShedCache cache(in.net, in.profile, cfg.dcopf_options());
  const UndergroundPlan* plan = in.plan ? &*in.plan : nullptr;
  artifacts.results.resize(artifacts.scenarios.size());

  unsigned workers = cfg.parallel > 0 ? static_cast<unsigned>(cfg.parallel)
                                      : std::max(1u, std::thread::hardware_concurrency());
  if (artifacts.scenarios.size() < workers)
    workers = static_cast<unsigned>(std::max<std::size_t>(artifacts.scenarios.size(), 1));

  std::atomic<std::size_t> cursor{0};
  std::mutex error_mu;
  std::exception_ptr error;
  auto worker = [&]() {
    for (;;) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= artifacts.scenarios.size()) return;
      const OutageScenario& sc = artifacts.scenarios[i];
      try {
        DayShedFn solve = [&](int day, const std::vector<std::string>& outaged) {
          return cache.solve(day, outaged, sc.hazard, sc.k);
        };
        artifacts.results[i] = evaluate_scenario_with(solve, sc, plan);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        cursor.store(artifacts.scenarios.size());
        return;
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  log << "evaluated " << artifacts.results.size() << " scenarios (" << cache.size()
      << " distinct daily solves)\n";

  artifacts.summary = summarize_study(artifacts.results, in.net, in.profile);

  // artifacts: tables from write_results plus the scenario and risk files,
  // all folded into one digest manifest
  std::filesystem::create_directories(cfg.out_dir);
  std::vector<ManifestEntry> extra;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_text_file(cfg.out_dir / name, content);
    extra.push_back({name, sha256_hex(content)});
  };
  emit("risk.csv", detail::risk_to_csv(in.risk, cfg.hazards, first_day, last_day));
  emit("scenarios.jsonl", scenarios_to_jsonl(artifacts.scenarios));
  emit("outage_summary.csv",
       detail::outage_summary_to_csv(summarize_outages(artifacts.scenarios), cfg.hazards));

  for (auto& [name, svg] :
       detail::build_shed_charts(artifacts.results, cfg.hazards, first_day, last_day, plan != nullptr))
    emit(name, svg);

  artifacts.manifest = write_results(artifacts.results, artifacts.summary, cfg.out_dir, std::move(extra));
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log << "wrote " << artifacts.manifest.entries.size() << " artifacts to " << cfg.out_dir.string()
      << " in " << format_double(std::round(elapsed * 100.0) / 100.0) << " s\n";
  return artifacts;
}

}  // namespace gridshed
