#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gridshed/study.hpp"

namespace {

using namespace gridshed;

std::pair<int, int> parse_days_flag(const std::string& text) {
  auto pos = text.find("..");
  int a, b;
  if (pos == std::string::npos) {
    a = b = static_cast<int>(parse_int_strict(text, "--days"));
  } else {
    a = static_cast<int>(parse_int_strict(text.substr(0, pos), "--days first"));
    b = static_cast<int>(parse_int_strict(text.substr(pos + 2), "--days last"));
  }
  if (a < 1 || b > 365 || a > b)
    throw ParseError("--days range must satisfy 1 <= first <= last <= 365");
  return {a, b};
}

struct FlagSet {
  std::string config;
  std::uint64_t seed = 0;
  int scenarios = 0;
  std::vector<std::string> hazards;
  std::string days;
  std::string plan;
  std::string out;
  int parallel = 0;
  bool trace = false;
  bool enforce_gen_min = false;
  double lp_tol = 0.0;
  std::string dump_lp;
};

void register_common(CLI::App* sub, FlagSet& flags) {
  sub->add_option("--config", flags.config, "study configuration file")->required();
  sub->add_option("--seed", flags.seed, "base seed override");
  sub->add_option("--scenarios", flags.scenarios, "scenarios per day override")
      ->check(CLI::PositiveNumber);
  sub->add_option("--hazard", flags.hazards,
                  "hazard filter (wildfire|hurricane|wind), repeatable");
  sub->add_option("--days", flags.days, "day range A..B (or a single day)");
  sub->add_option("--plan", flags.plan, "undergrounding plan file override");
  sub->add_option("--out", flags.out, "output directory override");
  sub->add_option("--parallel", flags.parallel, "worker thread count")
      ->check(CLI::NonNegativeNumber);
  sub->add_flag("--trace", flags.trace, "record per-line draws in scenario output");
  sub->add_flag("--enforce-gen-min", flags.enforce_gen_min, "apply generator lower bounds");
  sub->add_option("--lp-tol", flags.lp_tol, "LP optimality tolerance")
      ->check(CLI::PositiveNumber);
}

StudyConfig config_from_flags(const CLI::App* sub, const FlagSet& flags) {
  StudyConfig cfg = load_study_config(flags.config);
  if (sub->count("--seed")) cfg.base_seed = flags.seed;
  if (sub->count("--scenarios")) cfg.scenarios_per_day = flags.scenarios;
  if (!flags.hazards.empty()) {
    std::set<std::uint32_t> tags;
    for (const auto& label : flags.hazards)
      tags.insert(hazard_tag(hazard_from_string(label, "--hazard")));
    cfg.hazards.clear();
    for (auto tag : tags) cfg.hazards.push_back(static_cast<HazardType>(tag));
  }
  if (sub->count("--days")) cfg.days = parse_days_flag(flags.days);
  if (sub->count("--plan")) cfg.plan_path = std::filesystem::path(flags.plan);
  if (sub->count("--out")) cfg.out_dir = std::filesystem::path(flags.out);
  if (sub->count("--parallel")) cfg.parallel = flags.parallel;
  if (flags.trace) cfg.trace = true;
  if (flags.enforce_gen_min) cfg.enforce_gen_min = true;
  if (sub->count("--lp-tol")) cfg.lp_tolerance = flags.lp_tol;
  return cfg;
}

int cmd_validate(const StudyConfig& cfg) {
  auto findings = validate_study(cfg);
  for (const auto& f : findings) std::cout << "finding: " << to_string(f) << "\n";
  if (findings.empty()) {
    std::cout << "validation clean\n";
    return 0;
  }
  std::cout << findings.size() << " finding(s)\n";
  return 1;
}

int cmd_risk(const StudyConfig& cfg) {
  auto outages = parse_outage_records(read_text_file(cfg.outages_path));
  auto calendar = parse_storm_events(read_text_file(cfg.storms_path));
  auto profile = parse_demand_profile(read_text_file(cfg.demand_path));
  RiskTable risk = compute_risk_table(outages, calendar);
  auto [first_day, last_day] = resolve_day_range(cfg, profile);
  std::filesystem::create_directories(cfg.out_dir);
  std::string csv = detail::risk_to_csv(risk, cfg.hazards, first_day, last_day);
  write_text_file(cfg.out_dir / "risk.csv", csv);
  std::cout << "wrote " << (cfg.out_dir / "risk.csv").string() << "\n";
  return 0;
}

int cmd_scenarios(const StudyConfig& cfg) {
  StudyInputs in = load_study_inputs(cfg);
  auto scenarios = generate_scenarios(in, cfg);
  std::filesystem::create_directories(cfg.out_dir);
  write_text_file(cfg.out_dir / "scenarios.jsonl", scenarios_to_jsonl(scenarios));
  write_text_file(cfg.out_dir / "outage_summary.csv",
                  detail::outage_summary_to_csv(summarize_outages(scenarios), cfg.hazards));
  std::cout << "wrote " << scenarios.size() << " scenarios to "
            << (cfg.out_dir / "scenarios.jsonl").string() << "\n";
  return 0;
}

int cmd_run(const StudyConfig& cfg, const std::string& dump_lp) {
  auto findings = validate_study(cfg);
  if (!findings.empty()) {
    for (const auto& f : findings) std::cout << "finding: " << to_string(f) << "\n";
    std::cerr << "run aborted: validation failed\n";
    return 1;
  }
  if (!dump_lp.empty()) {
    auto pos = dump_lp.find(':');
    if (pos == std::string::npos) throw ParseError("--dump-lp expects DAY:HOUR");
    int day = static_cast<int>(parse_int_strict(dump_lp.substr(0, pos), "--dump-lp day"));
    int hour = static_cast<int>(parse_int_strict(dump_lp.substr(pos + 1), "--dump-lp hour"));
    Network net = parse_network(read_text_file(cfg.network_path));
    DemandProfile profile = parse_demand_profile(read_text_file(cfg.demand_path));
    HourlyCase hc = build_hourly_case(net, day, hour, profile, {});
    std::filesystem::create_directories(cfg.out_dir);
    std::string name = "lp_day" + std::to_string(day) + "_hour" + std::to_string(hour) + ".txt";
    write_text_file(cfg.out_dir / name, format_hourly_lp(hc, cfg.dcopf_options()));
    std::cout << "wrote " << (cfg.out_dir / name).string() << "\n";
  }
  run_study(cfg, std::cout);
  return 0;
}

int cmd_report(const StudyConfig& cfg) {
  Network net = parse_network(read_text_file(cfg.network_path));
  DemandProfile profile = parse_demand_profile(read_text_file(cfg.demand_path));
  auto results = parse_results_csv(read_text_file(cfg.out_dir / "results.csv"));
  StudySummary summary = summarize_study(results, net, profile);
  auto [first_day, last_day] = resolve_day_range(cfg, profile);
  bool with_post = false;
  for (const auto& r : results) with_post = with_post || r.post_shed_mwh.has_value();

  write_text_file(cfg.out_dir / "summary.csv", summary_to_csv(summary));
  write_text_file(cfg.out_dir / "overlap.csv", overlap_to_csv(summary));
  int charts = 0;
  for (auto& [name, svg] :
       detail::build_shed_charts(results, cfg.hazards, first_day, last_day, with_post)) {
    write_text_file(cfg.out_dir / name, svg);
    ++charts;
  }
  std::cout << "rebuilt summary.csv, overlap.csv, and " << charts << " chart(s) from "
            << results.size() << " results\n";
  return 0;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"weather-driven line outage scenarios and undergrounding evaluation"};
  app.require_subcommand(1);

  FlagSet flags;
  CLI::App* validate = app.add_subcommand("validate", "check study inputs without solving");
  CLI::App* risk = app.add_subcommand("risk", "compute the daily county risk table");
  CLI::App* scenarios = app.add_subcommand("scenarios", "generate outage scenarios");
  CLI::App* run = app.add_subcommand("run", "full study: risk, scenarios, solves, report");
  CLI::App* report = app.add_subcommand("report", "rebuild summary tables and charts from results");
  for (CLI::App* sub : {validate, risk, scenarios, run, report}) register_common(sub, flags);
  run->add_option("--dump-lp", flags.dump_lp, "write one hour's LP as equations (DAY:HOUR)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (validate->parsed()) return cmd_validate(config_from_flags(validate, flags));
    if (risk->parsed()) return cmd_risk(config_from_flags(risk, flags));
    if (scenarios->parsed()) return cmd_scenarios(config_from_flags(scenarios, flags));
    if (run->parsed()) return cmd_run(config_from_flags(run, flags), flags.dump_lp);
    if (report->parsed()) return cmd_report(config_from_flags(report, flags));
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) { return run_cli(argc, argv); }
