#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "gridshed/common.hpp"
#include "gridshed/grid_model.hpp"
#include "gridshed/lp.hpp"

namespace gridshed {

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

struct DcopfOptions {
  double lp_tolerance = 1e-9;
  bool enforce_gen_min = false;  // when false, generator lower bounds relax to 0
};

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;
  double elapsed_seconds = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// One hour of problem data. Demand is indexed like Network::buses();
/// outaged line ids are sorted and must exist in the network.
struct HourlyCase {
  const Network* net = nullptr;
  int day = 0;
  int hour = 0;
  std::vector<double> demand_mw;
  std::vector<std::string> outaged;
};

/// Hourly primal solution, indexed like the network's collections. Outaged
/// lines report flow 0 exactly.
struct HourlyDispatch {
  std::vector<double> gen_mw;
  std::vector<double> shed_mw;
  std::vector<double> theta_rad;
  std::vector<double> flow_mw;
  double total_shed_mw = 0.0;
};

struct DispatchSolution {
  std::vector<HourlyDispatch> hours;
  double objective_shed_mwh = 0.0;  // hourly MW sheds summed over 1 h periods
};

inline HourlyCase build_hourly_case(const Network& net, int day, int hour,
                                    const DemandProfile& profile,
                                    const std::vector<std::string>& outaged) {
  if (hour < 0 || hour > 23) throw std::invalid_argument("hour out of range 0..23");
  const auto& mult = profile.multipliers(day);
  HourlyCase hc;
  hc.net = &net;
  hc.day = day;
  hc.hour = hour;
  hc.demand_mw.resize(net.buses().size());
  for (std::size_t n = 0; n < net.buses().size(); ++n)
    hc.demand_mw[n] = net.base_demand(n) * mult[static_cast<std::size_t>(hour)];
  hc.outaged = outaged;
  std::sort(hc.outaged.begin(), hc.outaged.end());
  hc.outaged.erase(std::unique(hc.outaged.begin(), hc.outaged.end()), hc.outaged.end());
  for (const auto& id : hc.outaged) {
    if (!net.has_line(id))
      throw std::invalid_argument("outage set references unknown line \"" + id + "\"");
  }
  return hc;
}

namespace detail {

/// Column layout of the hourly LP: generators, then shed per bus, then
/// theta per bus, then one flow per surviving line.
struct HourlyLpLayout {
  int gen0 = 0;
  int shed0 = 0;
  int theta0 = 0;
  int flow0 = 0;
  std::vector<std::size_t> surviving;  // line indexes into Network::lines()
};

inline LinearProgram build_hourly_lp(const HourlyCase& hc, const DcopfOptions& options,
                                     HourlyLpLayout& layout) {
  const Network& net = *hc.net;
  std::set<std::string> out(hc.outaged.begin(), hc.outaged.end());

  LinearProgram lp;
  layout.gen0 = 0;
  for (const auto& g : net.generators()) {
    double lo = options.enforce_gen_min ? g.p_min : 0.0;
    lp.add_variable(0.0, lo, g.p_max, "gen_" + g.id);
  }
  layout.shed0 = static_cast<int>(lp.num_variables());
  for (std::size_t n = 0; n < net.buses().size(); ++n)
    lp.add_variable(1.0, 0.0, hc.demand_mw[n], "shed_" + net.buses()[n].id);
  // one angle reference per island: the lexicographically smallest bus id,
  // which is the first entry of each already-sorted component
  std::set<std::size_t> reference;
  for (const auto& comp : connected_components(net, out))
    reference.insert(net.bus_index(comp.front()));

  layout.theta0 = static_cast<int>(lp.num_variables());
  for (std::size_t n = 0; n < net.buses().size(); ++n) {
    bool pinned = reference.count(n) != 0;
    lp.add_variable(0.0, pinned ? 0.0 : -kLpInfinity, pinned ? 0.0 : kLpInfinity,
                    "theta_" + net.buses()[n].id);
  }

  // flows: angle-difference limits fold into the flow bounds through
  // f = -b (theta_fr - theta_to), valid because b > 0
  layout.flow0 = static_cast<int>(lp.num_variables());
  layout.surviving.clear();
  std::vector<int> flow_var(net.lines().size(), -1);
  for (std::size_t l = 0; l < net.lines().size(); ++l) {
    const Line& ln = net.lines()[l];
    if (out.count(ln.id)) continue;
    double lo = std::max(-ln.flow_limit, -ln.susceptance * ln.angle_max);
    double hi = std::min(ln.flow_limit, -ln.susceptance * ln.angle_min);
    flow_var[l] = lp.add_variable(0.0, lo, hi, "flow_" + ln.id);
    layout.surviving.push_back(l);
  }

  // flow definition per surviving line: f + b theta_fr - b theta_to = 0
  for (std::size_t l : layout.surviving) {
    const Line& ln = net.lines()[l];
    int fr = layout.theta0 + static_cast<int>(net.bus_index(ln.from_bus));
    int to = layout.theta0 + static_cast<int>(net.bus_index(ln.to_bus));
    lp.add_row({{flow_var[l], 1.0}, {fr, ln.susceptance}, {to, -ln.susceptance}}, 0.0);
  }

  // nodal balance per bus: sum(f out) - sum(f in) - sum(gen) - shed = -demand
  for (std::size_t n = 0; n < net.buses().size(); ++n) {
    std::vector<std::pair<int, double>> row;
    for (std::size_t l : net.lines_from(n)) {
      if (flow_var[l] >= 0) row.emplace_back(flow_var[l], 1.0);
    }
    for (std::size_t l : net.lines_to(n)) {
      if (flow_var[l] >= 0) row.emplace_back(flow_var[l], -1.0);
    }
    for (std::size_t g : net.generators_at(n)) row.emplace_back(layout.gen0 + static_cast<int>(g), -1.0);
    row.emplace_back(layout.shed0 + static_cast<int>(n), -1.0);
    lp.add_row(row, -hc.demand_mw[n]);
  }
  return lp;
}

}  // namespace detail

/// Minimum-load-shed DC-OPF for one hour. Always feasible when generator
/// minimums are relaxed (every variable at zero sheds all load); Infeasible
/// can only surface with enforce_gen_min set.
inline SolveReport solve_min_load_shed(const HourlyCase& hc, const DcopfOptions& options,
                                       HourlyDispatch& dispatch) {
  auto t0 = std::chrono::steady_clock::now();
  const Network& net = *hc.net;

  detail::HourlyLpLayout layout;
  LinearProgram lp = detail::build_hourly_lp(hc, options, layout);

  LpOptions lp_options;
  lp_options.tol = options.lp_tolerance;
  LpSolution sol = solve_lp(lp, lp_options);

  SolveReport report;
  report.iterations = sol.iterations;
  report.tolerance = options.lp_tolerance;
  report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  switch (sol.status) {
    case LpStatus::Optimal: report.status = SolveStatus::Optimal; break;
    case LpStatus::Infeasible: report.status = SolveStatus::Infeasible; break;
    default: report.status = SolveStatus::NumericalFailure; break;
  }
  report.detail = sol.detail;
  if (report.status != SolveStatus::Optimal) return report;

  dispatch.gen_mw.assign(net.generators().size(), 0.0);
  dispatch.shed_mw.assign(net.buses().size(), 0.0);
  dispatch.theta_rad.assign(net.buses().size(), 0.0);
  dispatch.flow_mw.assign(net.lines().size(), 0.0);
  for (std::size_t g = 0; g < net.generators().size(); ++g)
    dispatch.gen_mw[g] = sol.x[static_cast<std::size_t>(layout.gen0) + g];
  dispatch.total_shed_mw = 0.0;
  for (std::size_t n = 0; n < net.buses().size(); ++n) {
    dispatch.shed_mw[n] = sol.x[static_cast<std::size_t>(layout.shed0) + n];
    dispatch.theta_rad[n] = sol.x[static_cast<std::size_t>(layout.theta0) + n];
    dispatch.total_shed_mw += dispatch.shed_mw[n];
  }
  for (std::size_t i = 0; i < layout.surviving.size(); ++i)
    dispatch.flow_mw[layout.surviving[i]] = sol.x[static_cast<std::size_t>(layout.flow0) + i];
  return report;
}

/// Residual check of every model constraint against a dispatch. Violations
/// are absolute (MW, or radians for angle spreads).
struct SolutionCheck {
  double max_residual = 0.0;
  std::string worst;

  void update(double violation, const std::string& what) {
    if (violation > max_residual) {
      max_residual = violation;
      worst = what;
    }
  }
};

inline SolutionCheck check_solution(const HourlyCase& hc, const HourlyDispatch& d,
                                    const DcopfOptions& options) {
  const Network& net = *hc.net;
  std::set<std::string> out(hc.outaged.begin(), hc.outaged.end());
  SolutionCheck chk;

  for (std::size_t g = 0; g < net.generators().size(); ++g) {
    const Generator& gen = net.generators()[g];
    double lo = options.enforce_gen_min ? gen.p_min : 0.0;
    chk.update(lo - d.gen_mw[g], "gen lower " + gen.id);
    chk.update(d.gen_mw[g] - gen.p_max, "gen upper " + gen.id);
  }
  for (std::size_t n = 0; n < net.buses().size(); ++n) {
    const std::string& id = net.buses()[n].id;
    chk.update(-d.shed_mw[n], "shed lower " + id);
    chk.update(d.shed_mw[n] - hc.demand_mw[n], "shed upper " + id);
  }
  for (std::size_t l = 0; l < net.lines().size(); ++l) {
    const Line& ln = net.lines()[l];
    double f = d.flow_mw[l];
    if (out.count(ln.id)) {
      chk.update(std::abs(f), "outaged flow " + ln.id);
      continue;
    }
    double dtheta = d.theta_rad[net.bus_index(ln.from_bus)] -
                    d.theta_rad[net.bus_index(ln.to_bus)];
    chk.update(std::abs(f) - ln.flow_limit, "flow limit " + ln.id);
    chk.update(ln.angle_min - dtheta, "angle lower " + ln.id);
    chk.update(dtheta - ln.angle_max, "angle upper " + ln.id);
    chk.update(std::abs(f + ln.susceptance * dtheta), "flow definition " + ln.id);
  }
  for (std::size_t n = 0; n < net.buses().size(); ++n) {
    double net_out = 0.0;
    for (std::size_t l : net.lines_from(n))
      if (!out.count(net.lines()[l].id)) net_out += d.flow_mw[l];
    for (std::size_t l : net.lines_to(n))
      if (!out.count(net.lines()[l].id)) net_out -= d.flow_mw[l];
    double injection = -hc.demand_mw[n] + d.shed_mw[n];
    for (std::size_t g : net.generators_at(n)) injection += d.gen_mw[g];
    chk.update(std::abs(net_out - injection), "balance " + net.buses()[n].id);
  }
  return chk;
}

/// 24 independent hourly solves; the daily objective is the plain sum of
/// hourly shed because periods are one hour long.
inline SolveReport solve_day(const Network& net, int day, const DemandProfile& profile,
                             const std::vector<std::string>& outaged, const DcopfOptions& options,
                             DispatchSolution& solution) {
  auto t0 = std::chrono::steady_clock::now();
  solution.hours.clear();
  solution.hours.resize(24);
  solution.objective_shed_mwh = 0.0;

  SolveReport day_report;
  day_report.status = SolveStatus::Optimal;
  day_report.tolerance = options.lp_tolerance;
  for (int hour = 0; hour < 24; ++hour) {
    HourlyCase hc = build_hourly_case(net, day, hour, profile, outaged);
    SolveReport hr = solve_min_load_shed(hc, options, solution.hours[static_cast<std::size_t>(hour)]);
    day_report.iterations += hr.iterations;
    if (hr.status != SolveStatus::Optimal) {
      day_report.status = hr.status;
      day_report.detail = "hour " + std::to_string(hour) +
                          (hr.detail.empty() ? "" : ": " + hr.detail);
      break;
    }
    solution.objective_shed_mwh += solution.hours[static_cast<std::size_t>(hour)].total_shed_mw;
  }
  day_report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return day_report;
}

/// Equation listing of one hour's LP for debugging.
inline std::string format_hourly_lp(const HourlyCase& hc, const DcopfOptions& options) {
  detail::HourlyLpLayout layout;
  LinearProgram lp = detail::build_hourly_lp(hc, options, layout);

  std::string text = "min";
  bool first = true;
  for (std::size_t j = 0; j < lp.num_variables(); ++j) {
    if (lp.cost(static_cast<int>(j)) == 0.0) continue;
    text += first ? " " : " + ";
    if (lp.cost(static_cast<int>(j)) != 1.0) text += format_double(lp.cost(static_cast<int>(j))) + " ";
    text += lp.name(static_cast<int>(j));
    first = false;
  }
  text += "\nsubject to\n";

  std::vector<std::vector<std::pair<int, double>>> rows(lp.num_rows());
  for (std::size_t j = 0; j < lp.num_variables(); ++j)
    for (const auto& [row, coef] : lp.column(static_cast<int>(j)))
      rows[static_cast<std::size_t>(row)].emplace_back(static_cast<int>(j), coef);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    text += "  ";
    for (std::size_t t = 0; t < rows[i].size(); ++t) {
      auto [j, coef] = rows[i][t];
      if (t == 0) {
        if (coef == -1.0) text += "-";
        else if (coef != 1.0) text += format_double(coef) + " ";
      } else {
        text += coef < 0 ? " - " : " + ";
        double a = std::abs(coef);
        if (a != 1.0) text += format_double(a) + " ";
      }
      text += lp.name(j);
    }
    text += " = " + format_double(lp.rhs(static_cast<int>(i))) + "\n";
  }
  text += "bounds\n";
  for (std::size_t j = 0; j < lp.num_variables(); ++j) {
    double lo = lp.lower(static_cast<int>(j));
    double hi = lp.upper(static_cast<int>(j));
    text += "  ";
    text += std::isfinite(lo) ? format_double(lo) : "-inf";
    text += " <= " + lp.name(static_cast<int>(j)) + " <= ";
    text += std::isfinite(hi) ? format_double(hi) : "inf";
    text += "\n";
  }
  return text;
}

}  // namespace gridshed
