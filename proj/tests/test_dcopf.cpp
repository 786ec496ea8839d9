#include <catch2/catch_amalgamated.hpp>

#include <gridshed/dcopf.hpp>
#include <gridshed/grid_model.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

using namespace gridshed;

namespace {

std::filesystem::path fixtures_dir() {
  const char* env = std::getenv("GRIDSHED_FIXTURES");
  REQUIRE(env != nullptr);
  return std::filesystem::path(env);
}

Network two_bus(double flow_limit) {
  std::string doc = R"({
    "buses": [{"id": "A", "latitude": 0, "longitude": 0}, {"id": "B", "latitude": 0, "longitude": 1}],
    "lines": [{"id": "AB", "from_bus": "A", "to_bus": "B",
               "susceptance": 100.0, "flow_limit": )" + format_double(flow_limit) + R"(}],
    "generators": [{"id": "G", "bus": "A", "p_min": 0.0, "p_max": 100.0}],
    "loads": [{"bus": "B", "base_demand": 50.0}]
  })";
  return parse_network(doc);
}

DemandProfile flat_profile(int day) {
  DemandProfile prof;
  DemandProfile::Hours hours;
  hours.fill(1.0);
  prof.set_day(day, hours);
  return prof;
}

}  // namespace

TEST_CASE("two-bus case serves the full load when nothing binds") {
  Network net = two_bus(100.0);
  DemandProfile prof = flat_profile(1);
  HourlyCase hc = build_hourly_case(net, 1, 0, prof, {});
  HourlyDispatch d;
  SolveReport rep = solve_min_load_shed(hc, DcopfOptions{}, d);
  REQUIRE(rep.status == SolveStatus::Optimal);
  CHECK(d.total_shed_mw == Catch::Approx(0.0).margin(1e-9));
  CHECK(d.gen_mw[0] == Catch::Approx(50.0).margin(1e-9));
  CHECK(d.flow_mw[0] == Catch::Approx(50.0).margin(1e-9));
  // flow definition fixes the angle spread: f = -b (theta_A - theta_B)
  CHECK(d.theta_rad[0] - d.theta_rad[1] == Catch::Approx(-0.5).margin(1e-9));
  CHECK(check_solution(hc, d, DcopfOptions{}).max_residual < 1e-9);
}

TEST_CASE("two-bus case sheds exactly the flow-limit deficit") {
  Network net = two_bus(30.0);
  DemandProfile prof = flat_profile(1);
  HourlyCase hc = build_hourly_case(net, 1, 0, prof, {});
  HourlyDispatch d;
  SolveReport rep = solve_min_load_shed(hc, DcopfOptions{}, d);
  REQUIRE(rep.status == SolveStatus::Optimal);
  CHECK(d.total_shed_mw == Catch::Approx(20.0).margin(1e-9));
  CHECK(d.flow_mw[0] == Catch::Approx(30.0).margin(1e-9));
  CHECK(d.shed_mw[1] == Catch::Approx(20.0).margin(1e-9));
  CHECK(check_solution(hc, d, DcopfOptions{}).max_residual < 1e-9);
}

TEST_CASE("two-bus case sheds everything when the only line is out") {
  Network net = two_bus(100.0);
  DemandProfile prof = flat_profile(1);
  HourlyCase hc = build_hourly_case(net, 1, 0, prof, {"AB"});
  HourlyDispatch d;
  SolveReport rep = solve_min_load_shed(hc, DcopfOptions{}, d);
  REQUIRE(rep.status == SolveStatus::Optimal);
  CHECK(d.total_shed_mw == Catch::Approx(50.0).margin(1e-9));
  CHECK(d.flow_mw[0] == 0.0);  // outaged lines report exact zero
  CHECK(d.gen_mw[0] == Catch::Approx(0.0).margin(1e-9));
  CHECK(check_solution(hc, d, DcopfOptions{}).max_residual < 1e-9);
}

TEST_CASE("a tight angle window on the direct path forces shed") {
  // parallel paths A->C and A->B->C; the direct line's angle window caps it
  // at 20 MW and Kirchhoff fixes the split through B at half the direct
  // flow, so served load peaks at 30 of 60
  std::string doc = R"({
    "buses": [{"id": "A", "latitude": 0, "longitude": 0},
              {"id": "B", "latitude": 1, "longitude": 0},
              {"id": "C", "latitude": 0, "longitude": 1}],
    "lines": [
      {"id": "AB", "from_bus": "A", "to_bus": "B", "susceptance": 1000.0, "flow_limit": 1000.0},
      {"id": "BC", "from_bus": "B", "to_bus": "C", "susceptance": 1000.0, "flow_limit": 1000.0},
      {"id": "AC", "from_bus": "A", "to_bus": "C", "susceptance": 1000.0, "flow_limit": 1000.0,
       "angle_min": -0.02, "angle_max": 0.02}
    ],
    "generators": [{"id": "G", "bus": "A", "p_min": 0.0, "p_max": 100.0}],
    "loads": [{"bus": "C", "base_demand": 60.0}]
  })";
  Network net = parse_network(doc);
  DemandProfile prof = flat_profile(1);
  HourlyCase hc = build_hourly_case(net, 1, 0, prof, {});
  HourlyDispatch d;
  SolveReport rep = solve_min_load_shed(hc, DcopfOptions{}, d);
  REQUIRE(rep.status == SolveStatus::Optimal);
  CHECK(d.total_shed_mw == Catch::Approx(30.0).margin(1e-7));
  CHECK(check_solution(hc, d, DcopfOptions{}).max_residual < 1e-8);
}

TEST_CASE("all lines out reduces each bus to its local balance") {
  Network net = parse_network(read_text_file(fixtures_dir() / "network5.json"));
  DemandProfile prof = parse_demand_profile(read_text_file(fixtures_dir() / "profile10.json"));
  std::vector<std::string> all{"L1", "L2", "L3", "L4", "L5"};

  const int day = 5;
  DispatchSolution sol;
  SolveReport rep = solve_day(net, day, prof, all, DcopfOptions{}, sol);
  REQUIRE(rep.status == SolveStatus::Optimal);
  REQUIRE(sol.hours.size() == 24);

  // isolated buses: B2 sheds 60m, B5 sheds 35m, B3 sheds max(0, 40m - 30),
  // B4 holds 15m against an 80 MW unit, B1 has no load
  double analytic = 0.0;
  const auto& mult = prof.multipliers(day);
  for (int t = 0; t < 24; ++t) {
    double m = mult[static_cast<std::size_t>(t)];
    analytic += 60.0 * m + 35.0 * m + std::max(0.0, 40.0 * m - 30.0);
  }
  CHECK(sol.objective_shed_mwh == Catch::Approx(analytic).margin(1e-6));

  double hour_sum = 0.0;
  for (const auto& h : sol.hours) hour_sum += h.total_shed_mw;
  CHECK(sol.objective_shed_mwh == Catch::Approx(hour_sum).margin(1e-12));
}

TEST_CASE("generator minimums can make an island infeasible") {
  // L1 and L5 out isolates B1, whose unit has p_min 20 and no local load
  Network net = parse_network(read_text_file(fixtures_dir() / "network5.json"));
  DemandProfile prof = parse_demand_profile(read_text_file(fixtures_dir() / "profile10.json"));
  HourlyCase hc = build_hourly_case(net, 2, 0, prof, {"L1", "L5"});

  HourlyDispatch relaxed;
  DcopfOptions off;
  REQUIRE(solve_min_load_shed(hc, off, relaxed).status == SolveStatus::Optimal);
  CHECK(relaxed.gen_mw[0] == Catch::Approx(0.0).margin(1e-9));

  DcopfOptions on;
  on.enforce_gen_min = true;
  HourlyDispatch strict;
  CHECK(solve_min_load_shed(hc, on, strict).status == SolveStatus::Infeasible);
}

TEST_CASE("hourly case construction validates and normalizes input") {
  Network net = parse_network(read_text_file(fixtures_dir() / "network5.json"));
  DemandProfile prof = parse_demand_profile(read_text_file(fixtures_dir() / "profile10.json"));

  CHECK_THROWS_AS(build_hourly_case(net, 1, 24, prof, {}), std::invalid_argument);
  CHECK_THROWS_AS(build_hourly_case(net, 1, -1, prof, {}), std::invalid_argument);
  CHECK_THROWS_AS(build_hourly_case(net, 99, 0, prof, {}), std::out_of_range);
  CHECK_THROWS_WITH(build_hourly_case(net, 1, 0, prof, {"L9"}),
                    Catch::Matchers::ContainsSubstring("L9"));

  HourlyCase hc = build_hourly_case(net, 1, 3, prof, {"L2", "L1", "L2"});
  CHECK(hc.outaged == std::vector<std::string>{"L1", "L2"});
  // hour 3 of day 1: multiplier 0.6 + 0.02 * ((7 + 15) % 25)
  double m = 0.6 + 0.02 * 22;
  CHECK(hc.demand_mw[net.bus_index("B2")] == Catch::Approx(60.0 * m));
  CHECK(hc.demand_mw[net.bus_index("B1")] == 0.0);
}

TEST_CASE("constraint checker pinpoints violations") {
  Network net = parse_network(read_text_file(fixtures_dir() / "network5.json"));
  DemandProfile prof = parse_demand_profile(read_text_file(fixtures_dir() / "profile10.json"));
  HourlyCase hc = build_hourly_case(net, 3, 12, prof, {"L2"});
  HourlyDispatch d;
  REQUIRE(solve_min_load_shed(hc, DcopfOptions{}, d).status == SolveStatus::Optimal);
  CHECK(check_solution(hc, d, DcopfOptions{}).max_residual < 1e-8);

  HourlyDispatch broken = d;
  broken.gen_mw[0] += 1.0;
  SolutionCheck chk = check_solution(hc, broken, DcopfOptions{});
  CHECK(chk.max_residual == Catch::Approx(1.0).margin(1e-8));
  CHECK(chk.worst == "balance B1");

  HourlyDispatch leak = d;
  leak.flow_mw[net.line_index("L2")] = 5.0;  // outaged line must carry zero
  SolutionCheck chk2 = check_solution(hc, leak, DcopfOptions{});
  CHECK(chk2.max_residual >= 5.0);
}

TEST_CASE("every hour of a day solve balances generation demand and shed") {
  Network net = parse_network(read_text_file(fixtures_dir() / "network5.json"));
  DemandProfile prof = parse_demand_profile(read_text_file(fixtures_dir() / "profile10.json"));

  for (const auto& outaged : std::vector<std::vector<std::string>>{
           {}, {"L3"}, {"L1", "L4"}, {"L2", "L3", "L5"}}) {
    DispatchSolution sol;
    SolveReport rep = solve_day(net, 7, prof, outaged, DcopfOptions{}, sol);
    REQUIRE(rep.status == SolveStatus::Optimal);
    for (int hour = 0; hour < 24; ++hour) {
      const HourlyDispatch& d = sol.hours[static_cast<std::size_t>(hour)];
      HourlyCase hc = build_hourly_case(net, 7, hour, prof, outaged);
      double gen = 0.0, demand = 0.0, shed = 0.0;
      for (double g : d.gen_mw) gen += g;
      for (double v : hc.demand_mw) demand += v;
      for (double s : d.shed_mw) shed += s;
      CHECK(std::fabs(gen - (demand - shed)) <= 1e-6 * demand);
      CHECK(check_solution(hc, d, DcopfOptions{}).max_residual <= 1e-6);
    }
  }
}

TEST_CASE("lp listing gives a readable equation form") {
  Network net = two_bus(100.0);
  DemandProfile prof = flat_profile(1);
  HourlyCase hc = build_hourly_case(net, 1, 0, prof, {});
  std::string text = format_hourly_lp(hc, DcopfOptions{});
  CHECK(text.find("min shed_A + shed_B") != std::string::npos);
  CHECK(text.find("subject to") != std::string::npos);
  CHECK(text.find("flow_AB") != std::string::npos);
  CHECK(text.find("bounds") != std::string::npos);
  CHECK(text.find("0 <= gen_G <= 100") != std::string::npos);
  // the reference angle is pinned to [0, 0]
  CHECK(text.find("0 <= theta_A <= 0") != std::string::npos);
}
