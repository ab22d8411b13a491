#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "selfgrav/errors.hpp"
#include "selfgrav/scenario.hpp"

using namespace selfgrav;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("selfgrav_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Scenario make(const std::string& name, const fs::path& out = {}) {
  Scenario sc;
  sc.name = name;
  sc.config = scenario_defaults(name);
  sc.out_dir = out;
  sc.curve_samples = 200;
  return sc;
}

}  // namespace

TEST_CASE("scenario names and defaults") {
  CHECK(scenario_names().size() == 6);
  CHECK(scenario_defaults("short-protocol").protocol.T5 == doctest::Approx(0.2));
  CHECK(scenario_defaults("oracle-compare").constants.name == "paper-scaled");
  CHECK(scenario_defaults("baseline").constants.name == "paper");
  CHECK_THROWS_AS(scenario_defaults("fig5"), ValidationError);
}

TEST_CASE("baseline run writes deterministic artifacts") {
  const auto a = scratch_dir("det_a");
  const auto b = scratch_dir("det_b");
  const auto ra = run(make("baseline", a));
  const auto rb = run(make("baseline", b));
  CHECK(ra.delta_phi == doctest::Approx(-15.33).epsilon(0.03));
  for (const char* f : {"phase_curve.csv", "spread_curve.csv"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const std::string curve = slurp(a / "phase_curve.csv");
  CHECK(curve.rfind("# scenario=baseline constants=paper build=", 0) == 0);
  CHECK(curve.find("t_s,delta_phi_rad,i1_diff,i2_diff,const_self_diff,newton_diff,classical_diff") !=
        std::string::npos);
  CHECK(std::count(curve.begin(), curve.end(), '\n') == 202);
  const std::string json = slurp(a / "summary.json");
  CHECK(json.find("\"constants\": \"paper\"") != std::string::npos);
  CHECK(json.find("\"delta_phi_rad\"") != std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("symmetric override gives zero") {
  auto sc = make("baseline");
  sc.config.weights = {0.5, 0.5};
  CHECK(std::abs(run(sc).delta_phi) < 1e-10);
}

TEST_CASE("sweeps and contributions") {
  const auto dir = scratch_dir("sweeps");
  auto sw = make("radius-sweep", dir);
  sw.jobs = 2;
  const auto r = run(sw);
  CHECK(*r.quantity("sweep_slope") >= 4.75);
  CHECK(*r.quantity("sweep_slope") <= 5.25);
  CHECK(*r.quantity("sweep_failures") == 0.0);
  CHECK(fs::exists(dir / "radius_sweep.csv"));

  const auto q = run(make("q0-sweep", dir));
  for (const char* tag : {"1e-09", "1e-10", "1e-13"}) {
    CHECK(q.quantity(std::string("delta_phi_sqrtQ0_") + tag).has_value());
    CHECK(fs::exists(dir / (std::string("contributions_sqrtQ0_") + tag + ".csv")));
  }
  CHECK(*q.quantity("omega_trap_sqrtQ0_1e-13") == doctest::Approx(1.82e6).epsilon(0.01));

  run(make("contributions", dir));
  const std::string text = slurp(dir / "contributions.csv");
  CHECK(text.find("newton_cross_diff") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("expectation files") {
  const auto e = parse_expectations(
      "# comment\n"
      "quantity,target,tolerance,provenance\n"
      "delta_phi,-15.33,3%,quoted value\n"
      "\n"
      "separation_time, 0.034, 0.001 , quoted value\n");
  REQUIRE(e.size() == 2);
  CHECK(e[0].relative);
  CHECK(e[0].tolerance == 3.0);
  CHECK_FALSE(e[1].relative);
  CHECK(e[1].target == 0.034);
  CHECK(e[1].provenance == "quoted value");

  CHECK_THROWS_AS(parse_expectations("delta_phi,-15.33,3%\n"), ValidationError);
  CHECK_THROWS_AS(parse_expectations("delta_phi,abc,3%,x\n"), ValidationError);
  CHECK_THROWS_AS(parse_expectations("delta_phi,1,-2,x\n"), ValidationError);
  CHECK_THROWS_AS(parse_expectations("delta_phi,1,2x,x\n"), ValidationError);
}

TEST_CASE("comparison") {
  const auto summary = run(make("baseline"));
  const auto good = parse_expectations(
      "delta_phi,-15.33,3%,quoted value\nnaive_estimate,-15.59,2%,quoted value\n");
  const auto ok = compare(summary, good);
  CHECK(ok.ok());
  CHECK(ok.to_string().find("PASS delta_phi") != std::string::npos);

  const auto missing = compare(summary, parse_expectations("no_such_thing,1,1,x\n"));
  CHECK_FALSE(missing.ok());

  const auto empty = compare(summary, std::vector<Expectation>{});
  CHECK(empty.ok());
  CHECK_FALSE(empty.warnings.empty());

  auto perturbed = make("baseline");
  perturbed.config.constants.G *= 1.1;
  const auto bad = compare(run(perturbed), good);
  CHECK_FALSE(bad.ok());
  CHECK(bad.to_string().find("FAIL delta_phi") != std::string::npos);
}

TEST_CASE("invalid scenario configurations are rejected") {
  auto sc = make("baseline");
  sc.config.protocol.T5 = 2.1;
  CHECK_THROWS_AS(run(sc), ValidationError);
}
