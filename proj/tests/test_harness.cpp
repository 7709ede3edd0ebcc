#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>

#include "convbound/harness/json_io.hpp"
#include "convbound/harness/scenario.hpp"
#include "convbound/harness/sweep.hpp"
#include "test_support.hpp"

using namespace convbound;
using namespace convbound::harness;
namespace fs = std::filesystem;

namespace {

json scenario_file(const std::string& name) { return read_json_file(fs::path(CONVBOUND_SCENARIO_DIR) / name); }

bool mentions(const std::vector<std::string>& errors, const std::string& needle) {
  return std::any_of(errors.begin(), errors.end(), [&](const auto& e) { return e.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("shipped scenarios validate") {
  for (const char* name : {"osa_tracking.json", "pp_switching.json", "deadbeat.json", "divergent.json"}) {
    INFO(name);
    CHECK(validate_scenario(scenario_file(name)).empty());
  }
  CHECK_NOTHROW(parse_sweep(read_json_file(fs::path(CONVBOUND_SCENARIO_DIR) / "umd_sweep.json")));
}

TEST_CASE("validation reports every violation with its location") {
  const auto errors = validate_scenario(scenario_file("invalid.json"));
  CHECK(errors.size() == 3);
  CHECK(mentions(errors, "scenario.controller.sets[0]: set contains points with b = 0"));
  CHECK(mentions(errors, "scenario.controller.initial[1]: initial estimate lies outside its set"));
  CHECK(mentions(errors, "scenario.certify.lambda_grid: must be nonempty"));
  CHECK_THROWS_AS(load_scenario(scenario_file("invalid.json")), ValidationError);
}

TEST_CASE("individual configuration violations") {
  const json pp = scenario_file("pp_switching.json");

  json short_period = pp;
  short_period["controller"]["period"] = 3;
  CHECK(mentions(validate_scenario(short_period), "scenario.controller.period"));

  json ok_period = pp;
  ok_period["controller"]["period"] = 4;
  CHECK(validate_scenario(ok_period).empty());

  json schema = pp;
  schema["schema"] = "convbound.scenario/0";
  CHECK(mentions(validate_scenario(schema), "scenario.schema"));

  json no_schema = pp;
  no_schema.erase("schema");
  CHECK(mentions(validate_scenario(no_schema), "scenario.schema"));

  json dims = pp;
  dims["controller"]["initial"][0] = {0.1, 0.2};
  CHECK(mentions(validate_scenario(dims), "scenario.controller.initial[0]: length must be 2n"));

  json outside = pp;
  outside["theta"]["value"] = {3.0, 0.0, 1.0, 0.0};
  CHECK(mentions(validate_scenario(outside), "scenario.theta.value"));

  json bad_lambda = pp;
  bad_lambda["certify"]["lambda_grid"] = {0.5, 1.0};
  CHECK(mentions(validate_scenario(bad_lambda), "scenario.certify.lambda_grid"));

  json unknown = pp;
  unknown["controller"]["kind"] = "mrac";
  CHECK(mentions(validate_scenario(unknown), "unknown controller"));

  json nonconvex = scenario_file("osa_tracking.json");
  nonconvex["controller"]["sets"][0] = nonconvex["plant"]["parameter_set"];
  CHECK(mentions(validate_scenario(nonconvex), "estimator sets must be convex"));

  json high_order = scenario_file("osa_tracking.json");
  high_order["plant"]["order"] = 2;
  CHECK(mentions(validate_scenario(high_order), "the osa controller needs order 1"));

  json negative_seed = pp;
  negative_seed["seed"] = -1;
  CHECK(mentions(validate_scenario(negative_seed), "scenario.seed: must be >= 0"));
  json big_seed = pp;
  big_seed["seed"] = std::numeric_limits<std::uint64_t>::max();
  CHECK(load_scenario(big_seed).seed == std::numeric_limits<std::uint64_t>::max());

  CHECK(mentions(validate_scenario(json::array()), "expected a JSON object"));
}

TEST_CASE("scenario runs are reproducible from the seed") {
  const Scenario s = load_scenario(scenario_file("osa_tracking.json"));
  const auto a = run_scenario(s), b = run_scenario(s);
  CHECK(trace_csv(a.trace) == trace_csv(b.trace));
  CHECK(trajectory_csv(*a.trajectory) == trajectory_csv(*b.trajectory));
  CHECK(summary_json(s, a).dump() == summary_json(s, b).dump());
  REQUIRE(a.membership);
  CHECK(a.membership->member);

  Scenario other = s;
  other.seed = s.seed + 1;
  CHECK(trace_csv(run_scenario(other).trace) != trace_csv(a.trace));
}

TEST_CASE("scenario summary and trace layout") {
  const Scenario s = load_scenario(scenario_file("deadbeat.json"));
  const auto run = run_scenario(s);
  CHECK_FALSE(run.trace.diverged);
  REQUIRE(run.frontier.size() == 3);
  for (std::size_t i = 0; i < run.frontier.size(); ++i) {
    CHECK(run.certificates[i].verified);
    CHECK(run.certificates[i].c == run.frontier[i].c_min);
  }
  const json j = summary_json(s, run);
  CHECK(j["schema"] == "convbound.summary/1");
  CHECK(j["certificates"][0].contains("worst_pair"));
  for (const char* key : {"c", "lambda", "state_kind", "verified", "max_slack", "worst_pair"})
    CHECK(j["certificates"][0].contains(key));
  const std::string csv = trace_csv(run.trace);
  CHECK(csv.substr(0, csv.find('\n')) == "t,y_0,u_0,w_0,r_0,sigma,m_umd,norm_phi_z1");
  // 17 significant digits survive a text round trip
  std::istringstream is(csv);
  const auto table = read_trace_csv(is);
  for (std::size_t k = 0; k < run.trace.steps.size(); ++k)
    CHECK(table.col("y_0")[k] == run.trace.steps[k].y(0));
}

TEST_CASE("divergent scenario stops at the first overflow") {
  const Scenario s = load_scenario(scenario_file("divergent.json"));
  const auto run = run_scenario(s);
  REQUIRE(run.trace.diverged);
  REQUIRE(run.trace.divergence_time);
  CHECK(run.trace.steps.back().t == *run.trace.divergence_time);
  CHECK(run.trace.steps.back().phi.norm() > 1e12);
  CHECK(run.trace.steps[run.trace.steps.size() - 2].phi.norm() <= 1e12);
  CHECK(run.frontier.empty());
  CHECK(summary_json(s, run)["diverged"] == true);
}

TEST_CASE("json helpers") {
  CHECK(number(std::nan("")).is_null());
  CHECK(number(-std::numeric_limits<double>::infinity()).is_null());
  CHECK(number(1.5) == 1.5);
  const auto dir = fs::temp_directory_path() / "convbound_json_io_test";
  fs::create_directories(dir);
  write_file_atomic(dir / "x.json", R"({"a": 1})");
  CHECK(read_json_file(dir / "x.json")["a"] == 1);
  std::ofstream(dir / "bad.json") << "{";
  CHECK_THROWS_AS(read_json_file(dir / "bad.json"), ValidationError);
  CHECK_THROWS_AS(read_json_file(dir / "missing.json"), ValidationError);
  fs::remove_all(dir);
}

TEST_CASE("sweep seeds and aggregation") {
  SweepSpec sw = parse_sweep(read_json_file(fs::path(CONVBOUND_SCENARIO_DIR) / "umd_sweep.json"));
  sw.values = {0.0, 5.0};
  sw.seeds = 3;
  sw.scenario["horizon"] = 120;
  sw.workers = 1;
  const auto serial = run_sweep(sw);
  sw.workers = 4;
  const auto parallel = run_sweep(sw);
  CHECK(sweep_csv(serial) == sweep_csv(parallel));
  CHECK(to_json(serial).dump() == to_json(parallel).dump());

  REQUIRE(serial.rows.size() == 6);
  std::set<std::uint64_t> seeds;
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(serial.rows[k].seed == serial.rows[3 + k].seed);
    seeds.insert(serial.rows[k].seed);
  }
  CHECK(seeds.size() == 3);
  for (const auto& row : serial.rows) CHECK(std::isfinite(row.fitted_c) != row.diverged);

  REQUIRE(serial.points.size() == 2);
  for (std::size_t v = 0; v < 2; ++v) {
    const auto& p = serial.points[v];
    std::size_t div = 0;
    double worst = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      div += serial.rows[v * 3 + k].diverged;
      if (!serial.rows[v * 3 + k].diverged) worst = std::max(worst, serial.rows[v * 3 + k].fitted_c);
    }
    CHECK(p.runs == 3);
    CHECK(p.divergences == div);
    CHECK(p.divergence_fraction == static_cast<double>(div) / 3.0);
    if (div < 3) CHECK(p.max_fitted_c == worst);
  }
  CHECK(serial.points[0].divergences == 0);
  const std::string csv = sweep_csv(serial);
  CHECK(csv.substr(0, csv.find('\n')) == "swept_value,seed,fitted_c,diverged");
  CHECK(to_json(serial)["schema"] == "convbound.sweep_report/1");
}

TEST_CASE("sweep validation") {
  json j = read_json_file(fs::path(CONVBOUND_SCENARIO_DIR) / "umd_sweep.json");
  json unknown = j;
  unknown["parameter"] = "gain";
  CHECK_THROWS_AS(parse_sweep(unknown), ValidationError);
  json no_umd = j;
  no_umd["scenario"].erase("umd");
  CHECK_THROWS_AS(parse_sweep(no_umd), ValidationError);
  json eps = j;
  eps["parameter"] = "epsilon";
  CHECK_THROWS_AS(parse_sweep(eps), ValidationError);
  json negative = j;
  negative["values"] = {0.1, -1.0};
  try {
    parse_sweep(negative);
    FAIL("negative mu accepted");
  } catch (const ValidationError& e) {
    CHECK(mentions(e.violations(), "at mu=-1: scenario.umd.mu: must be >= 0"));
  }
  json empty = j;
  empty["values"] = json::array();
  CHECK_THROWS_AS(parse_sweep(empty), ValidationError);
}
