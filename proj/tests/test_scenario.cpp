#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>

#include "compare.hpp"
#include "errors.hpp"
#include "runner.hpp"
#include "scenario.hpp"
#include "table.hpp"

using namespace ddtwa;
using nlohmann::json;

namespace {

const char* kMinimal = R"({
  "schema": "ddtwa-scenario/1",
  "model": {"n": 1},
  "noise": [{"kind": "dephasing_individual", "rate": 1.0}],
  "initial": {"theta": 1.5707963267948966, "phi": 0.0},
  "run": {"t_end": 2.0, "dt": 0.01, "output_stride": 20, "trajectories": 400, "seed": 7}
})";

std::string temp_path(const std::string& name) { return "/tmp/ddtwa_test_" + name; }

}  // namespace

TEST_CASE("minimal scenario parses with defaults") {
  const auto cfg = ScenarioConfig::from_string(kMinimal);
  CHECK(cfg.model.n == 1);
  CHECK(cfg.trajectories == 400);
  CHECK(cfg.seed == 7);
  CHECK(cfg.request.collective_means);
  CHECK(cfg.request.spin_length);
  CHECK(!cfg.request.photon);
  CHECK(cfg.steady_state_window == doctest::Approx(0.25));
}

TEST_CASE("unknown keys are rejected with their names") {
  json doc = json::parse(kMinimal);
  doc["model"]["coupling_strngth"] = 1.0;  // typo
  doc["rnu"] = 1;
  try {
    ScenarioConfig::parse(doc);
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    const std::string what = err.what();
    const bool mentions = what.find("coupling_strngth") != std::string::npos ||
                          what.find("rnu") != std::string::npos;
    CHECK(mentions);
  }
}

TEST_CASE("schema field is required") {
  json doc = json::parse(kMinimal);
  doc.erase("schema");
  CHECK_THROWS_AS(ScenarioConfig::parse(doc), ConfigError);
  doc["schema"] = "ddtwa-scenario/999";
  CHECK_THROWS_AS(ScenarioConfig::parse(doc), ConfigError);
}

TEST_CASE("physical validation") {
  json doc = json::parse(kMinimal);
  doc["noise"][0]["rate"] = -0.5;
  CHECK_THROWS_AS(ScenarioConfig::parse(doc), ConfigError);

  doc = json::parse(kMinimal);
  doc["run"]["t_end"] = -1.0;
  CHECK_THROWS_AS(ScenarioConfig::parse(doc), ConfigError);

  doc = json::parse(kMinimal);
  doc["observables"] = {{"photon", true}};  // no cavity in the model
  CHECK_THROWS_AS(ScenarioConfig::parse(doc), ConfigError);

  doc = json::parse(kMinimal);
  doc["model"]["lattice"] = {{"dims", {2, 2, 0}}};
  CHECK_THROWS_AS(ScenarioConfig::parse(doc), ConfigError);
}

TEST_CASE("resolved round trip is idempotent") {
  const auto cfg = ScenarioConfig::from_string(kMinimal);
  const json once = cfg.resolved();
  const auto cfg2 = ScenarioConfig::parse(once);
  const json twice = cfg2.resolved();
  CHECK(once == twice);
}

TEST_CASE("overrides address nested keys and array entries") {
  json doc = json::parse(kMinimal);
  doc = ScenarioConfig::apply_override(doc, "run.seed", "123");
  doc = ScenarioConfig::apply_override(doc, "noise.0.rate", "0.25");
  doc = ScenarioConfig::apply_override(doc, "model.fields.omega", "2.0");
  const auto cfg = ScenarioConfig::parse(doc);
  CHECK(cfg.seed == 123);
  CHECK(cfg.noise[0].rate == doctest::Approx(0.25));
  CHECK(cfg.model.fields.uniform[0] == doctest::Approx(2.0));

  CHECK_THROWS_AS(ScenarioConfig::apply_override(doc, "noise.7.rate", "0.1"), ConfigError);
}

TEST_CASE("auto step-size rule follows the fastest rate") {
  json doc = json::parse(kMinimal);
  doc["run"].erase("dt");
  doc["model"]["fields"] = {{"omega", 5.0}, {"axis", "x"}};
  const auto cfg = ScenarioConfig::parse(doc);
  // rate: |omega| = 5 plus dephasing 1 -> dt = 0.01 / 5
  CHECK(cfg.resolve_dt() == doctest::Approx(0.002).epsilon(1e-12));
}

TEST_CASE("table write/read round trip") {
  const auto cfg = ScenarioConfig::from_string(kMinimal);
  const auto out = run_scenario(cfg, 1);
  const std::string path = temp_path("roundtrip.csv");
  write_table(out.series, path);
  const auto back = read_table(path);
  REQUIRE(back.time.size() == out.series.time.size());
  REQUIRE(back.columns.size() == out.series.columns.size());
  for (std::size_t c = 0; c < back.columns.size(); ++c) {
    CHECK(back.columns[c].name == out.series.columns[c].name);
    for (std::size_t t = 0; t < back.time.size(); ++t) {
      CHECK(back.columns[c].value[t] == out.series.columns[c].value[t]);
      const double a = back.columns[c].stderr_[t];
      const double b = out.series.columns[c].stderr_[t];
      CHECK(((std::isnan(a) && std::isnan(b)) || a == b));
    }
  }
  std::remove(path.c_str());
}

TEST_CASE("metadata reproduces the run") {
  const auto cfg = ScenarioConfig::from_string(kMinimal);
  const auto out = run_scenario(cfg, 1);
  REQUIRE(out.series.metadata.contains("config"));
  const auto cfg2 = ScenarioConfig::parse(out.series.metadata["config"]);
  const auto out2 = run_scenario(cfg2, 1);
  for (std::size_t c = 0; c < out.series.columns.size(); ++c) {
    for (std::size_t t = 0; t < out.series.time.size(); ++t) {
      CHECK(out.series.columns[c].value[t] == out2.series.columns[c].value[t]);
    }
  }
  CHECK(out.series.metadata.contains("wall_clock_s"));
  CHECK(out.series.metadata.contains("version"));
  CHECK(out.series.metadata.contains("spin_length_summary"));
}

TEST_CASE("compare: identical tables pass with zero scores") {
  const auto cfg = ScenarioConfig::from_string(kMinimal);
  const auto out = run_scenario(cfg, 1);
  const auto report = compare_series(out.series, out.series, CompareOptions{});
  CHECK(report.pass);
  for (const auto& obs : report.observables) {
    CHECK(obs.max_abs_dev == 0.0);
    CHECK(obs.max_z == 0.0);
  }
}

TEST_CASE("compare: disjoint grids and shifted values fail correctly") {
  ObservableSeries a, b;
  a.time = {0.0, 1.0};
  b.time = {0.0, 2.0};
  ObservableColumn col;
  col.name = "x";
  col.value = {1.0, 1.0};
  col.stderr_ = {0.1, 0.1};
  a.columns.push_back(col);
  b.columns.push_back(col);
  CHECK_THROWS_AS(compare_series(a, b, CompareOptions{}), ConfigError);

  b.time = a.time;
  b.columns[0].value = {1.0, 2.0};  // 10 sigma off (combined se ~ 0.141)
  const auto report = compare_series(a, b, CompareOptions{});
  CHECK(!report.pass);
  CHECK(report.observables[0].max_abs_dev == doctest::Approx(1.0));
  CHECK(report.observables[0].max_z == doctest::Approx(1.0 / std::sqrt(0.02)).epsilon(1e-6));
  CHECK(report.observables[0].worst_time == 1.0);

  // the absolute floor alone can admit the deviation
  CompareOptions loose;
  loose.z_max = 0.0;
  loose.abs_floor = 1.5;
  CHECK(compare_series(a, b, loose).pass);
}

TEST_CASE("sweep aggregates steady-state values per parameter value") {
  json doc = json::parse(kMinimal);
  doc["run"]["trajectories"] = 200;
  const auto cfg = ScenarioConfig::parse(doc);
  const auto table = sweep_scenario(cfg, "noise.0.rate", {0.5, 1.0, 2.0}, 1);
  REQUIRE(table.time.size() == 3);
  CHECK(table.time[0] == 0.5);
  CHECK(table.time[2] == 2.0);
  const ObservableColumn* sx = table.find("Sx_mean");
  REQUIRE(sx != nullptr);
  // faster dephasing leaves less steady-state coherence
  CHECK(sx->value[0] > sx->value[2]);

  const auto empty = sweep_scenario(cfg, "noise.0.rate", {}, 1);
  CHECK(empty.time.empty());
}

TEST_CASE("oracle scenario shares the grid and column names with the run") {
  json doc = json::parse(kMinimal);
  doc["run"]["trajectories"] = 50000;
  const auto cfg = ScenarioConfig::parse(doc);
  const auto run = run_scenario(cfg, 1);
  const auto oracle = oracle_scenario(cfg);
  REQUIRE(run.series.time.size() == oracle.series.time.size());

  // single-spin dephasing: every mean observable within 5 stderr of the oracle
  const auto report = compare_series(run.series, oracle.series, CompareOptions{5.0, 1e-3});
  for (const auto& obs : report.observables) {
    if (obs.name == "spin_length") {
      // the explicit step grows <<s^2>> by ~2 Gp^2 dt t (0.04 here); the
      // diagnostic exposes exactly this discretization effect
      CHECK(obs.max_abs_dev < 0.06);
    } else {
      CHECK(obs.pass);
    }
  }
}
