// Command-line front end for the ddtwa shared library.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure,
// 3 comparison failure.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddtwa.h"

namespace {

int status_to_exit(ddtwa_status status) {
  switch (status) {
    case DDTWA_OK: return 0;
    case DDTWA_ERR_NUMERICAL: return 2;
    default: return 1;
  }
}

int fail_with(ddtwa_status status) {
  std::fprintf(stderr, "error: %s\n", ddtwa_last_error());
  return status_to_exit(status);
}

struct ScenarioGuard {
  ddtwa_scenario* handle = nullptr;
  ~ScenarioGuard() { ddtwa_scenario_free(handle); }
};

struct SeriesGuard {
  ddtwa_series* handle = nullptr;
  ~SeriesGuard() { ddtwa_series_free(handle); }
};

int write_outputs(const ddtwa_series* series, const std::string& output_dir,
                  const std::string& stem) {
  const std::string csv = output_dir + "/" + stem + ".csv";
  ddtwa_status status = ddtwa_series_write_csv(series, csv.c_str());
  if (status != DDTWA_OK) return fail_with(status);
  const std::string meta = output_dir + "/" + stem + ".meta.json";
  status = ddtwa_series_write_metadata(series, meta.c_str());
  if (status != DDTWA_OK) return fail_with(status);
  std::printf("wrote %s (%zu rows, %zu observables)\n", csv.c_str(), ddtwa_series_rows(series),
              ddtwa_series_columns(series));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ddtwa - stochastic simulator for dissipative spin ensembles"};

  std::string command;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string seed;
  std::string trajectories;
  int threads = 0;
  std::string output_dir = ".";
  std::vector<std::string> tables;
  std::string sweep_param;
  std::vector<double> sweep_values;
  double z_max = 4.0;
  double abs_floor = 0.0;

  app.add_option("--command", command, "one of: run, oracle, compare, sweep, mean-field")
      ->required()
      ->check(CLI::IsMember({"run", "oracle", "compare", "sweep", "mean-field"}));
  app.add_option("--config", config_path, "scenario file (JSON)");
  app.add_option("--set", overrides, "override, e.g. --set run.seed=7")->take_all();
  app.add_option("--seed", seed, "master seed (shorthand for --set run.seed=...)");
  app.add_option("--trajectories", trajectories,
                 "trajectory count (shorthand for --set run.trajectories=...)");
  app.add_option("--threads", threads, "worker threads (0 = hardware)");
  app.add_option("--output-dir", output_dir, "directory for output files");
  app.add_option("--param", sweep_param, "sweep: dotted config path, e.g. model.fields.omega");
  app.add_option("--values", sweep_values, "sweep: parameter values")->delimiter(',');
  app.add_option("--z-max", z_max, "compare: allowed deviation in combined stderr units");
  app.add_option("--abs-floor", abs_floor, "compare: absolute deviation floor");
  app.add_option("tables", tables, "compare: run table and reference table (CSV)");

  CLI11_PARSE(app, argc, argv);

  if (command == "compare") {
    if (tables.size() != 2) {
      std::fprintf(stderr, "error: compare needs exactly two table paths\n");
      return 1;
    }
    SeriesGuard a, b;
    ddtwa_status status = ddtwa_series_read_csv(tables[0].c_str(), &a.handle);
    if (status != DDTWA_OK) return fail_with(status);
    status = ddtwa_series_read_csv(tables[1].c_str(), &b.handle);
    if (status != DDTWA_OK) return fail_with(status);

    int pass = 0;
    char* report = nullptr;
    status = ddtwa_compare(a.handle, b.handle, z_max, abs_floor, &pass, &report);
    if (status != DDTWA_OK) return fail_with(status);

    const std::string report_path = output_dir + "/compare.json";
    if (FILE* f = std::fopen(report_path.c_str(), "w")) {
      std::fputs(report, f);
      std::fputc('\n', f);
      std::fclose(f);
    } else {
      std::fprintf(stderr, "error: cannot write %s\n", report_path.c_str());
      ddtwa_string_free(report);
      return 1;
    }
    std::printf("%s\n", report);
    ddtwa_string_free(report);
    std::printf("compare: %s\n", pass ? "PASS" : "FAIL");
    return pass ? 0 : 3;
  }

  if (config_path.empty()) {
    std::fprintf(stderr, "error: --config is required for %s\n", command.c_str());
    return 1;
  }

  ScenarioGuard scenario;
  ddtwa_status status = ddtwa_scenario_from_file(config_path.c_str(), &scenario.handle);
  if (status != DDTWA_OK) return fail_with(status);

  if (!seed.empty()) overrides.push_back("run.seed=" + seed);
  if (!trajectories.empty()) overrides.push_back("run.trajectories=" + trajectories);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: override '%s' is not of the form key=value\n", kv.c_str());
      return 1;
    }
    status = ddtwa_scenario_set(scenario.handle, kv.substr(0, eq).c_str(),
                                kv.substr(eq + 1).c_str());
    if (status != DDTWA_OK) return fail_with(status);
  }

  SeriesGuard series;
  if (command == "run") {
    status = ddtwa_run(scenario.handle, threads, &series.handle);
  } else if (command == "oracle") {
    status = ddtwa_oracle(scenario.handle, &series.handle);
  } else if (command == "mean-field") {
    status = ddtwa_mean_field(scenario.handle, &series.handle);
  } else {  // sweep
    if (sweep_param.empty()) {
      std::fprintf(stderr, "error: sweep needs --param\n");
      return 1;
    }
    status = ddtwa_sweep(scenario.handle, sweep_param.c_str(), sweep_values.data(),
                         sweep_values.size(), threads, &series.handle);
  }
  if (status != DDTWA_OK) return fail_with(status);

  const std::string stem = (command == "mean-field") ? "mean_field" : command;
  return write_outputs(series.handle, output_dir, stem);
}
