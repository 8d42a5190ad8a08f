#include "ddtwa.h"

#include <cstring>
#include <string>

#include "compare.hpp"
#include "errors.hpp"
#include "runner.hpp"
#include "scenario.hpp"
#include "table.hpp"

struct ddtwa_scenario {
  ddtwa::ScenarioConfig cfg;
  std::string resolved_cache;
};

struct ddtwa_series {
  ddtwa::ObservableSeries series;
  std::string metadata_cache;
};

namespace {

thread_local std::string g_last_error;

ddtwa_status fail(ddtwa_status code, const char* what) {
  g_last_error = what ? what : "unknown error";
  return code;
}

template <typename Fn>
ddtwa_status guarded(Fn&& fn) {
  try {
    fn();
    return DDTWA_OK;
  } catch (const ddtwa::ConfigError& err) {
    return fail(DDTWA_ERR_CONFIG, err.what());
  } catch (const ddtwa::NumericalError& err) {
    return fail(DDTWA_ERR_NUMERICAL, err.what());
  } catch (const ddtwa::IoError& err) {
    return fail(DDTWA_ERR_IO, err.what());
  } catch (const std::exception& err) {
    return fail(DDTWA_ERR_CONFIG, err.what());
  }
}

}  // namespace

extern "C" {

const char* ddtwa_version(void) { return ddtwa::version_string(); }

const char* ddtwa_last_error(void) { return g_last_error.c_str(); }

ddtwa_status ddtwa_scenario_from_file(const char* path, ddtwa_scenario** out) {
  if (!path || !out) return fail(DDTWA_ERR_INVALID, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto handle = new ddtwa_scenario{ddtwa::ScenarioConfig::from_file(path), {}};
    *out = handle;
  });
}

ddtwa_status ddtwa_scenario_from_string(const char* json_text, ddtwa_scenario** out) {
  if (!json_text || !out) return fail(DDTWA_ERR_INVALID, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto handle = new ddtwa_scenario{ddtwa::ScenarioConfig::from_string(json_text), {}};
    *out = handle;
  });
}

ddtwa_status ddtwa_scenario_clone(const ddtwa_scenario* scenario, ddtwa_scenario** out) {
  if (!scenario || !out) return fail(DDTWA_ERR_INVALID, "null argument");
  *out = new ddtwa_scenario{scenario->cfg, {}};
  return DDTWA_OK;
}

ddtwa_status ddtwa_scenario_set(ddtwa_scenario* scenario, const char* key, const char* value) {
  if (!scenario || !key || !value) return fail(DDTWA_ERR_INVALID, "null argument");
  return guarded([&] {
    const auto doc =
        ddtwa::ScenarioConfig::apply_override(scenario->cfg.resolved(), key, value);
    scenario->cfg = ddtwa::ScenarioConfig::parse(doc);
  });
}

const char* ddtwa_scenario_resolved_json(ddtwa_scenario* scenario) {
  if (!scenario) return nullptr;
  scenario->resolved_cache = scenario->cfg.resolved().dump(2);
  return scenario->resolved_cache.c_str();
}

void ddtwa_scenario_free(ddtwa_scenario* scenario) { delete scenario; }

ddtwa_status ddtwa_run(const ddtwa_scenario* scenario, int threads, ddtwa_series** out) {
  if (!scenario || !out) return fail(DDTWA_ERR_INVALID, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto result = ddtwa::run_scenario(scenario->cfg, threads);
    *out = new ddtwa_series{std::move(result.series), {}};
  });
}

ddtwa_status ddtwa_oracle(const ddtwa_scenario* scenario, ddtwa_series** out) {
  if (!scenario || !out) return fail(DDTWA_ERR_INVALID, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto result = ddtwa::oracle_scenario(scenario->cfg);
    *out = new ddtwa_series{std::move(result.series), {}};
  });
}

ddtwa_status ddtwa_mean_field(const ddtwa_scenario* scenario, ddtwa_series** out) {
  if (!scenario || !out) return fail(DDTWA_ERR_INVALID, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto result = ddtwa::mean_field_scenario(scenario->cfg);
    *out = new ddtwa_series{std::move(result.series), {}};
  });
}

ddtwa_status ddtwa_sweep(const ddtwa_scenario* scenario, const char* parameter,
                         const double* values, size_t n_values, int threads, ddtwa_series** out) {
  if (!scenario || !parameter || (!values && n_values > 0) || !out) {
    return fail(DDTWA_ERR_INVALID, "null argument");
  }
  *out = nullptr;
  return guarded([&] {
    const std::vector<double> vals(values, values + n_values);
    auto table = ddtwa::sweep_scenario(scenario->cfg, parameter, vals, threads);
    *out = new ddtwa_series{std::move(table), {}};
  });
}

size_t ddtwa_series_rows(const ddtwa_series* series) {
  return series ? series->series.time.size() : 0;
}

size_t ddtwa_series_columns(const ddtwa_series* series) {
  return series ? series->series.columns.size() : 0;
}

const char* ddtwa_series_column_name(const ddtwa_series* series, size_t column) {
  if (!series || column >= series->series.columns.size()) return nullptr;
  return series->series.columns[column].name.c_str();
}

ddtwa_status ddtwa_series_time(const ddtwa_series* series, double* out, size_t capacity) {
  if (!series || !out) return fail(DDTWA_ERR_INVALID, "null argument");
  if (capacity < series->series.time.size()) {
    return fail(DDTWA_ERR_INVALID, "buffer too small");
  }
  std::memcpy(out, series->series.time.data(), series->series.time.size() * sizeof(double));
  return DDTWA_OK;
}

ddtwa_status ddtwa_series_column(const ddtwa_series* series, size_t column, double* values,
                                 double* stderrs, size_t capacity) {
  if (!series || !values) return fail(DDTWA_ERR_INVALID, "null argument");
  if (column >= series->series.columns.size()) {
    return fail(DDTWA_ERR_INVALID, "column index out of range");
  }
  const auto& col = series->series.columns[column];
  if (capacity < col.value.size()) return fail(DDTWA_ERR_INVALID, "buffer too small");
  std::memcpy(values, col.value.data(), col.value.size() * sizeof(double));
  if (stderrs) std::memcpy(stderrs, col.stderr_.data(), col.stderr_.size() * sizeof(double));
  return DDTWA_OK;
}

const char* ddtwa_series_metadata_json(const ddtwa_series* series) {
  if (!series) return nullptr;
  auto* mutable_series = const_cast<ddtwa_series*>(series);
  mutable_series->metadata_cache = series->series.metadata.dump(2);
  return mutable_series->metadata_cache.c_str();
}

ddtwa_status ddtwa_series_write_csv(const ddtwa_series* series, const char* path) {
  if (!series || !path) return fail(DDTWA_ERR_INVALID, "null argument");
  return guarded([&] { ddtwa::write_table(series->series, path); });
}

ddtwa_status ddtwa_series_write_metadata(const ddtwa_series* series, const char* path) {
  if (!series || !path) return fail(DDTWA_ERR_INVALID, "null argument");
  return guarded([&] { ddtwa::write_metadata_file(series->series.metadata, path); });
}

ddtwa_status ddtwa_series_read_csv(const char* path, ddtwa_series** out) {
  if (!path || !out) return fail(DDTWA_ERR_INVALID, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto handle = new ddtwa_series{ddtwa::read_table(path), {}};
    *out = handle;
  });
}

void ddtwa_series_free(ddtwa_series* series) { delete series; }

ddtwa_status ddtwa_compare(const ddtwa_series* a, const ddtwa_series* b, double z_max,
                           double abs_floor, int* pass, char** report_json) {
  if (!a || !b || !pass) return fail(DDTWA_ERR_INVALID, "null argument");
  return guarded([&] {
    ddtwa::CompareOptions options;
    options.z_max = z_max;
    options.abs_floor = abs_floor;
    const auto report = ddtwa::compare_series(a->series, b->series, options);
    *pass = report.pass ? 1 : 0;
    if (report_json) {
      const std::string text = report.to_json().dump(2);
      char* owned = static_cast<char*>(std::malloc(text.size() + 1));
      std::memcpy(owned, text.c_str(), text.size() + 1);
      *report_json = owned;
    }
  });
}

void ddtwa_string_free(char* text) { std::free(text); }

}  // extern "C"
