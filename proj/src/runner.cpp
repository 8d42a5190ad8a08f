#include "runner.hpp"

#include <chrono>
#include <cmath>

#include "errors.hpp"
#include "oracle.hpp"
#include "table.hpp"

#ifndef DDTWA_VERSION
#define DDTWA_VERSION "0.0.0"
#endif

namespace ddtwa {

namespace {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

json base_metadata(const ScenarioConfig& cfg, const char* command) {
  json meta;
  meta["schema"] = "ddtwa-table-meta/1";
  meta["command"] = command;
  meta["version"] = version_string();
  meta["config"] = cfg.resolved();
  meta["seed"] = cfg.seed;
  meta["trajectories"] = cfg.trajectories;
  meta["model_hash"] = fnv1a(meta["config"]["model"].dump());
  meta["jbar"] = cfg.model.jbar();
  meta["jbar_convention"] = "sum of J_ij over ordered pairs (i != j) divided by N";
  meta["lattice_boundaries"] = "open, Euclidean distances";
  return meta;
}

void attach_series_summary(json& meta, const ObservableSeries& series) {
  const ObservableColumn* len = series.find("spin_length");
  if (len && !len->value.empty()) {
    double lo = len->value.front(), hi = len->value.front();
    for (double v : len->value) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    meta["spin_length_summary"] = {
        {"min", lo}, {"max", hi}, {"final", len->value.back()}};
  }
  const ObservableColumn* pn = series.find("photon_number");
  if (pn && !pn->value.empty()) {
    bool flagged = false;
    for (std::size_t t = 0; t < pn->value.size(); ++t) {
      const double se = std::isfinite(pn->stderr_[t]) ? pn->stderr_[t] : 0.0;
      if (pn->value[t] < -4.0 * se - 1e-12) flagged = true;
    }
    meta["photon_number_negative"] = flagged;
  }
}

}  // namespace

const char* version_string() { return DDTWA_VERSION; }

RunOutput run_scenario(const ScenarioConfig& cfg, int threads) {
  const auto started = std::chrono::steady_clock::now();

  const double dt = cfg.resolve_dt();
  const TimeGrid grid = TimeGrid::resolve(cfg.t_end, dt, cfg.output_stride);
  TrajectorySpec spec;
  spec.n_t = cfg.trajectories;
  spec.master_seed = cfg.seed;
  spec.worker_count = threads;
  spec.allow_failures = cfg.allow_failures;

  RunResult result = run_ensemble(spec, cfg.model, cfg.noise, cfg.initial, grid, cfg.request);

  RunOutput out;
  out.series = std::move(result.series);
  out.steady = steady_state_summary(*result.accumulator, cfg.request, cfg.model.n, result.times,
                                    cfg.steady_state_window);
  out.failures = result.failures;
  out.resolved_dt = result.resolved_dt;

  json meta = base_metadata(cfg, "run");
  meta["engine"] = "ddtwa";
  meta["dt"] = result.resolved_dt;
  meta["n_steps"] = grid.n_steps;
  meta["threads"] = threads;
  meta["failures"] = result.failures;
  if (result.failures > 0) {
    json failed = json::array();
    const auto& list = result.accumulator->failures();
    for (std::size_t k = 0; k < list.size() && k < 16; ++k) {
      failed.push_back({{"trajectory", list[k].first}, {"message", list[k].second}});
    }
    meta["failed_trajectories"] = failed;
  }
  attach_series_summary(meta, out.series);
  const auto finished = std::chrono::steady_clock::now();
  meta["wall_clock_s"] = std::chrono::duration<double>(finished - started).count();
  out.series.metadata = std::move(meta);
  return out;
}

RunOutput oracle_scenario(const ScenarioConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  const double dt = cfg.resolve_dt();
  const TimeGrid grid = TimeGrid::resolve(cfg.t_end, dt, cfg.output_stride);

  ObservableSeries series =
      evolve_master_equation(cfg.model, cfg.noise, cfg.initial, grid, cfg.request, cfg.oracle);

  RunOutput out;
  json meta = base_metadata(cfg, "oracle");
  for (auto it = series.metadata.begin(); it != series.metadata.end(); ++it) {
    meta[it.key()] = it.value();
  }
  out.steady = steady_state_summary(series, cfg.steady_state_window);
  const auto finished = std::chrono::steady_clock::now();
  meta["wall_clock_s"] = std::chrono::duration<double>(finished - started).count();
  series.metadata = std::move(meta);
  out.series = std::move(series);
  out.resolved_dt = grid.dt;
  return out;
}

RunOutput mean_field_scenario(const ScenarioConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  const double dt = cfg.resolve_dt();
  const TimeGrid grid = TimeGrid::resolve(cfg.t_end, dt, cfg.output_stride);

  ObservableSeries series =
      mean_field_reference(cfg.model, cfg.noise, cfg.initial, grid, cfg.request);

  RunOutput out;
  json meta = base_metadata(cfg, "mean-field");
  for (auto it = series.metadata.begin(); it != series.metadata.end(); ++it) {
    meta[it.key()] = it.value();
  }
  out.steady = steady_state_summary(series, cfg.steady_state_window);
  const auto finished = std::chrono::steady_clock::now();
  meta["wall_clock_s"] = std::chrono::duration<double>(finished - started).count();
  series.metadata = std::move(meta);
  out.series = std::move(series);
  out.resolved_dt = grid.dt;
  return out;
}

ObservableSeries sweep_scenario(const ScenarioConfig& base, const std::string& parameter,
                                const std::vector<double>& values, int threads) {
  ObservableSeries table;
  json meta = base_metadata(base, "sweep");
  meta["parameter"] = parameter;
  meta["values"] = values;
  json errors = json::array();

  const json base_doc = base.resolved();
  bool columns_ready = false;
  for (double value : values) {
    json doc;
    try {
      doc = ScenarioConfig::apply_override(base_doc, parameter, format_double(value));
    } catch (const ConfigError& err) {
      throw ConfigError(std::string("sweep: parameter not addressable: ") + err.what());
    }
    try {
      const ScenarioConfig cfg = ScenarioConfig::parse(doc);
      const RunOutput out = run_scenario(cfg, threads);
      if (!columns_ready) {
        table.columns.resize(out.steady.size());
        for (std::size_t c = 0; c < out.steady.size(); ++c) {
          table.columns[c].name = out.steady[c].name;
        }
        columns_ready = true;
      }
      table.time.push_back(value);
      for (std::size_t c = 0; c < out.steady.size(); ++c) {
        table.columns[c].value.push_back(out.steady[c].value);
        table.columns[c].stderr_.push_back(out.steady[c].stderr_);
      }
    } catch (const std::exception& err) {
      errors.push_back({{"value", value}, {"message", err.what()}});
    }
  }
  meta["sub_run_errors"] = errors;
  table.metadata = std::move(meta);
  return table;
}

}  // namespace ddtwa
