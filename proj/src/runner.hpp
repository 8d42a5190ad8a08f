#ifndef DDTWA_RUNNER_HPP
#define DDTWA_RUNNER_HPP

#include <string>
#include <vector>

#include "compare.hpp"
#include "integrate.hpp"
#include "observables.hpp"
#include "scenario.hpp"

namespace ddtwa {

const char* version_string();

struct RunOutput {
  ObservableSeries series;            // metadata embedded in series.metadata
  std::vector<SteadyValue> steady;    // window-averaged values
  std::size_t failures = 0;
  double resolved_dt = 0.0;
};

// Stochastic DDTWA ensemble run. threads <= 0 picks hardware concurrency.
RunOutput run_scenario(const ScenarioConfig& cfg, int threads);

// Exact dense master-equation run on the same scenario and grid.
RunOutput oracle_scenario(const ScenarioConfig& cfg);

// Deterministic mean-field reference.
RunOutput mean_field_scenario(const ScenarioConfig& cfg);

// Steady-state scan over one scenario parameter: the result's "time" column
// carries the parameter value and each observable column its window average.
// Failed sub-runs are reported in the metadata and skipped.
ObservableSeries sweep_scenario(const ScenarioConfig& base, const std::string& parameter,
                                const std::vector<double>& values, int threads);

}  // namespace ddtwa

#endif
