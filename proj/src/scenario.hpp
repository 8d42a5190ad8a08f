#ifndef DDTWA_SCENARIO_HPP
#define DDTWA_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "model.hpp"
#include "noise.hpp"
#include "observables.hpp"
#include "oracle.hpp"
#include "vendor_json.hpp"

namespace ddtwa {

inline constexpr const char* kScenarioSchema = "ddtwa-scenario/1";

// A fully validated scenario: model, noise channels, initial state, run
// parameters and observable selection. Unknown keys anywhere in the input
// are rejected; `resolved()` returns the canonical form with all defaults
// materialized (runs are reproducible from that document alone).
struct ScenarioConfig {
  ModelSpec model;
  std::vector<NoiseChannelSpec> noise;
  ProductStateSpec initial;
  ObservableRequest request;
  OracleOptions oracle;

  double t_end = 1.0;
  double dt = 0.0;  // 0 = auto step-size rule
  int output_stride = 1;
  std::size_t trajectories = 1000;
  std::uint64_t seed = 0;
  double steady_state_window = 0.25;
  bool allow_failures = false;

  static ScenarioConfig parse(const nlohmann::json& doc);
  static ScenarioConfig from_string(const std::string& text);
  static ScenarioConfig from_file(const std::string& path);

  nlohmann::json resolved() const;

  // Applies `--set key=value` style overrides (dotted paths, numeric array
  // indices) to the resolved document and re-validates.
  static nlohmann::json apply_override(const nlohmann::json& doc, const std::string& key,
                                       const std::string& value);

  // Step size: explicit dt, or 0.01 / max(typical field, channel rates).
  double resolve_dt() const;
};

}  // namespace ddtwa

#endif
