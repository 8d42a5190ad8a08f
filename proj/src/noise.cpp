#include "noise.hpp"

#include <cmath>

#include "errors.hpp"

namespace ddtwa {

const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::dephasing_individual: return "dephasing_individual";
    case NoiseKind::dephasing_collective: return "dephasing_collective";
    case NoiseKind::dephasing_colored: return "dephasing_colored";
    case NoiseKind::decay_standard: return "decay_standard";
    case NoiseKind::decay_improved: return "decay_improved";
    case NoiseKind::decay_qle: return "decay_qle";
    case NoiseKind::cavity_loss: return "cavity_loss";
  }
  return "?";
}

void NoiseChannelSpec::validate() const {
  if (rate < 0.0) throw ConfigError("noise: rate must be >= 0");
  if (kind == NoiseKind::dephasing_colored) {
    if (sigma < 0.0) throw ConfigError("noise: sigma must be >= 0");
    if (tau_c <= 0.0) throw ConfigError("noise: tau_c must be > 0");
  }
}

void ou_step(OUState& state, double tau_c, double sigma, double dt, const double* deta) {
  const double decay = dt / tau_c;
  const double diff = std::sqrt(2.0 / tau_c) * sigma;
  for (std::size_t i = 0; i < state.xi.size(); ++i) {
    state.xi[i] += -state.xi[i] * decay + diff * deta[i];
  }
}

OUState ou_init_stationary(std::size_t count, double sigma, const RandomStream& rng) {
  OUState state;
  state.xi.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    state.xi[i] =
        sigma * rng.normal_pair(StreamPurpose::ou_init, static_cast<std::uint32_t>(i), 0)[0];
  }
  return state;
}

}  // namespace ddtwa
