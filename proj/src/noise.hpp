#ifndef DDTWA_NOISE_HPP
#define DDTWA_NOISE_HPP

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "rng.hpp"
#include "spin_state.hpp"

namespace ddtwa {

enum class NoiseKind {
  dephasing_individual,
  dephasing_collective,
  dephasing_colored,
  decay_standard,
  decay_improved,
  decay_qle,
  cavity_loss,
};

const char* to_string(NoiseKind kind);

struct NoiseChannelSpec {
  NoiseKind kind = NoiseKind::dephasing_individual;
  double rate = 0.0;       // Gamma_phi, Gamma_phi^C, Gamma or kappa
  double sigma = 0.0;      // colored noise strength (rate units)
  double tau_c = 0.0;      // colored noise correlation time
  bool collective = false; // colored noise: one shared process instead of N

  void validate() const;
};

// Ornstein-Uhlenbeck noise values xi_i, one per spin (or a single shared
// value for collective colored noise).
struct OUState {
  std::vector<double> xi;
};

// --- Ito increments. dW arguments are Wiener increments ~ N(0, dt), drawn
// by the caller; all increments are evaluated at the pre-step state.

// White-noise dephasing:
//   ds^x = -Gp s^x dt - sqrt(2 Gp) s^y dW
//   ds^y = -Gp s^y dt + sqrt(2 Gp) s^x dW
//   ds^z = 0
// Preserves |s|^2 exactly in expectation.
inline BlochVector dephasing_increment(const BlochVector& s, double gamma_phi, double dt,
                                       double dW) {
  const double diff = std::sqrt(2.0 * gamma_phi);
  return {-gamma_phi * s.x * dt - diff * s.y * dW, -gamma_phi * s.y * dt + diff * s.x * dW, 0.0};
}

// Single-Wiener decay process:
//   ds^x = -(G/2) s^x dt - sqrt(G) s^y dW
//   ds^y = -(G/2) s^y dt + sqrt(G) s^x dW
//   ds^z = -G (s^z+1) dt + sqrt(G) (s^z+1) dW
// Mean length change per step: G (1 - <(s^z)^2>) dt.
inline BlochVector decay_increment(const BlochVector& s, double gamma, double dt, double dW) {
  const double root = std::sqrt(gamma);
  const double zp = s.z + 1.0;
  return {-0.5 * gamma * s.x * dt - root * s.y * dW, -0.5 * gamma * s.y * dt + root * s.x * dW,
          -gamma * zp * dt + root * zp * dW};
}

// Two-Wiener decay process; same deterministic part as decay_increment but
// mean length change (G/2)(4 - <sx^2> - <sy^2> - 2<sz^2>) dt, which vanishes
// on the unit-length shell much more symmetrically.
inline BlochVector decay_increment_improved(const BlochVector& s, double gamma, double dt,
                                            double dW1, double dW2) {
  const double half_root = 0.5 * std::sqrt(gamma);
  const double zp = s.z + 1.0;
  return {-0.5 * gamma * s.x * dt - half_root * ((s.y + 1.0) * dW1 + (s.y - 1.0) * dW2),
          -0.5 * gamma * s.y * dt + half_root * ((s.x + 1.0) * dW1 + (s.x - 1.0) * dW2),
          -gamma * zp * dt + std::sqrt(0.5 * gamma) * zp * (dW1 - dW2)};
}

// Decay noise obtained from the quantum Langevin equations. Not
// length-preserving (mean length change -2 G <s^z> dt); provided for
// comparison studies only.
inline BlochVector decay_increment_qle(const BlochVector& s, double gamma, double dt, double dW1,
                                       double dW2) {
  const double root = std::sqrt(gamma);
  return {-0.5 * gamma * s.x * dt + root * s.z * dW1,
          -0.5 * gamma * s.y * dt - root * s.z * dW2,
          -gamma * (s.z + 1.0) * dt - root * (s.x * dW1 - s.y * dW2)};
}

// Cavity amplitude loss: dalpha = -kappa alpha dt + sqrt(kappa/2)(dW1 + i dW2).
inline std::complex<double> cavity_loss_increment(std::complex<double> alpha, double kappa,
                                                  double dt, double dW1, double dW2) {
  const double root = std::sqrt(0.5 * kappa);
  return {-kappa * alpha.real() * dt + root * dW1, -kappa * alpha.imag() * dt + root * dW2};
}

// Colored-noise dephasing drift xi (e_z x s); integrated as ordinary drift
// since xi(t) is smooth on the step scale.
inline BlochVector colored_dephasing_drift(const BlochVector& s, double xi) {
  return {-xi * s.y, xi * s.x, 0.0};
}

// One Euler-Maruyama step of the OU process
//   dxi = -(xi/tau_c) dt + sqrt(2/tau_c) sigma deta.
void ou_step(OUState& state, double tau_c, double sigma, double dt, const double* deta);

// Draws xi from the stationary distribution N(0, sigma^2).
OUState ou_init_stationary(std::size_t count, double sigma, const RandomStream& rng);

}  // namespace ddtwa

#endif
