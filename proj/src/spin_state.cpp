#include "spin_state.hpp"

#include <cmath>
#include <stdexcept>

namespace ddtwa {

ProductStateSpec ProductStateSpec::uniform(double theta, double phi, std::size_t n) {
  ProductStateSpec spec;
  spec.theta.assign(n, theta);
  spec.phi.assign(n, phi);
  return spec;
}

BlochVector sample_down_configuration(const RandomStream& rng, std::uint32_t spin,
                                      std::uint32_t index) {
  const std::uint64_t bits = rng.bits(StreamPurpose::spin_init, spin, index);
  return {(bits & 1u) ? 1.0 : -1.0, (bits & 2u) ? 1.0 : -1.0, -1.0};
}

Rotation3 rotation_to_direction(double theta, double phi) {
  if (!std::isfinite(theta) || !std::isfinite(phi)) {
    throw std::invalid_argument("rotation_to_direction: angles must be finite");
  }
  const double nx = std::sin(theta) * std::cos(phi);
  const double ny = std::sin(theta) * std::sin(phi);
  const double nz = std::cos(theta);

  // Axis = (0,0,-1) x n = (ny, -nx, 0); angle between (0,0,-1) and n.
  const double cross_norm = std::sqrt(nx * nx + ny * ny);
  constexpr double kSingular = 1e-14;
  if (cross_norm < kSingular) {
    if (nz < 0.0) {
      return Rotation3{{1, 0, 0, 0, 1, 0, 0, 0, 1}};
    }
    // Antipodal target +z: rotate by pi about the x-axis.
    return Rotation3{{1, 0, 0, 0, -1, 0, 0, 0, -1}};
  }
  const double ax = ny / cross_norm;
  const double ay = -nx / cross_norm;
  const double cos_g = -nz;      // cos of angle between (0,0,-1) and n
  const double sin_g = cross_norm;

  // Rodrigues formula for axis (ax, ay, 0).
  const double c = cos_g;
  const double s = sin_g;
  const double t = 1.0 - c;
  return Rotation3{{c + t * ax * ax, t * ax * ay, s * ay,
                    t * ax * ay, c + t * ay * ay, -s * ax,
                    -s * ay, s * ax, c}};
}

std::complex<double> sample_cavity_initial(std::complex<double> alpha0, const RandomStream& rng) {
  const auto g = rng.normal_pair(StreamPurpose::cavity_init, 0, 0);
  return alpha0 + std::complex<double>(0.5 * g[0], 0.5 * g[1]);
}

SpinEnsembleState sample_initial_ensemble(const ProductStateSpec& spec, std::size_t n,
                                          const RandomStream& rng) {
  if (n < 1) throw std::invalid_argument("sample_initial_ensemble: n must be >= 1");
  if (spec.theta.size() != n || spec.phi.size() != n) {
    throw std::invalid_argument("sample_initial_ensemble: spec does not match spin count");
  }
  SpinEnsembleState state;
  state.sx.resize(n);
  state.sy.resize(n);
  state.sz.resize(n);

  bool uniform = true;
  for (std::size_t i = 1; i < n && uniform; ++i) {
    uniform = spec.theta[i] == spec.theta[0] && spec.phi[i] == spec.phi[0];
  }
  Rotation3 shared{};
  if (uniform) shared = rotation_to_direction(spec.theta[0], spec.phi[0]);

  for (std::size_t i = 0; i < n; ++i) {
    const BlochVector raw = sample_down_configuration(rng, static_cast<std::uint32_t>(i));
    const Rotation3 rot = uniform ? shared : rotation_to_direction(spec.theta[i], spec.phi[i]);
    const BlochVector s = rot.apply(raw);
    state.sx[i] = s.x;
    state.sy[i] = s.y;
    state.sz[i] = s.z;
  }
  if (spec.cavity_alpha0) {
    state.has_cavity = true;
    state.alpha = sample_cavity_initial(*spec.cavity_alpha0, rng);
  }
  return state;
}

}  // namespace ddtwa
