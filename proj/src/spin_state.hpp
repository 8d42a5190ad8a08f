#ifndef DDTWA_SPIN_STATE_HPP
#define DDTWA_SPIN_STATE_HPP

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "rng.hpp"

namespace ddtwa {

// Classical spin 3-vector. Immediately after discrete sampling every
// component is exactly +-1, so |s|^2 = 3; proper rotations preserve that.
struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm2() const { return x * x + y * y + z * z; }
};

// Phase-space point of one trajectory: N spins plus an optional cavity
// amplitude, stored component-wise for the integrator's inner loops.
struct SpinEnsembleState {
  std::vector<double> sx, sy, sz;
  bool has_cavity = false;
  std::complex<double> alpha{0.0, 0.0};
  double time = 0.0;

  std::size_t size() const { return sx.size(); }
  BlochVector spin(std::size_t i) const { return {sx[i], sy[i], sz[i]}; }
};

// Target Bloch direction per spin (polar angle theta, azimuth phi) plus an
// optional initial coherent amplitude for the cavity mode. Directions are
// stored per spin even when uniform so inhomogeneous preparations stay
// expressible.
struct ProductStateSpec {
  std::vector<double> theta;
  std::vector<double> phi;
  std::optional<std::complex<double>> cavity_alpha0;

  static ProductStateSpec uniform(double theta, double phi, std::size_t n);
};

struct Rotation3 {
  // Row-major 3x3 matrix.
  std::array<double, 9> m;

  BlochVector apply(const BlochVector& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
};

// One of the four configurations (+-1, +-1, -1), each with probability 1/4.
// `index` addresses the draw (one draw per spin per trajectory).
BlochVector sample_down_configuration(const RandomStream& rng, std::uint32_t spin,
                                      std::uint32_t index = 0);

// Proper rotation taking (0,0,-1) to the direction (theta, phi). The axis is
// (0,0,-1) x target and the angle is the angle between them; the antipodal
// target +z rotates by pi about the x-axis.
Rotation3 rotation_to_direction(double theta, double phi);

// Gaussian Wigner sample of a coherent state: alpha0 + (g1 + i g2)/2 with
// g1, g2 standard normals, i.e. quadrature variance 1/4 about alpha0.
std::complex<double> sample_cavity_initial(std::complex<double> alpha0, const RandomStream& rng);

// Samples all N spins (discrete configurations rotated to their targets) and,
// if requested, the cavity amplitude. Every spin satisfies |s|^2 = 3.
SpinEnsembleState sample_initial_ensemble(const ProductStateSpec& spec, std::size_t n,
                                          const RandomStream& rng);

}  // namespace ddtwa

#endif
