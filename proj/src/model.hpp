#ifndef DDTWA_MODEL_HPP
#define DDTWA_MODEL_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "spin_state.hpp"

namespace ddtwa {

// Site positions. `cubic` places dims[0] x dims[1] x dims[2] sites on a
// simple-cubic grid with the given spacing; open boundaries, Euclidean
// distances.
struct LatticeSpec {
  std::array<int, 3> dims{1, 1, 1};
  double spacing = 1.0;
  std::vector<std::array<double, 3>> positions;

  static LatticeSpec cubic(std::array<int, 3> dims, double spacing = 1.0);
  std::size_t size() const { return positions.size(); }
};

enum class CouplingAxis { xx, yy, zz };

const char* to_string(CouplingAxis axis);

// Pairwise same-axis coupling block. Uniform all-to-all blocks are kept as a
// single collective strength so the drift stays O(N); anything else is a
// sparse pair list (i < j, applied symmetrically) with CSR neighbor lists for
// the inner loop.
struct CouplingMatrix {
  CouplingAxis axis = CouplingAxis::zz;
  bool all_to_all = false;
  double uniform_strength = 0.0;

  std::vector<int> pair_i, pair_j;
  std::vector<double> pair_val;

  std::vector<int> row_ptr, col;
  std::vector<double> val;

  std::size_t pair_count() const { return pair_val.size(); }
  void build_neighbor_lists(std::size_t n);
  // Sum of J_ij over ordered pairs (both directions).
  double ordered_pair_sum(std::size_t n) const;
};

// Per-spin local field vector Omega_i, stored as a uniform part plus an
// optional per-spin z detuning.
struct LocalFields {
  std::array<double, 3> uniform{0.0, 0.0, 0.0};
  std::vector<double> detuning_z;  // empty or length N
};

// Collective cavity coupling g/sqrt(N), field amplitude decay rate kappa and
// a drive along x.
struct CavityCoupling {
  double g = 0.0;
  double kappa = 0.0;
  double drive_omega = 0.0;
  std::complex<double> alpha0{0.0, 0.0};
};

struct DisorderSpec {
  double sigma2 = 0.0;
  bool frozen = false;  // one realization shared by all trajectories
};

struct ModelSpec {
  std::size_t n = 1;
  std::optional<LatticeSpec> lattice;
  std::vector<CouplingMatrix> couplings;
  LocalFields fields;
  std::optional<CavityCoupling> cavity;
  DisorderSpec disorder;

  void finalize();  // builds neighbor lists, validates sizes
  // Mean coupling J-bar = sum of J_ij over ordered pairs / N.
  double jbar() const;
  // Crude magnitude estimate of the effective field for step-size selection.
  double typical_rate() const;
};

// J_ij = prefactor / |r_i - r_j|^alpha with prefactor = J/N or J; entries
// with |J_ij| < cutoff_ratio * prefactor are dropped. alpha = 0 yields the
// collective all-to-all representation.
CouplingMatrix build_power_law_couplings(const LatticeSpec& lattice, CouplingAxis axis, double J,
                                         double alpha, bool normalize_by_n, double cutoff_ratio);

// Quenched per-spin frequencies omega_i ~ N(0, sigma2); one realization per
// trajectory (trajectory 0's realization is reused everywhere when frozen).
std::vector<double> sample_disorder(double sigma2, std::size_t n, const RandomStream& rng);

struct DriftBuffers {
  std::vector<double> dx, dy, dz;
  std::complex<double> dalpha{0.0, 0.0};
  // scratch for coupling field accumulation
  std::vector<double> field_x, field_y, field_z;

  void resize(std::size_t n);
};

// Mean-field equations of motion: ds_i/dt = Omega_eff^i x s_i with
// Omega_eff^i = Omega_i + 2 sum_j J_ij s_j plus, when a cavity is present,
// the collective-coupling terms and dalpha/dt. `detuning` and `colored_xi`
// are optional per-trajectory z-field contributions (disorder, OU noise);
// `shared_xi` is the collective colored-noise field applied to every spin.
void mean_field_drift(const SpinEnsembleState& state, const ModelSpec& model,
                      const double* detuning, const double* colored_xi, double shared_xi,
                      DriftBuffers& out);

}  // namespace ddtwa

#endif
