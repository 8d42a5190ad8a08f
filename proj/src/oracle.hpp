#ifndef DDTWA_ORACLE_HPP
#define DDTWA_ORACLE_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstddef>
#include <vector>

#include "integrate.hpp"
#include "model.hpp"
#include "noise.hpp"
#include "observables.hpp"
#include "spin_state.hpp"

namespace ddtwa {

using SparseC = Eigen::SparseMatrix<std::complex<double>>;
using DenseC = Eigen::MatrixXcd;

struct OracleOptions {
  int n_ph = 0;                    // photon levels; 0 = auto from alpha0
  std::size_t dim_cap = 4096;      // refuse above this total dimension
  double cutoff_tolerance = 1e-6;  // max allowed population in the top two Fock levels
  double dt = 0.0;                 // internal RK4 step; 0 = auto
  double trace_tolerance = 1e-8;
  double hermiticity_tolerance = 1e-10;
};

// Dense-rho Liouvillian in the 2^N x n_ph product basis (basis index =
// spin_index * n_ph + fock_n). The D^2 x D^2 superoperator is never
// materialized; the action is evaluated with sparse operator products.
class Liouvillian {
 public:
  static Liouvillian build(const ModelSpec& model, const std::vector<NoiseChannelSpec>& channels,
                           const OracleOptions& options);

  // rho_dot = -i [H, rho] + sum_d c_d (2 L rho L^dag - M rho - rho M), M = L^dag L.
  DenseC apply(const DenseC& rho) const;

  struct ApplyScratch {
    DenseC t1, t2;
  };
  // allocation-free form for inner loops
  void apply_into(const DenseC& rho, ApplyScratch& scratch, DenseC& out) const;

  std::size_t dim() const { return dim_; }
  std::size_t n_spins() const { return n_spins_; }
  int n_ph() const { return n_ph_; }
  bool has_cavity() const { return n_ph_ > 1; }

  // Pure product state (per-spin Bloch directions, coherent cavity state).
  DenseC initial_density(const ProductStateSpec& spec) const;

  // Population of the top two Fock levels (cutoff diagnostic).
  double top_fock_population(const DenseC& rho) const;

  // Observable helpers (exact, normal-ordered where applicable).
  double collective_mean(const DenseC& rho, int axis) const;          // <S_k>
  double collective_sym_moment(const DenseC& rho, int k, int l) const;  // Re <S_k S_l>
  std::complex<double> cavity_amplitude(const DenseC& rho) const;     // <a>
  double photon_number(const DenseC& rho) const;                      // <a^dag a>
  double photon_fourth(const DenseC& rho) const;                      // <a^dag a^dag a a>
  double site_mean(const DenseC& rho, int site, int axis) const;      // <sigma_i^k>
  double pair_correlation(const DenseC& rho, int i, char a, int j, char b) const;

  double rate_scale() const { return rate_scale_; }

 private:
  std::size_t n_spins_ = 1;
  int n_ph_ = 1;
  std::size_t dim_ = 2;
  double cutoff_tolerance_ = 1e-6;
  SparseC hamiltonian_;

  struct Dissipator {
    SparseC op, op_dag, op_dag_op;
    double coefficient;
  };
  std::vector<Dissipator> dissipators_;

  SparseC collective_[3];
  SparseC collective_prod_[3][3];
  SparseC annihilation_, number_, fourth_;
  double rate_scale_ = 1.0;

  SparseC site_op(int site, char axis) const;
};

// Fixed-step RK4 integration of the master equation, recording the same
// estimator columns as the stochastic engine (standard errors are zero).
// Aborts on trace/hermiticity drift or Fock-cutoff violations.
ObservableSeries evolve_master_equation(const ModelSpec& model,
                                        const std::vector<NoiseChannelSpec>& channels,
                                        const ProductStateSpec& initial, const TimeGrid& grid,
                                        const ObservableRequest& request,
                                        const OracleOptions& options);

// Deterministic reference: mean-field equations (drift plus damping, all
// Wiener increments zero) integrated with RK4 from the quantum initial means.
ObservableSeries mean_field_reference(const ModelSpec& model,
                                      const std::vector<NoiseChannelSpec>& channels,
                                      const ProductStateSpec& initial, const TimeGrid& grid,
                                      const ObservableRequest& request);

}  // namespace ddtwa

#endif
