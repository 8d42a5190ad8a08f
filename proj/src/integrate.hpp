#ifndef DDTWA_INTEGRATE_HPP
#define DDTWA_INTEGRATE_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "model.hpp"
#include "noise.hpp"
#include "observables.hpp"
#include "rng.hpp"
#include "spin_state.hpp"

namespace ddtwa {

// Resolved integration grid. n_steps is rounded up to a multiple of
// output_stride so the final sample lands exactly on t_end; dt is adjusted
// accordingly and recorded in run metadata.
struct TimeGrid {
  double t_end = 1.0;
  double dt = 0.01;
  int output_stride = 1;
  std::size_t n_steps = 100;

  static TimeGrid resolve(double t_end, double dt, int output_stride);
  std::size_t n_samples() const { return n_steps / output_stride + 1; }
  std::vector<double> times() const;
};

struct TrajectorySpec {
  std::size_t n_t = 1;
  std::uint64_t master_seed = 0;
  int worker_count = 1;        // hint; 0 = hardware concurrency
  bool allow_failures = false; // exclude failed trajectories instead of failing the run
};

// Channel list split by where the increments apply. Built once per run.
struct ChannelRuntime {
  struct PerSpin {
    NoiseKind kind;
    double rate;
    StreamPurpose purpose;
  };
  std::vector<PerSpin> per_spin;       // dephasing_individual, decay_*
  double collective_dephasing = 0.0;   // one shared dW per step
  bool has_colored = false;
  double colored_sigma = 0.0;
  double colored_tau_c = 0.0;
  bool colored_collective = false;
  double cavity_kappa = 0.0;           // total loss rate on the amplitude

  static ChannelRuntime build(const std::vector<NoiseChannelSpec>& specs, bool has_cavity,
                              double cavity_kappa_from_model);
  double max_rate() const;
};

// Single-Wiener channels consume normal_pair(purpose, spin, step >> 1)[step & 1]:
// the second component of each Philox pair is kept for the following step.
struct NormalCache {
  std::uint32_t valid_for_step = 0xFFFFFFFFu;
  std::vector<double> values;
};

// Per-worker scratch, reused across trajectories.
struct StepScratch {
  DriftBuffers drift;
  std::vector<NormalCache> channel_cache;  // one per per-spin channel
  NormalCache ou_cache;
  std::uint32_t collective_valid = 0xFFFFFFFFu;
  double collective_value = 0.0;

  void invalidate();
};

struct TrajectoryWork {
  StepScratch scratch;
  OUState ou;
  std::vector<double> detuning;
  std::vector<double> samples;  // n_samples x layout.count()
};

// One explicit Euler-Maruyama step: state' = state + drift dt + channel
// increments, all evaluated at the pre-step state. `step` indexes the Wiener
// draws. Exposed separately for direct testing.
void euler_maruyama_step(SpinEnsembleState& state, const ModelSpec& model,
                         const ChannelRuntime& channels, const double* detuning,
                         OUState* ou, double dt, const RandomStream& rng, std::uint32_t step,
                         StepScratch& scratch);

// Runs one trajectory; fills work.samples (grid.n_samples() x layout.count()).
// Deterministic given (spec.master_seed, index). Throws NumericalError with
// the trajectory index attached if the state leaves the finite range.
void run_trajectory(std::size_t index, const TrajectorySpec& spec, const ModelSpec& model,
                    const ChannelRuntime& channels, const ProductStateSpec& initial,
                    const TimeGrid& grid, const QuantityLayout& layout, TrajectoryWork& work);

struct RunResult {
  ObservableSeries series;
  std::shared_ptr<EnsembleAccumulator> accumulator;
  std::vector<double> times;
  std::size_t n_spins = 0;
  std::size_t failures = 0;
  double resolved_dt = 0.0;
};

// Runs the full ensemble over a deterministic block partition of trajectory
// indices. Results are bitwise independent of the worker count: each block is
// accumulated by a single worker in index order and blocks are reduced in
// order by the collector.
RunResult run_ensemble(const TrajectorySpec& spec, const ModelSpec& model,
                       const std::vector<NoiseChannelSpec>& channels,
                       const ProductStateSpec& initial, const TimeGrid& grid,
                       const ObservableRequest& request);

// Default number of jackknife/work blocks.
std::size_t default_block_count(std::size_t n_t);

}  // namespace ddtwa

#endif
