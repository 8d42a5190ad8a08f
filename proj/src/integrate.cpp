#include "integrate.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "errors.hpp"

namespace ddtwa {

TimeGrid TimeGrid::resolve(double t_end, double dt, int output_stride) {
  if (dt <= 0.0) throw ConfigError("grid: dt must be > 0");
  if (t_end < dt) throw ConfigError("grid: t_end must be >= dt");
  if (output_stride < 1) throw ConfigError("grid: output_stride must be >= 1");
  TimeGrid grid;
  grid.t_end = t_end;
  std::size_t steps = static_cast<std::size_t>(std::llround(t_end / dt));
  if (steps < 1) steps = 1;
  // cap the stride at the step count, then land the last sample on t_end
  const std::size_t stride = std::min<std::size_t>(static_cast<std::size_t>(output_stride), steps);
  grid.output_stride = static_cast<int>(stride);
  steps = ((steps + stride - 1) / stride) * stride;
  grid.n_steps = steps;
  grid.dt = t_end / static_cast<double>(steps);
  return grid;
}

std::vector<double> TimeGrid::times() const {
  std::vector<double> out;
  out.reserve(n_samples());
  for (std::size_t s = 0; s <= n_steps; s += output_stride) {
    out.push_back(static_cast<double>(s) * dt);
  }
  return out;
}

ChannelRuntime ChannelRuntime::build(const std::vector<NoiseChannelSpec>& specs, bool has_cavity,
                                     double cavity_kappa_from_model) {
  ChannelRuntime rt;
  rt.cavity_kappa = cavity_kappa_from_model;
  bool seen[8] = {};
  for (const auto& spec : specs) {
    spec.validate();
    const int k = static_cast<int>(spec.kind);
    if (seen[k]) {
      throw ConfigError(std::string("noise: duplicate channel kind ") + to_string(spec.kind));
    }
    seen[k] = true;
    switch (spec.kind) {
      case NoiseKind::dephasing_individual:
        rt.per_spin.push_back({spec.kind, spec.rate, StreamPurpose::dephasing});
        break;
      case NoiseKind::decay_standard:
        rt.per_spin.push_back({spec.kind, spec.rate, StreamPurpose::decay});
        break;
      case NoiseKind::decay_improved:
        rt.per_spin.push_back({spec.kind, spec.rate, StreamPurpose::decay_improved});
        break;
      case NoiseKind::decay_qle:
        rt.per_spin.push_back({spec.kind, spec.rate, StreamPurpose::decay_qle});
        break;
      case NoiseKind::dephasing_collective:
        rt.collective_dephasing = spec.rate;
        break;
      case NoiseKind::dephasing_colored:
        rt.has_colored = true;
        rt.colored_sigma = spec.sigma;
        rt.colored_tau_c = spec.tau_c;
        rt.colored_collective = spec.collective;
        break;
      case NoiseKind::cavity_loss:
        if (!has_cavity) throw ConfigError("noise: cavity_loss requires a cavity in the model");
        rt.cavity_kappa += spec.rate;
        break;
    }
  }
  return rt;
}

double ChannelRuntime::max_rate() const {
  double rate = collective_dephasing;
  for (const auto& c : per_spin) rate = std::max(rate, c.rate);
  rate = std::max(rate, cavity_kappa);
  if (has_colored) {
    rate = std::max(rate, 1.0 / colored_tau_c);
    rate = std::max(rate, colored_sigma);
  }
  return rate;
}

void StepScratch::invalidate() {
  for (auto& cache : channel_cache) cache.valid_for_step = 0xFFFFFFFFu;
  ou_cache.valid_for_step = 0xFFFFFFFFu;
  collective_valid = 0xFFFFFFFFu;
}

namespace {

// One normal per (purpose, spin, step): component step & 1 of the Philox pair
// at index step >> 1, with the unused component kept for the next step.
inline double cached_normal(const RandomStream& rng, StreamPurpose purpose, std::uint32_t spin,
                            std::uint32_t step, NormalCache& cache) {
  if (step & 1u) {
    if (cache.valid_for_step == step) return cache.values[spin];
    return rng.normal_pair(purpose, spin, step >> 1)[1];
  }
  const auto pair = rng.normal_pair(purpose, spin, step >> 1);
  cache.values[spin] = pair[1];
  return pair[0];
}

}  // namespace

void euler_maruyama_step(SpinEnsembleState& state, const ModelSpec& model,
                         const ChannelRuntime& channels, const double* detuning,
                         OUState* ou, double dt, const RandomStream& rng, std::uint32_t step,
                         StepScratch& scratch) {
  const std::size_t n = state.size();
  const double* xi = nullptr;
  double shared_xi = 0.0;
  if (channels.has_colored && ou) {
    if (channels.colored_collective) {
      shared_xi = ou->xi[0];
    } else {
      xi = ou->xi.data();
    }
  }
  mean_field_drift(state, model, detuning, xi, shared_xi, scratch.drift);
  const DriftBuffers& drift = scratch.drift;

  const std::uint32_t nchan = static_cast<std::uint32_t>(channels.per_spin.size());
  if (scratch.channel_cache.size() < nchan) scratch.channel_cache.resize(nchan);
  for (auto& cache : scratch.channel_cache) {
    if (cache.values.size() < n) cache.values.resize(n);
  }

  const double root_dt = std::sqrt(dt);
  double collective_dW = 0.0;
  if (channels.collective_dephasing > 0.0) {
    double z;
    if ((step & 1u) && scratch.collective_valid == step) {
      z = scratch.collective_value;
    } else if (step & 1u) {
      z = rng.normal_pair(StreamPurpose::dephasing_collective, 0, step >> 1)[1];
    } else {
      const auto pair = rng.normal_pair(StreamPurpose::dephasing_collective, 0, step >> 1);
      z = pair[0];
      scratch.collective_value = pair[1];
      scratch.collective_valid = step + 1;
    }
    collective_dW = root_dt * z;
  }

  double* sx = state.sx.data();
  double* sy = state.sy.data();
  double* sz = state.sz.data();
  for (std::size_t i = 0; i < n; ++i) {
    const BlochVector s{sx[i], sy[i], sz[i]};
    double nx = s.x + dt * drift.dx[i];
    double ny = s.y + dt * drift.dy[i];
    double nz = s.z + dt * drift.dz[i];
    const std::uint32_t spin = static_cast<std::uint32_t>(i);
    for (std::uint32_t c = 0; c < nchan; ++c) {
      const auto& ch = channels.per_spin[c];
      BlochVector d;
      switch (ch.kind) {
        case NoiseKind::dephasing_individual: {
          const double z = cached_normal(rng, ch.purpose, spin, step, scratch.channel_cache[c]);
          d = dephasing_increment(s, ch.rate, dt, root_dt * z);
          break;
        }
        case NoiseKind::decay_standard: {
          const double z = cached_normal(rng, ch.purpose, spin, step, scratch.channel_cache[c]);
          d = decay_increment(s, ch.rate, dt, root_dt * z);
          break;
        }
        case NoiseKind::decay_improved: {
          const auto z = rng.normal_pair(ch.purpose, spin, step);
          d = decay_increment_improved(s, ch.rate, dt, root_dt * z[0], root_dt * z[1]);
          break;
        }
        default: {
          const auto z = rng.normal_pair(ch.purpose, spin, step);
          d = decay_increment_qle(s, ch.rate, dt, root_dt * z[0], root_dt * z[1]);
          break;
        }
      }
      nx += d.x;
      ny += d.y;
      nz += d.z;
    }
    if (channels.collective_dephasing > 0.0) {
      const auto d = dephasing_increment(s, channels.collective_dephasing, dt, collective_dW);
      nx += d.x;
      ny += d.y;
      nz += d.z;
    }
    sx[i] = nx;
    sy[i] = ny;
    sz[i] = nz;
  }
  // mark per-spin caches filled at even steps as valid for the next step
  if (!(step & 1u)) {
    for (auto& cache : scratch.channel_cache) cache.valid_for_step = step + 1;
  }

  if (state.has_cavity) {
    std::complex<double> alpha = state.alpha + drift.dalpha * dt;
    if (channels.cavity_kappa > 0.0) {
      const auto z = rng.normal_pair(StreamPurpose::cavity_loss, 0, step);
      alpha += cavity_loss_increment(state.alpha, channels.cavity_kappa, dt, root_dt * z[0],
                                     root_dt * z[1]);
    }
    state.alpha = alpha;
  }

  if (channels.has_colored && ou) {
    const double sigma = channels.colored_sigma;
    const double tau_c = channels.colored_tau_c;
    const std::size_t n_xi = ou->xi.size();
    if (scratch.ou_cache.values.size() < n_xi) scratch.ou_cache.values.resize(n_xi);
    const double decay = dt / tau_c;
    const double diff = std::sqrt(2.0 / tau_c) * sigma;
    for (std::size_t i = 0; i < n_xi; ++i) {
      const double z = cached_normal(rng, StreamPurpose::ou_step, static_cast<std::uint32_t>(i),
                                     step, scratch.ou_cache);
      ou->xi[i] += -ou->xi[i] * decay + diff * root_dt * z;
    }
    if (!(step & 1u)) scratch.ou_cache.valid_for_step = step + 1;
  }
}

namespace {

bool sample_is_finite(const double* q, const QuantityLayout& layout) {
  if (!std::isfinite(q[0] + q[1] + q[2] + q[12])) return false;
  if (layout.cavity) {
    const std::size_t c = layout.cavity_offset();
    if (!std::isfinite(q[c] + q[c + 1] + q[c + 2] + q[c + 3])) return false;
  }
  return true;
}

}  // namespace

void run_trajectory(std::size_t index, const TrajectorySpec& spec, const ModelSpec& model,
                    const ChannelRuntime& channels, const ProductStateSpec& initial,
                    const TimeGrid& grid, const QuantityLayout& layout, TrajectoryWork& work) {
  const RandomStream rng(spec.master_seed, static_cast<std::uint32_t>(index));
  SpinEnsembleState state = sample_initial_ensemble(initial, model.n, rng);

  const double* detuning = nullptr;
  if (model.disorder.sigma2 > 0.0) {
    const RandomStream disorder_rng(spec.master_seed,
                                    model.disorder.frozen ? 0u : static_cast<std::uint32_t>(index));
    work.detuning = sample_disorder(model.disorder.sigma2, model.n, disorder_rng);
    detuning = work.detuning.data();
  }

  OUState* ou = nullptr;
  if (channels.has_colored) {
    const std::size_t count = channels.colored_collective ? 1 : model.n;
    work.ou = ou_init_stationary(count, channels.colored_sigma, rng);
    ou = &work.ou;
  }

  const std::size_t q = layout.count();
  work.samples.assign(grid.n_samples() * q, 0.0);

  std::size_t sample_idx = 0;
  evaluate_quantities(state, layout, &work.samples[0]);
  ++sample_idx;

  work.scratch.invalidate();
  const std::size_t stride = static_cast<std::size_t>(grid.output_stride);
  for (std::size_t s = 0; s < grid.n_steps; ++s) {
    euler_maruyama_step(state, model, channels, detuning, ou, grid.dt, rng,
                        static_cast<std::uint32_t>(s), work.scratch);
    if ((s + 1) % stride == 0) {
      state.time = static_cast<double>(s + 1) * grid.dt;
      double* out = &work.samples[sample_idx * q];
      evaluate_quantities(state, layout, out);
      if (!sample_is_finite(out, layout)) {
        std::ostringstream msg;
        msg << "trajectory " << index << ": non-finite state at t = " << state.time
            << " (step " << (s + 1) << "); reduce dt";
        throw NumericalError(msg.str());
      }
      ++sample_idx;
    }
  }
}

std::size_t default_block_count(std::size_t n_t) { return std::min<std::size_t>(n_t, 200); }

RunResult run_ensemble(const TrajectorySpec& spec, const ModelSpec& model,
                       const std::vector<NoiseChannelSpec>& channel_specs,
                       const ProductStateSpec& initial, const TimeGrid& grid,
                       const ObservableRequest& request) {
  if (spec.n_t < 1) throw ConfigError("run: trajectories must be >= 1");
  const ChannelRuntime channels =
      ChannelRuntime::build(channel_specs, model.cavity.has_value(),
                            model.cavity ? model.cavity->kappa : 0.0);
  const QuantityLayout layout = QuantityLayout::from_request(request, model.cavity.has_value());
  for (int site : layout.sites) {
    if (site < 0 || static_cast<std::size_t>(site) >= model.n) {
      throw ConfigError("observables: site index out of range");
    }
  }
  for (const auto& p : layout.pairs) {
    if (p.i < 0 || p.j < 0 || static_cast<std::size_t>(p.i) >= model.n ||
        static_cast<std::size_t>(p.j) >= model.n) {
      throw ConfigError("observables: pair index out of range");
    }
  }

  const auto times = grid.times();
  auto acc = std::make_shared<EnsembleAccumulator>(layout, times.size(), spec.n_t,
                                                   default_block_count(spec.n_t));

  int workers = spec.worker_count;
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(workers), acc->n_blocks()));

  std::vector<std::vector<std::pair<std::size_t, std::string>>> block_failures(acc->n_blocks());
  std::atomic<std::size_t> next_block{0};
  std::atomic<bool> fatal{false};
  std::vector<std::string> worker_errors(static_cast<std::size_t>(workers));

  auto worker_fn = [&](int w) {
    TrajectoryWork work;
    try {
      while (true) {
        const std::size_t b = next_block.fetch_add(1);
        if (b >= acc->n_blocks() || fatal.load()) break;
        const std::size_t begin = acc->block_begin(b);
        const std::size_t end = acc->block_end(b);
        for (std::size_t t = begin; t < end; ++t) {
          try {
            run_trajectory(t, spec, model, channels, initial, grid, layout, work);
            acc->add_trajectory(t, work.samples);
          } catch (const NumericalError& err) {
            block_failures[b].emplace_back(t, err.what());
            if (!spec.allow_failures) {
              fatal.store(true);
              break;
            }
          }
        }
        if (fatal.load()) break;
      }
    } catch (const std::exception& err) {
      worker_errors[static_cast<std::size_t>(w)] = err.what();
      fatal.store(true);
    }
  };

  if (workers == 1) {
    worker_fn(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn, w);
    for (auto& th : pool) th.join();
  }

  for (const auto& msg : worker_errors) {
    if (!msg.empty()) throw NumericalError(msg);
  }
  // merge failures in block order (deterministic report)
  for (std::size_t b = 0; b < acc->n_blocks(); ++b) {
    for (auto& f : block_failures[b]) acc->record_failure(f.first, f.second);
  }
  if (!spec.allow_failures && acc->failure_count() > 0) {
    throw NumericalError(acc->failures().front().second);
  }
  if (acc->success_count() == 0) {
    throw NumericalError("run: all trajectories failed");
  }

  RunResult result;
  result.series = finalize_series(*acc, request, model.n, times);
  result.accumulator = acc;
  result.times = times;
  result.n_spins = model.n;
  result.failures = acc->failure_count();
  result.resolved_dt = grid.dt;
  return result;
}

}  // namespace ddtwa
