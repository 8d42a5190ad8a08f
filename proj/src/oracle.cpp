#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "errors.hpp"

namespace ddtwa {

namespace {

using Triplet = Eigen::Triplet<std::complex<double>>;
constexpr std::complex<double> kI{0.0, 1.0};
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// 1-norm (= inf-norm for Hermitian operators); used for step-size selection.
double operator_scale(const SparseC& op) {
  double best = 0.0;
  for (int k = 0; k < op.outerSize(); ++k) {
    double col = 0.0;
    for (SparseC::InnerIterator it(op, k); it; ++it) col += std::abs(it.value());
    best = std::max(best, col);
  }
  return best;
}

std::complex<double> trace_prod(const SparseC& op, const DenseC& rho) {
  std::complex<double> acc{0.0, 0.0};
  for (int k = 0; k < op.outerSize(); ++k) {
    for (SparseC::InnerIterator it(op, k); it; ++it) {
      acc += it.value() * rho(it.col(), it.row());
    }
  }
  return acc;
}

}  // namespace

SparseC Liouvillian::site_op(int site, char axis) const {
  const std::size_t spin_dim = std::size_t{1} << n_spins_;
  const std::uint64_t bit = std::uint64_t{1} << site;
  std::vector<Triplet> trips;
  trips.reserve(dim_);
  for (std::uint64_t s = 0; s < spin_dim; ++s) {
    for (int p = 0; p < n_ph_; ++p) {
      const int idx = static_cast<int>(s) * n_ph_ + p;
      const bool up = (s & bit) != 0;
      switch (axis) {
        case 'z':
          trips.emplace_back(idx, idx, up ? 1.0 : -1.0);
          break;
        case 'x': {
          const int other = static_cast<int>(s ^ bit) * n_ph_ + p;
          trips.emplace_back(other, idx, 1.0);
          break;
        }
        case 'y': {
          // sigma^y = -i |up><down| + i |down><up|
          const int other = static_cast<int>(s ^ bit) * n_ph_ + p;
          trips.emplace_back(other, idx, up ? kI : -kI);
          break;
        }
        case '+': {
          if (!up) trips.emplace_back(static_cast<int>(s | bit) * n_ph_ + p, idx, 1.0);
          break;
        }
        case '-': {
          if (up) trips.emplace_back(static_cast<int>(s & ~bit) * n_ph_ + p, idx, 1.0);
          break;
        }
      }
    }
  }
  SparseC op(static_cast<int>(dim_), static_cast<int>(dim_));
  op.setFromTriplets(trips.begin(), trips.end());
  return op;
}

Liouvillian Liouvillian::build(const ModelSpec& model,
                               const std::vector<NoiseChannelSpec>& channels,
                               const OracleOptions& options) {
  Liouvillian li;
  li.n_spins_ = model.n;
  li.cutoff_tolerance_ = options.cutoff_tolerance;
  if (model.n > 20) throw ConfigError("oracle: spin count too large for the dense solver");
  if (model.disorder.sigma2 > 0.0) {
    throw ConfigError("oracle: sampled disorder is not supported; use explicit detunings");
  }

  int n_ph = 1;
  if (model.cavity) {
    n_ph = options.n_ph;
    if (n_ph == 0) {
      const double nbar = std::norm(model.cavity->alpha0);
      n_ph = std::max(10, static_cast<int>(std::ceil(nbar + 6.0 * std::sqrt(nbar) + 10.0)));
    }
    if (n_ph < 2) throw ConfigError("oracle: n_ph must be >= 2 with a cavity");
  }
  li.n_ph_ = n_ph;
  const std::size_t dim = (std::size_t{1} << model.n) * static_cast<std::size_t>(n_ph);
  if (dim > options.dim_cap) {
    std::ostringstream msg;
    msg << "oracle: dimension " << dim << " exceeds the cap " << options.dim_cap
        << " (2^n_spins * n_ph)";
    throw ConfigError(msg.str());
  }
  li.dim_ = dim;
  const int d = static_cast<int>(dim);

  // Collective spin operators.
  for (int k = 0; k < 3; ++k) {
    SparseC acc(d, d);
    const char axis = "xyz"[k];
    for (std::size_t i = 0; i < model.n; ++i) {
      acc += li.site_op(static_cast<int>(i), axis);
    }
    li.collective_[k] = 0.5 * acc;
  }
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 3; ++l) {
      li.collective_prod_[k][l] = (li.collective_[k] * li.collective_[l]).pruned();
    }
  }

  // Hamiltonian: local fields + pairwise couplings (+ cavity terms).
  SparseC h(d, d);
  const auto& u = model.fields.uniform;
  for (std::size_t i = 0; i < model.n; ++i) {
    double uz = u[2];
    if (!model.fields.detuning_z.empty()) uz += model.fields.detuning_z[i];
    if (u[0] != 0.0) h += 0.5 * u[0] * li.site_op(static_cast<int>(i), 'x');
    if (u[1] != 0.0) h += 0.5 * u[1] * li.site_op(static_cast<int>(i), 'y');
    if (uz != 0.0) h += 0.5 * uz * li.site_op(static_cast<int>(i), 'z');
  }
  for (const auto& c : model.couplings) {
    const char axis = (c.axis == CouplingAxis::xx) ? 'x' : (c.axis == CouplingAxis::yy) ? 'y' : 'z';
    auto add_pair = [&](int i, int j, double val) {
      h += val * (li.site_op(i, axis) * li.site_op(j, axis));
    };
    if (c.all_to_all) {
      for (std::size_t i = 0; i < model.n; ++i) {
        for (std::size_t j = i + 1; j < model.n; ++j) {
          add_pair(static_cast<int>(i), static_cast<int>(j), c.uniform_strength);
        }
      }
    } else {
      for (std::size_t k = 0; k < c.pair_count(); ++k) {
        add_pair(c.pair_i[k], c.pair_j[k], c.pair_val[k]);
      }
    }
  }

  double cavity_kappa = model.cavity ? model.cavity->kappa : 0.0;
  if (model.cavity) {
    // a in the Fock factor: <p-1| a |p> = sqrt(p)
    const std::size_t spin_dim = std::size_t{1} << model.n;
    std::vector<Triplet> ta, tn, t4;
    for (std::uint64_t s = 0; s < spin_dim; ++s) {
      for (int p = 0; p < n_ph; ++p) {
        const int idx = static_cast<int>(s) * n_ph + p;
        if (p > 0) ta.emplace_back(idx - 1, idx, std::sqrt(static_cast<double>(p)));
        tn.emplace_back(idx, idx, static_cast<double>(p));
        t4.emplace_back(idx, idx, static_cast<double>(p) * (p - 1.0));
      }
    }
    li.annihilation_.resize(d, d);
    li.annihilation_.setFromTriplets(ta.begin(), ta.end());
    li.number_.resize(d, d);
    li.number_.setFromTriplets(tn.begin(), tn.end());
    li.fourth_.resize(d, d);
    li.fourth_.setFromTriplets(t4.begin(), t4.end());

    SparseC s_plus(d, d);
    for (std::size_t i = 0; i < model.n; ++i) s_plus += li.site_op(static_cast<int>(i), '+');
    const SparseC s_minus = SparseC(s_plus.adjoint());
    const double g_norm = model.cavity->g / std::sqrt(static_cast<double>(model.n));
    h += g_norm * (s_plus * li.annihilation_ +
                   s_minus * SparseC(li.annihilation_.adjoint()));
    if (model.cavity->drive_omega != 0.0) {
      h += model.cavity->drive_omega * li.collective_[0];  // Omega S_x
    }
  }
  li.hamiltonian_ = h.pruned();

  // Lindblad channels.
  auto add_dissipator = [&](const SparseC& op, double coefficient) {
    Dissipator diss;
    diss.op = op;
    diss.op_dag = SparseC(op.adjoint());
    diss.op_dag_op = (diss.op_dag * op).pruned();
    diss.coefficient = coefficient;
    li.dissipators_.push_back(std::move(diss));
  };

  for (const auto& spec : channels) {
    spec.validate();
    switch (spec.kind) {
      case NoiseKind::dephasing_individual:
        if (spec.rate > 0.0) {
          for (std::size_t i = 0; i < model.n; ++i) {
            add_dissipator(li.site_op(static_cast<int>(i), 'z'), spec.rate / 4.0);
          }
        }
        break;
      case NoiseKind::dephasing_collective:
        if (spec.rate > 0.0) add_dissipator(li.collective_[2], spec.rate);
        break;
      case NoiseKind::decay_standard:
      case NoiseKind::decay_improved:
      case NoiseKind::decay_qle:
        // all three stochastic unravelings target the same master equation
        if (spec.rate > 0.0) {
          for (std::size_t i = 0; i < model.n; ++i) {
            add_dissipator(li.site_op(static_cast<int>(i), '-'), spec.rate / 2.0);
          }
        }
        break;
      case NoiseKind::dephasing_colored:
        throw ConfigError("oracle: colored dephasing has no Markovian Lindblad form");
      case NoiseKind::cavity_loss:
        if (!model.cavity) throw ConfigError("oracle: cavity_loss requires a cavity");
        cavity_kappa += spec.rate;
        break;
    }
  }
  if (model.cavity && cavity_kappa > 0.0) {
    add_dissipator(li.annihilation_, cavity_kappa);
  }

  double scale = 2.0 * operator_scale(li.hamiltonian_);
  for (const auto& diss : li.dissipators_) {
    scale += 4.0 * diss.coefficient * operator_scale(diss.op_dag_op);
  }
  li.rate_scale_ = std::max(scale, 1e-12);
  return li;
}

DenseC Liouvillian::apply(const DenseC& rho) const {
  DenseC out = -kI * (hamiltonian_ * rho - rho * hamiltonian_);
  for (const auto& diss : dissipators_) {
    out += diss.coefficient *
           (2.0 * (diss.op * rho * diss.op_dag) - diss.op_dag_op * rho - rho * diss.op_dag_op);
  }
  return out;
}

DenseC Liouvillian::initial_density(const ProductStateSpec& spec) const {
  if (spec.theta.size() != n_spins_) {
    throw ConfigError("oracle: initial state does not match the spin count");
  }
  const std::size_t spin_dim = std::size_t{1} << n_spins_;
  Eigen::VectorXcd spin_amp(spin_dim);
  for (std::uint64_t s = 0; s < spin_dim; ++s) {
    std::complex<double> amp{1.0, 0.0};
    for (std::size_t i = 0; i < n_spins_; ++i) {
      const bool up = (s >> i) & 1u;
      const double th = spec.theta[i];
      const double ph = spec.phi[i];
      // |n> = cos(theta/2)|up> + e^{i phi} sin(theta/2)|down>
      amp *= up ? std::complex<double>(std::cos(0.5 * th), 0.0)
                : std::exp(kI * ph) * std::sin(0.5 * th);
    }
    spin_amp(static_cast<int>(s)) = amp;
  }

  Eigen::VectorXcd psi(dim_);
  if (n_ph_ > 1) {
    const std::complex<double> alpha0 = spec.cavity_alpha0.value_or(std::complex<double>{0, 0});
    Eigen::VectorXcd fock(n_ph_);
    std::complex<double> coeff = std::exp(-0.5 * std::norm(alpha0));
    double norm2 = 0.0;
    for (int p = 0; p < n_ph_; ++p) {
      fock(p) = coeff;
      norm2 += std::norm(coeff);
      coeff *= alpha0 / std::sqrt(static_cast<double>(p + 1));
    }
    if (1.0 - norm2 > cutoff_tolerance_) {
      throw NumericalError("oracle: initial coherent state truncated beyond tolerance; "
                           "increase n_ph");
    }
    fock /= std::sqrt(norm2);
    for (std::uint64_t s = 0; s < spin_dim; ++s) {
      for (int p = 0; p < n_ph_; ++p) {
        psi(static_cast<int>(s) * n_ph_ + p) = spin_amp(static_cast<int>(s)) * fock(p);
      }
    }
  } else {
    psi = spin_amp;
  }
  return psi * psi.adjoint();
}

double Liouvillian::top_fock_population(const DenseC& rho) const {
  if (n_ph_ < 2) return 0.0;
  const std::size_t spin_dim = std::size_t{1} << n_spins_;
  double pop = 0.0;
  const int p_from = std::max(1, n_ph_ - 2);
  for (std::uint64_t s = 0; s < spin_dim; ++s) {
    for (int p = p_from; p < n_ph_; ++p) {
      const int idx = static_cast<int>(s) * n_ph_ + p;
      pop += rho(idx, idx).real();
    }
  }
  return pop;
}

double Liouvillian::collective_mean(const DenseC& rho, int axis) const {
  return trace_prod(collective_[axis], rho).real();
}

double Liouvillian::collective_sym_moment(const DenseC& rho, int k, int l) const {
  return trace_prod(collective_prod_[k][l], rho).real();
}

std::complex<double> Liouvillian::cavity_amplitude(const DenseC& rho) const {
  return trace_prod(annihilation_, rho);
}

double Liouvillian::photon_number(const DenseC& rho) const {
  return trace_prod(number_, rho).real();
}

double Liouvillian::photon_fourth(const DenseC& rho) const {
  return trace_prod(fourth_, rho).real();
}

double Liouvillian::site_mean(const DenseC& rho, int site, int axis) const {
  return trace_prod(site_op(site, "xyz"[axis]), rho).real();
}

double Liouvillian::pair_correlation(const DenseC& rho, int i, char a, int j, char b) const {
  return trace_prod(SparseC(site_op(i, a) * site_op(j, b)), rho).real();
}

namespace {

// Column layout mirroring finalize_series (names must match for compare).
struct OracleColumns {
  std::vector<std::string> names;
  std::vector<std::function<double(const Liouvillian&, const DenseC&)>> eval;
};

OracleColumns oracle_columns(const ObservableRequest& req, const Liouvillian& li,
                             std::size_t n_spins) {
  OracleColumns cols;
  const char* axes = "xyz";
  auto add = [&](std::string name, std::function<double(const Liouvillian&, const DenseC&)> fn) {
    cols.names.push_back(std::move(name));
    cols.eval.push_back(std::move(fn));
  };

  if (req.collective_means) {
    for (int k = 0; k < 3; ++k) {
      add(std::string("S") + axes[k] + "_mean",
          [k](const Liouvillian& l, const DenseC& rho) { return l.collective_mean(rho, k); });
    }
  }
  if (req.collective_variances) {
    for (int k = 0; k < 3; ++k) {
      add(std::string("S") + axes[k] + "_var", [k](const Liouvillian& l, const DenseC& rho) {
        const double s = l.collective_mean(rho, k);
        return l.collective_sym_moment(rho, k, k) - s * s;
      });
    }
  }
  if (req.squeezing) {
    const double eps = req.squeezing_epsilon_per_spin * static_cast<double>(n_spins);
    add("xi2", [eps, n_spins](const Liouvillian& l, const DenseC& rho) {
      CollectiveMoments m{};
      for (int k = 0; k < 3; ++k) m.s[k] = l.collective_mean(rho, k);
      for (int k = 0; k < 3; ++k) {
        for (int j = 0; j < 3; ++j) m.ss[k][j] = l.collective_sym_moment(rho, k, j);
      }
      const auto xi2 = squeezing_parameter(m, n_spins, eps);
      return xi2 ? *xi2 : kNaN;
    });
  }
  if (req.spin_length) {
    add("spin_length", [](const Liouvillian&, const DenseC&) { return 3.0; });
  }
  if (req.second_moments) {
    for (int k = 0; k < 3; ++k) {
      add(std::string("s") + axes[k] + "2",
          [](const Liouvillian&, const DenseC&) { return 1.0; });
    }
  }
  if (req.photon && li.has_cavity()) {
    add("alpha_re",
        [](const Liouvillian& l, const DenseC& rho) { return l.cavity_amplitude(rho).real(); });
    add("alpha_im",
        [](const Liouvillian& l, const DenseC& rho) { return l.cavity_amplitude(rho).imag(); });
    add("photon_number",
        [](const Liouvillian& l, const DenseC& rho) { return l.photon_number(rho); });
    const double floor = req.g2_floor;
    add("g2", [floor](const Liouvillian& l, const DenseC& rho) {
      const double n = l.photon_number(rho);
      if (!(n > floor)) return kNaN;
      return l.photon_fourth(rho) / (n * n);
    });
  }
  for (int site : req.site_means) {
    const std::string suffix = "_site" + std::to_string(site);
    for (int k = 0; k < 3; ++k) {
      add(std::string("sigma") + axes[k] + suffix,
          [site, k](const Liouvillian& l, const DenseC& rho) {
            return l.site_mean(rho, site, k);
          });
    }
  }
  for (const auto& p : req.pairs) {
    add(std::string("corr_") + p.axis_a + p.axis_b + "_" + std::to_string(p.i) + "_" +
            std::to_string(p.j),
        [p](const Liouvillian& l, const DenseC& rho) {
          return l.pair_correlation(rho, p.i, p.axis_a, p.j, p.axis_b);
        });
  }
  return cols;
}

}  // namespace

ObservableSeries evolve_master_equation(const ModelSpec& model,
                                        const std::vector<NoiseChannelSpec>& channels,
                                        const ProductStateSpec& initial, const TimeGrid& grid,
                                        const ObservableRequest& request,
                                        const OracleOptions& options) {
  const Liouvillian li = Liouvillian::build(model, channels, options);
  DenseC rho = li.initial_density(initial);

  const double dt_target = options.dt > 0.0 ? options.dt : 0.05 / li.rate_scale();
  const double out_interval = grid.dt * static_cast<double>(grid.output_stride);
  const int substeps = std::max(1, static_cast<int>(std::ceil(out_interval / dt_target)));
  const double h = out_interval / substeps;

  const auto times = grid.times();
  const auto cols = oracle_columns(request, li, model.n);

  ObservableSeries series;
  series.time = times;
  series.columns.resize(cols.names.size());
  for (std::size_t c = 0; c < cols.names.size(); ++c) {
    series.columns[c].name = cols.names[c];
    series.columns[c].value.resize(times.size());
    series.columns[c].stderr_.resize(times.size());
  }

  const double dim_norm = std::sqrt(static_cast<double>(li.dim()));
  double max_fock_pop = 0.0;
  for (std::size_t t = 0; t < times.size(); ++t) {
    if (t > 0) {
      for (int s = 0; s < substeps; ++s) {
        const DenseC k1 = li.apply(rho);
        const DenseC k2 = li.apply(rho + (0.5 * h) * k1);
        const DenseC k3 = li.apply(rho + (0.5 * h) * k2);
        const DenseC k4 = li.apply(rho + h * k3);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
    }
    const double trace_err = std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
    if (trace_err > options.trace_tolerance) {
      std::ostringstream msg;
      msg << "oracle: trace drift " << trace_err << " at t = " << times[t]
          << "; reduce the oracle step";
      throw NumericalError(msg.str());
    }
    const double herm_err = (rho - rho.adjoint()).norm() / std::max(rho.norm(), 1e-300);
    if (herm_err > options.hermiticity_tolerance * dim_norm) {
      std::ostringstream msg;
      msg << "oracle: hermiticity drift " << herm_err << " at t = " << times[t]
          << "; reduce the oracle step";
      throw NumericalError(msg.str());
    }
    max_fock_pop = std::max(max_fock_pop, li.top_fock_population(rho));
    if (max_fock_pop > options.cutoff_tolerance) {
      std::ostringstream msg;
      msg << "oracle: population " << max_fock_pop
          << " in the top two Fock levels exceeds the cutoff tolerance "
          << options.cutoff_tolerance << "; increase n_ph";
      throw NumericalError(msg.str());
    }

    for (std::size_t c = 0; c < cols.names.size(); ++c) {
      const double v = cols.eval[c](li, rho);
      series.columns[c].value[t] = v;
      series.columns[c].stderr_[t] = std::isfinite(v) ? 0.0 : kNaN;
    }
  }

  series.metadata["engine"] = "oracle";
  series.metadata["dim"] = li.dim();
  series.metadata["n_ph"] = li.n_ph();
  series.metadata["oracle_dt"] = h;
  series.metadata["max_top_fock_population"] = max_fock_pop;
  return series;
}

ObservableSeries mean_field_reference(const ModelSpec& model,
                                      const std::vector<NoiseChannelSpec>& channels,
                                      const ProductStateSpec& initial, const TimeGrid& grid,
                                      const ObservableRequest& request) {
  const ChannelRuntime rt = ChannelRuntime::build(channels, model.cavity.has_value(),
                                                  model.cavity ? model.cavity->kappa : 0.0);
  double deph = rt.collective_dephasing;
  double decay = 0.0;
  for (const auto& c : rt.per_spin) {
    if (c.kind == NoiseKind::dephasing_individual) {
      deph += c.rate;
    } else {
      decay += c.rate;
    }
  }

  const std::size_t n = model.n;
  SpinEnsembleState state;
  state.sx.resize(n);
  state.sy.resize(n);
  state.sz.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    state.sx[i] = std::sin(initial.theta[i]) * std::cos(initial.phi[i]);
    state.sy[i] = std::sin(initial.theta[i]) * std::sin(initial.phi[i]);
    state.sz[i] = std::cos(initial.theta[i]);
  }
  if (model.cavity) {
    state.has_cavity = true;
    state.alpha = initial.cavity_alpha0.value_or(std::complex<double>{0.0, 0.0});
  }

  DriftBuffers bufs;
  auto derivative = [&](const SpinEnsembleState& s, std::vector<double>& dx,
                        std::vector<double>& dy, std::vector<double>& dz,
                        std::complex<double>& dalpha) {
    mean_field_drift(s, model, nullptr, nullptr, 0.0, bufs);
    for (std::size_t i = 0; i < n; ++i) {
      dx[i] = bufs.dx[i] - (deph + 0.5 * decay) * s.sx[i];
      dy[i] = bufs.dy[i] - (deph + 0.5 * decay) * s.sy[i];
      dz[i] = bufs.dz[i] - decay * (s.sz[i] + 1.0);
    }
    dalpha = bufs.dalpha - rt.cavity_kappa * s.alpha;
  };

  const double rate = model.typical_rate() + rt.max_rate();
  const double out_interval = grid.dt * static_cast<double>(grid.output_stride);
  const int substeps =
      std::max(1, static_cast<int>(std::ceil(out_interval * rate / 0.02)));
  const double h = out_interval / substeps;

  const auto times = grid.times();
  ObservableSeries series;
  series.time = times;

  std::vector<std::string> names = {"Sx_mean", "Sy_mean", "Sz_mean", "spin_length"};
  if (model.cavity && request.photon) {
    names.insert(names.end(), {"alpha_re", "alpha_im", "photon_number"});
  }
  series.columns.resize(names.size());
  for (std::size_t c = 0; c < names.size(); ++c) {
    series.columns[c].name = names[c];
    series.columns[c].value.resize(times.size());
    series.columns[c].stderr_.assign(times.size(), 0.0);
  }

  std::vector<double> k1x(n), k1y(n), k1z(n), k2x(n), k2y(n), k2z(n), k3x(n), k3y(n), k3z(n),
      k4x(n), k4y(n), k4z(n);
  std::complex<double> ka1, ka2, ka3, ka4;
  SpinEnsembleState tmp = state;

  auto record = [&](std::size_t t) {
    double mx = 0, my = 0, mz = 0, len = 0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += state.sx[i];
      my += state.sy[i];
      mz += state.sz[i];
      len += state.sx[i] * state.sx[i] + state.sy[i] * state.sy[i] + state.sz[i] * state.sz[i];
    }
    std::size_t c = 0;
    series.columns[c++].value[t] = 0.5 * mx;
    series.columns[c++].value[t] = 0.5 * my;
    series.columns[c++].value[t] = 0.5 * mz;
    series.columns[c++].value[t] = len / static_cast<double>(n);
    if (model.cavity && request.photon) {
      series.columns[c++].value[t] = state.alpha.real();
      series.columns[c++].value[t] = state.alpha.imag();
      // coherent part only: the mean-field mode carries no fluctuations
      series.columns[c++].value[t] = std::norm(state.alpha);
    }
  };

  record(0);
  for (std::size_t t = 1; t < times.size(); ++t) {
    for (int s = 0; s < substeps; ++s) {
      derivative(state, k1x, k1y, k1z, ka1);
      auto shift = [&](const std::vector<double>& kx, const std::vector<double>& ky,
                       const std::vector<double>& kz, std::complex<double> ka, double c) {
        for (std::size_t i = 0; i < n; ++i) {
          tmp.sx[i] = state.sx[i] + c * h * kx[i];
          tmp.sy[i] = state.sy[i] + c * h * ky[i];
          tmp.sz[i] = state.sz[i] + c * h * kz[i];
        }
        tmp.alpha = state.alpha + c * h * ka;
      };
      shift(k1x, k1y, k1z, ka1, 0.5);
      derivative(tmp, k2x, k2y, k2z, ka2);
      shift(k2x, k2y, k2z, ka2, 0.5);
      derivative(tmp, k3x, k3y, k3z, ka3);
      shift(k3x, k3y, k3z, ka3, 1.0);
      derivative(tmp, k4x, k4y, k4z, ka4);
      for (std::size_t i = 0; i < n; ++i) {
        state.sx[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
        state.sy[i] += h / 6.0 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i]);
        state.sz[i] += h / 6.0 * (k1z[i] + 2.0 * k2z[i] + 2.0 * k3z[i] + k4z[i]);
      }
      state.alpha += h / 6.0 * (ka1 + 2.0 * ka2 + 2.0 * ka3 + ka4);
    }
    record(t);
  }

  series.metadata["engine"] = "mean_field";
  series.metadata["mean_field_dt"] = h;
  return series;
}

}  // namespace ddtwa
