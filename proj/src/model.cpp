#include "model.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include <numeric>

namespace ddtwa {

LatticeSpec LatticeSpec::cubic(std::array<int, 3> dims, double spacing) {
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) {
    throw ConfigError("lattice dims must be positive");
  }
  LatticeSpec lat;
  lat.dims = dims;
  lat.spacing = spacing;
  lat.positions.reserve(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
  for (int x = 0; x < dims[0]; ++x) {
    for (int y = 0; y < dims[1]; ++y) {
      for (int z = 0; z < dims[2]; ++z) {
        lat.positions.push_back({spacing * x, spacing * y, spacing * z});
      }
    }
  }
  return lat;
}

const char* to_string(CouplingAxis axis) {
  switch (axis) {
    case CouplingAxis::xx: return "xx";
    case CouplingAxis::yy: return "yy";
    case CouplingAxis::zz: return "zz";
  }
  return "?";
}

void CouplingMatrix::build_neighbor_lists(std::size_t n) {
  row_ptr.assign(n + 1, 0);
  col.clear();
  val.clear();
  if (all_to_all) return;
  std::vector<int> degree(n, 0);
  for (std::size_t k = 0; k < pair_i.size(); ++k) {
    ++degree[pair_i[k]];
    ++degree[pair_j[k]];
  }
  for (std::size_t i = 0; i < n; ++i) row_ptr[i + 1] = row_ptr[i] + degree[i];
  col.resize(row_ptr[n]);
  val.resize(row_ptr[n]);
  std::vector<int> cursor(row_ptr.begin(), row_ptr.end() - 1);
  for (std::size_t k = 0; k < pair_i.size(); ++k) {
    const int i = pair_i[k];
    const int j = pair_j[k];
    const double v = pair_val[k];
    col[cursor[i]] = j;
    val[cursor[i]++] = v;
    col[cursor[j]] = i;
    val[cursor[j]++] = v;
  }
}

double CouplingMatrix::ordered_pair_sum(std::size_t n) const {
  if (all_to_all) {
    return uniform_strength * static_cast<double>(n) * static_cast<double>(n - 1);
  }
  return 2.0 * std::accumulate(pair_val.begin(), pair_val.end(), 0.0);
}

void ModelSpec::finalize() {
  if (n < 1) throw ConfigError("model: n must be >= 1");
  if (lattice && lattice->size() != n) {
    throw ConfigError("model: lattice size does not match n");
  }
  if (!fields.detuning_z.empty() && fields.detuning_z.size() != n) {
    throw ConfigError("model: detuning length does not match n");
  }
  for (auto& c : couplings) c.build_neighbor_lists(n);
}

double ModelSpec::jbar() const {
  double sum = 0.0;
  for (const auto& c : couplings) sum += c.ordered_pair_sum(n);
  return sum / static_cast<double>(n);
}

double ModelSpec::typical_rate() const {
  double rate = std::abs(fields.uniform[0]) + std::abs(fields.uniform[1]) +
                std::abs(fields.uniform[2]);
  for (double w : fields.detuning_z) rate = std::max(rate, std::abs(w));
  // |s| = sqrt(3) per spin; bound the interaction field by the max row sum.
  const double s_mag = std::sqrt(3.0);
  for (const auto& c : couplings) {
    if (c.all_to_all) {
      rate += 2.0 * std::abs(c.uniform_strength) * static_cast<double>(n - 1) * s_mag;
    } else {
      double max_row = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (int k = c.row_ptr[i]; k < c.row_ptr[i + 1]; ++k) row += std::abs(c.val[k]);
        max_row = std::max(max_row, row);
      }
      rate += 2.0 * max_row * s_mag;
    }
  }
  if (cavity) {
    const double root_n = std::sqrt(static_cast<double>(n));
    // |alpha| of order sqrt(N)/2 when the ensemble radiates collectively.
    rate += 2.0 * cavity->g / root_n * (std::abs(cavity->alpha0) + 0.5 * root_n + 1.0);
    rate += std::abs(cavity->drive_omega);
    rate = std::max(rate, cavity->kappa);
  }
  if (disorder.sigma2 > 0.0) rate += 3.0 * std::sqrt(disorder.sigma2);
  return rate;
}

CouplingMatrix build_power_law_couplings(const LatticeSpec& lattice, CouplingAxis axis, double J,
                                         double alpha, bool normalize_by_n, double cutoff_ratio) {
  if (alpha < 0.0) throw ConfigError("couplings: alpha must be >= 0");
  if (cutoff_ratio < 0.0) throw ConfigError("couplings: cutoff_ratio must be >= 0");
  const std::size_t n = lattice.size();
  const double prefactor = normalize_by_n ? J / static_cast<double>(n) : J;

  CouplingMatrix cm;
  cm.axis = axis;
  if (alpha == 0.0) {
    cm.all_to_all = true;
    cm.uniform_strength = prefactor;
    return cm;
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = lattice.positions[i][0] - lattice.positions[j][0];
      const double dy = lattice.positions[i][1] - lattice.positions[j][1];
      const double dz = lattice.positions[i][2] - lattice.positions[j][2];
      const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
      if (dist == 0.0) {
        throw ConfigError("couplings: coincident lattice sites");
      }
      const double value = prefactor / std::pow(dist, alpha);
      if (std::abs(value) < cutoff_ratio * std::abs(prefactor)) continue;
      cm.pair_i.push_back(static_cast<int>(i));
      cm.pair_j.push_back(static_cast<int>(j));
      cm.pair_val.push_back(value);
    }
  }
  return cm;
}

std::vector<double> sample_disorder(double sigma2, std::size_t n, const RandomStream& rng) {
  if (sigma2 < 0.0) throw ConfigError("disorder: sigma2 must be >= 0");
  std::vector<double> omega(n, 0.0);
  if (sigma2 == 0.0) return omega;
  const double sigma = std::sqrt(sigma2);
  for (std::size_t i = 0; i < n; ++i) {
    omega[i] = sigma * rng.normal_pair(StreamPurpose::disorder, static_cast<std::uint32_t>(i), 0)[0];
  }
  return omega;
}

void DriftBuffers::resize(std::size_t n) {
  dx.resize(n);
  dy.resize(n);
  dz.resize(n);
  field_x.assign(n, 0.0);
  field_y.assign(n, 0.0);
  field_z.assign(n, 0.0);
}

void mean_field_drift(const SpinEnsembleState& state, const ModelSpec& model,
                      const double* detuning, const double* colored_xi, double shared_xi,
                      DriftBuffers& out) {
  const std::size_t n = state.size();
  out.resize(n);

  double* fx = out.field_x.data();
  double* fy = out.field_y.data();
  double* fz = out.field_z.data();

  // Interaction part of the effective field, 2 sum_j J_ij s_j^k per axis.
  for (const auto& c : model.couplings) {
    const double* s = (c.axis == CouplingAxis::xx)   ? state.sx.data()
                      : (c.axis == CouplingAxis::yy) ? state.sy.data()
                                                     : state.sz.data();
    double* f = (c.axis == CouplingAxis::xx) ? fx : (c.axis == CouplingAxis::yy) ? fy : fz;
    if (c.all_to_all) {
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) total += s[j];
      const double two_j = 2.0 * c.uniform_strength;
      for (std::size_t i = 0; i < n; ++i) f[i] += two_j * (total - s[i]);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = c.row_ptr[i]; k < c.row_ptr[i + 1]; ++k) acc += c.val[k] * s[c.col[k]];
        f[i] += 2.0 * acc;
      }
    }
  }

  double ux = model.fields.uniform[0];
  double uy = model.fields.uniform[1];
  const double uz = model.fields.uniform[2] + shared_xi;

  double g_over_root_n = 0.0;
  if (model.cavity) {
    g_over_root_n = model.cavity->g / std::sqrt(static_cast<double>(n));
    // (g/sqrt(N)) (S+ a + S- a*) contributes a transverse field
    // (2g/sqrt(N)) (Re alpha, -Im alpha, 0); the drive adds to x.
    ux += 2.0 * g_over_root_n * state.alpha.real() + model.cavity->drive_omega;
    uy += -2.0 * g_over_root_n * state.alpha.imag();
  }

  const double* det_z = model.fields.detuning_z.empty() ? nullptr : model.fields.detuning_z.data();
  const double* sx = state.sx.data();
  const double* sy = state.sy.data();
  const double* sz = state.sz.data();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ox = ux + fx[i];
    const double oy = uy + fy[i];
    double oz = uz + fz[i];
    if (det_z) oz += det_z[i];
    if (detuning) oz += detuning[i];
    if (colored_xi) oz += colored_xi[i];
    out.dx[i] = oy * sz[i] - oz * sy[i];
    out.dy[i] = oz * sx[i] - ox * sz[i];
    out.dz[i] = ox * sy[i] - oy * sx[i];
    mx += sx[i];
    my += sy[i];
  }

  if (model.cavity) {
    // dalpha/dt = -i g/sqrt(4N) sum_i (s_i^x - i s_i^y)
    const double pref = 0.5 * g_over_root_n;
    out.dalpha = std::complex<double>(-pref * my, -pref * mx);
  } else {
    out.dalpha = {0.0, 0.0};
  }
}

}  // namespace ddtwa
