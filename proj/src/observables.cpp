#include "observables.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace ddtwa {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Slot of mm_kl in the fixed layout (see QuantityLayout).
int cross_slot(int a, int b) {
  if (a == b) return 3 + a;
  const int lo = std::min(a, b), hi = std::max(a, b);
  if (lo == 0 && hi == 1) return 6;
  if (lo == 0 && hi == 2) return 7;
  return 8;
}

}  // namespace

QuantityLayout QuantityLayout::from_request(const ObservableRequest& req, bool has_cavity) {
  QuantityLayout layout;
  layout.cavity = has_cavity;
  layout.sites = req.site_means;
  layout.pairs = req.pairs;
  return layout;
}

void evaluate_quantities(const SpinEnsembleState& state, const QuantityLayout& layout,
                         double* out) {
  const std::size_t n = state.size();
  const double* sx = state.sx.data();
  const double* sy = state.sy.data();
  const double* sz = state.sz.data();

  double mx = 0, my = 0, mz = 0;
  double qxx = 0, qyy = 0, qzz = 0, qxy = 0, qxz = 0, qyz = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = sx[i], y = sy[i], z = sz[i];
    mx += x;
    my += y;
    mz += z;
    qxx += x * x;
    qyy += y * y;
    qzz += z * z;
    qxy += x * y;
    qxz += x * z;
    qyz += y * z;
  }
  out[0] = mx;
  out[1] = my;
  out[2] = mz;
  out[3] = mx * mx - qxx;
  out[4] = my * my - qyy;
  out[5] = mz * mz - qzz;
  out[6] = mx * my - qxy;
  out[7] = mx * mz - qxz;
  out[8] = my * mz - qyz;
  out[9] = qxx;
  out[10] = qyy;
  out[11] = qzz;
  out[12] = qxx + qyy + qzz;

  std::size_t k = layout.cavity_offset();
  if (layout.cavity) {
    const double re = state.alpha.real();
    const double im = state.alpha.imag();
    const double a2 = re * re + im * im;
    out[k++] = re;
    out[k++] = im;
    out[k++] = a2;
    out[k++] = a2 * a2;
  }
  for (int site : layout.sites) {
    out[k++] = sx[site];
    out[k++] = sy[site];
    out[k++] = sz[site];
  }
  for (const auto& p : layout.pairs) {
    const double* a = (p.axis_a == 'x') ? sx : (p.axis_a == 'y') ? sy : sz;
    const double* b = (p.axis_b == 'x') ? sx : (p.axis_b == 'y') ? sy : sz;
    out[k++] = a[p.i] * b[p.j];
  }
}

EnsembleAccumulator::EnsembleAccumulator(QuantityLayout layout, std::size_t n_times,
                                         std::size_t n_t, std::size_t n_blocks)
    : layout_(std::move(layout)),
      n_times_(n_times),
      n_t_(n_t),
      n_blocks_(std::min(n_blocks, n_t)),
      q_(layout_.count()) {
  if (n_blocks_ < 1) n_blocks_ = 1;
  sum_.assign(n_blocks_ * n_times_ * q_, 0.0);
  sumsq_.assign(n_blocks_ * n_times_ * q_, 0.0);
  block_count_.assign(n_blocks_, 0);
}

std::size_t EnsembleAccumulator::block_of(std::size_t trajectory) const {
  return trajectory * n_blocks_ / n_t_;
}

std::size_t EnsembleAccumulator::block_begin(std::size_t block) const {
  // smallest t with t * n_blocks / n_t == block
  std::size_t begin = (block * n_t_ + n_blocks_ - 1) / n_blocks_;
  while (begin > 0 && block_of(begin - 1) == block) --begin;
  while (begin < n_t_ && block_of(begin) != block) ++begin;
  return begin;
}

std::size_t EnsembleAccumulator::block_end(std::size_t block) const {
  return (block + 1 == n_blocks_) ? n_t_ : block_begin(block + 1);
}

void EnsembleAccumulator::add_trajectory(std::size_t trajectory,
                                         const std::vector<double>& samples) {
  const std::size_t b = block_of(trajectory);
  double* s = &sum_[b * n_times_ * q_];
  double* s2 = &sumsq_[b * n_times_ * q_];
  for (std::size_t k = 0; k < n_times_ * q_; ++k) {
    s[k] += samples[k];
    s2[k] += samples[k] * samples[k];
  }
  ++block_count_[b];
}

void EnsembleAccumulator::record_failure(std::size_t trajectory, const std::string& message) {
  failures_.emplace_back(trajectory, message);
}

std::size_t EnsembleAccumulator::success_count() const {
  std::size_t total = 0;
  for (auto c : block_count_) total += c;
  return total;
}

std::vector<double> EnsembleAccumulator::total_sum(std::size_t t) const {
  std::vector<double> out(q_, 0.0);
  for (std::size_t b = 0; b < n_blocks_; ++b) {
    const double* s = &sum_[(b * n_times_ + t) * q_];
    for (std::size_t k = 0; k < q_; ++k) out[k] += s[k];
  }
  return out;
}

std::vector<double> EnsembleAccumulator::total_sumsq(std::size_t t) const {
  std::vector<double> out(q_, 0.0);
  for (std::size_t b = 0; b < n_blocks_; ++b) {
    const double* s = &sumsq_[(b * n_times_ + t) * q_];
    for (std::size_t k = 0; k < q_; ++k) out[k] += s[k];
  }
  return out;
}

std::vector<double> EnsembleAccumulator::block_sum(std::size_t block, std::size_t t) const {
  const double* s = &sum_[(block * n_times_ + t) * q_];
  return std::vector<double>(s, s + q_);
}

std::vector<double> EnsembleAccumulator::window_block_sum(std::size_t block,
                                                          std::size_t first_time,
                                                          std::size_t last_time) const {
  std::vector<double> out(q_, 0.0);
  const std::size_t count = last_time - first_time + 1;
  for (std::size_t t = first_time; t <= last_time; ++t) {
    const double* s = &sum_[(block * n_times_ + t) * q_];
    for (std::size_t k = 0; k < q_; ++k) out[k] += s[k];
  }
  for (std::size_t k = 0; k < q_; ++k) out[k] /= static_cast<double>(count);
  return out;
}

const ObservableColumn* ObservableSeries::find(const std::string& name) const {
  for (const auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string stderr_column_name(const std::string& column) {
  constexpr const char* kMean = "_mean";
  if (column.size() > 5 && column.compare(column.size() - 5, 5, kMean) == 0) {
    return column.substr(0, column.size() - 5) + "_stderr";
  }
  return column + "_stderr";
}

double MomentView::cross_sum(int a, int b) const { return mean[cross_slot(a, b)]; }

CollectiveMoments collective_spin_moments(const MomentView& view) {
  CollectiveMoments m{};
  const double n = static_cast<double>(view.n_spins);
  for (int k = 0; k < 3; ++k) m.s[k] = 0.5 * view.mean[k];
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 3; ++l) {
      const double same_site = (k == l) ? n : 0.0;
      m.ss[k][l] = 0.25 * (same_site + view.cross_sum(k, l));
    }
  }
  return m;
}

std::optional<double> squeezing_parameter(const CollectiveMoments& m, std::size_t n_spins,
                                          double epsilon) {
  const double sx = m.s[0], sy = m.s[1], sz = m.s[2];
  const double norm = std::sqrt(sx * sx + sy * sy + sz * sz);
  if (!(norm > epsilon)) return std::nullopt;

  const double mhat[3] = {sx / norm, sy / norm, sz / norm};
  // n1 = normalize(z x mhat), falling back to x for mhat ~ +-z; n2 = mhat x n1.
  double n1[3] = {-mhat[1], mhat[0], 0.0};
  const double n1_norm = std::sqrt(n1[0] * n1[0] + n1[1] * n1[1]);
  if (n1_norm < 1e-12) {
    n1[0] = 1.0;
    n1[1] = 0.0;
    n1[2] = 0.0;
  } else {
    n1[0] /= n1_norm;
    n1[1] /= n1_norm;
  }
  const double n2[3] = {mhat[1] * n1[2] - mhat[2] * n1[1], mhat[2] * n1[0] - mhat[0] * n1[2],
                        mhat[0] * n1[1] - mhat[1] * n1[0]};

  double cov[3][3];
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 3; ++l) cov[k][l] = m.ss[k][l] - m.s[k] * m.s[l];
  }
  auto project = [&](const double* a, const double* b) {
    double acc = 0.0;
    for (int k = 0; k < 3; ++k) {
      for (int l = 0; l < 3; ++l) acc += a[k] * cov[k][l] * b[l];
    }
    return acc;
  };
  const double c11 = project(n1, n1);
  const double c22 = project(n2, n2);
  const double c12 = 0.5 * (project(n1, n2) + project(n2, n1));

  const double tr = c11 + c22;
  const double disc = std::sqrt(std::max(0.0, (c11 - c22) * (c11 - c22) + 4.0 * c12 * c12));
  const double lambda_min = 0.5 * (tr - disc);
  return lambda_min * static_cast<double>(n_spins) / (norm * norm);
}

PhotonStatistics photon_statistics(double a2_mean, double a4_mean, double g2_floor) {
  PhotonStatistics stats;
  stats.mean_photon = a2_mean - 0.5;
  stats.normal_fourth = a4_mean - 2.0 * a2_mean + 0.5;
  if (stats.mean_photon > g2_floor) {
    stats.g2 = stats.normal_fourth / (stats.mean_photon * stats.mean_photon);
  }
  return stats;
}

namespace {

// Column recipe: estimator over quantity means, plus how its error is found.
struct ColumnDef {
  std::string name;
  std::function<double(const MomentView&)> estimate;  // may return NaN (undefined)
  // exact stderr from a single linear quantity: slot and scale, or -1 for jackknife
  int linear_slot = -1;
  double linear_scale = 1.0;
};

std::vector<ColumnDef> column_defs(const ObservableRequest& req, const QuantityLayout& layout,
                                   std::size_t n_spins) {
  std::vector<ColumnDef> defs;
  const double n = static_cast<double>(n_spins);
  const char* axes = "xyz";

  if (req.collective_means) {
    for (int k = 0; k < 3; ++k) {
      defs.push_back({std::string("S") + axes[k] + "_mean",
                      [k](const MomentView& v) { return 0.5 * v.mean[k]; }, k, 0.5});
    }
  }
  if (req.collective_variances) {
    for (int k = 0; k < 3; ++k) {
      defs.push_back({std::string("S") + axes[k] + "_var",
                      [k](const MomentView& v) {
                        const auto m = collective_spin_moments(v);
                        return m.var(k);
                      },
                      -1, 1.0});
    }
  }
  if (req.squeezing) {
    const double eps = req.squeezing_epsilon_per_spin * n;
    defs.push_back({"xi2",
                    [eps, n_spins](const MomentView& v) {
                      const auto m = collective_spin_moments(v);
                      const auto xi2 = squeezing_parameter(m, n_spins, eps);
                      return xi2 ? *xi2 : kNaN;
                    },
                    -1, 1.0});
  }
  if (req.spin_length) {
    defs.push_back(
        {"spin_length", [n](const MomentView& v) { return v.mean[12] / n; }, 12, 1.0 / n});
  }
  if (req.second_moments) {
    for (int k = 0; k < 3; ++k) {
      const int slot = 9 + k;
      defs.push_back({std::string("s") + axes[k] + "2",
                      [slot, n](const MomentView& v) { return v.mean[slot] / n; }, slot, 1.0 / n});
    }
  }
  if (req.photon && layout.cavity) {
    const int base = static_cast<int>(layout.cavity_offset());
    defs.push_back(
        {"alpha_re", [base](const MomentView& v) { return v.mean[base]; }, base, 1.0});
    defs.push_back(
        {"alpha_im", [base](const MomentView& v) { return v.mean[base + 1]; }, base + 1, 1.0});
    defs.push_back({"photon_number",
                    [base](const MomentView& v) { return v.mean[base + 2] - 0.5; }, base + 2, 1.0});
    const double floor = req.g2_floor;
    defs.push_back({"g2",
                    [base, floor](const MomentView& v) {
                      const auto stats =
                          photon_statistics(v.mean[base + 2], v.mean[base + 3], floor);
                      return stats.g2 ? *stats.g2 : kNaN;
                    },
                    -1, 1.0});
  }
  for (std::size_t s = 0; s < layout.sites.size(); ++s) {
    const int base = static_cast<int>(layout.site_offset() + 3 * s);
    const std::string suffix = "_site" + std::to_string(layout.sites[s]);
    for (int k = 0; k < 3; ++k) {
      defs.push_back({std::string("sigma") + axes[k] + suffix,
                      [base, k](const MomentView& v) { return v.mean[base + k]; }, base + k, 1.0});
    }
  }
  for (std::size_t p = 0; p < layout.pairs.size(); ++p) {
    const int slot = static_cast<int>(layout.pair_offset() + p);
    const auto& pc = layout.pairs[p];
    const std::string name = std::string("corr_") + pc.axis_a + pc.axis_b + "_" +
                             std::to_string(pc.i) + "_" + std::to_string(pc.j);
    defs.push_back({name, [slot](const MomentView& v) { return v.mean[slot]; }, slot, 1.0});
  }
  return defs;
}

// Jackknife over nonempty trajectory blocks.
double jackknife_se(const std::vector<std::vector<double>>& block_sums,
                    const std::vector<std::size_t>& block_counts,
                    const std::vector<double>& total, std::size_t n_total,
                    const std::function<double(const MomentView&)>& est, MomentView& scratch) {
  const std::size_t q = total.size();
  std::vector<double> loo(q);
  std::vector<double> theta;
  theta.reserve(block_sums.size());
  for (std::size_t b = 0; b < block_sums.size(); ++b) {
    if (block_counts[b] == 0) continue;
    const double denom = static_cast<double>(n_total - block_counts[b]);
    if (denom <= 0) return kNaN;
    for (std::size_t k = 0; k < q; ++k) loo[k] = (total[k] - block_sums[b][k]) / denom;
    scratch.mean = loo;
    const double v = est(scratch);
    if (!std::isfinite(v)) return kNaN;
    theta.push_back(v);
  }
  const std::size_t nb = theta.size();
  if (nb < 2) return kNaN;
  double mean = 0.0;
  for (double v : theta) mean += v;
  mean /= static_cast<double>(nb);
  double ss = 0.0;
  for (double v : theta) ss += (v - mean) * (v - mean);
  return std::sqrt(ss * static_cast<double>(nb - 1) / static_cast<double>(nb));
}

}  // namespace

ObservableSeries finalize_series(const EnsembleAccumulator& acc, const ObservableRequest& req,
                                 std::size_t n_spins, const std::vector<double>& times) {
  const std::size_t n_success = acc.success_count();
  if (n_success == 0) throw std::runtime_error("finalize_series: no successful trajectories");
  const auto& layout = acc.layout();
  const auto defs = column_defs(req, layout, n_spins);

  ObservableSeries series;
  series.time = times;
  series.columns.resize(defs.size());
  for (std::size_t c = 0; c < defs.size(); ++c) {
    series.columns[c].name = defs[c].name;
    series.columns[c].value.resize(times.size());
    series.columns[c].stderr_.resize(times.size());
  }

  MomentView view;
  view.n_spins = n_spins;
  view.layout = &layout;

  std::vector<std::vector<double>> block_sums(acc.n_blocks());
  std::vector<std::size_t> block_counts(acc.n_blocks());
  for (std::size_t b = 0; b < acc.n_blocks(); ++b) block_counts[b] = acc.block_success(b);

  const double n = static_cast<double>(n_success);
  for (std::size_t t = 0; t < times.size(); ++t) {
    const auto total = acc.total_sum(t);
    const auto totalsq = acc.total_sumsq(t);
    view.mean.assign(total.begin(), total.end());
    for (auto& v : view.mean) v /= n;

    bool need_blocks = false;
    for (const auto& d : defs) need_blocks = need_blocks || d.linear_slot < 0;
    if (need_blocks && n_success >= 2) {
      for (std::size_t b = 0; b < acc.n_blocks(); ++b) block_sums[b] = acc.block_sum(b, t);
    }

    for (std::size_t c = 0; c < defs.size(); ++c) {
      const auto& d = defs[c];
      series.columns[c].value[t] = d.estimate(view);
      double se = kNaN;
      if (n_success >= 2) {
        if (d.linear_slot >= 0) {
          const std::size_t k = d.linear_slot;
          const double mu = total[k] / n;
          const double var = std::max(0.0, (totalsq[k] - n * mu * mu) / (n - 1.0));
          se = std::abs(d.linear_scale) * std::sqrt(var / n);
        } else {
          se = jackknife_se(block_sums, block_counts, total, n_success, d.estimate, view);
        }
      }
      series.columns[c].stderr_[t] = se;
    }
  }
  return series;
}

std::vector<SteadyValue> steady_state_summary(const EnsembleAccumulator& acc,
                                              const ObservableRequest& req, std::size_t n_spins,
                                              const std::vector<double>& times,
                                              double window_fraction) {
  if (times.empty()) return {};
  const double t_end = times.back();
  const double t_from = t_end - window_fraction * (t_end - times.front());
  std::size_t first = times.size() - 1;
  while (first > 0 && times[first - 1] >= t_from) --first;
  const std::size_t last = times.size() - 1;

  const std::size_t n_success = acc.success_count();
  const auto& layout = acc.layout();
  const auto defs = column_defs(req, layout, n_spins);

  std::vector<std::vector<double>> block_sums(acc.n_blocks());
  std::vector<std::size_t> block_counts(acc.n_blocks());
  std::vector<double> total(layout.count(), 0.0);
  for (std::size_t b = 0; b < acc.n_blocks(); ++b) {
    block_sums[b] = acc.window_block_sum(b, first, last);
    block_counts[b] = acc.block_success(b);
    for (std::size_t k = 0; k < total.size(); ++k) total[k] += block_sums[b][k];
  }

  MomentView view;
  view.n_spins = n_spins;
  view.layout = &layout;
  view.mean.assign(total.begin(), total.end());
  for (auto& v : view.mean) v /= static_cast<double>(n_success);

  std::vector<SteadyValue> out;
  MomentView scratch = view;
  for (const auto& d : defs) {
    SteadyValue sv;
    sv.name = d.name;
    sv.value = d.estimate(view);
    sv.stderr_ = (n_success >= 2)
                     ? jackknife_se(block_sums, block_counts, total, n_success, d.estimate, scratch)
                     : kNaN;
    out.push_back(sv);
  }
  return out;
}

std::vector<SteadyValue> steady_state_summary(const ObservableSeries& series,
                                              double window_fraction) {
  std::vector<SteadyValue> out;
  if (series.time.empty()) return out;
  const double t_end = series.time.back();
  const double t_from = t_end - window_fraction * (t_end - series.time.front());
  std::size_t first = series.time.size() - 1;
  while (first > 0 && series.time[first - 1] >= t_from) --first;

  for (const auto& col : series.columns) {
    SteadyValue sv;
    sv.name = col.name;
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t t = first; t < series.time.size(); ++t) {
      acc += col.value[t];
      ++count;
    }
    sv.value = acc / static_cast<double>(count);
    sv.stderr_ = 0.0;
    out.push_back(sv);
  }
  return out;
}

}  // namespace ddtwa
