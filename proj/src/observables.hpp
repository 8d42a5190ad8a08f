#ifndef DDTWA_OBSERVABLES_HPP
#define DDTWA_OBSERVABLES_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "spin_state.hpp"
#include "vendor_json.hpp"

namespace ddtwa {

// Selection of estimator columns.
struct ObservableRequest {
  bool collective_means = true;       // Sx_mean, Sy_mean, Sz_mean
  bool collective_variances = false;  // Sx_var, Sy_var, Sz_var
  bool squeezing = false;             // xi2 (Wineland)
  bool photon = false;                // alpha_re/im, photon_number, g2
  bool spin_length = true;            // <<s^2>> diagnostic
  bool second_moments = false;        // sx2, sy2, sz2 site-averaged squares

  struct PairCorrelation {
    int i = 0, j = 1;
    char axis_a = 'z', axis_b = 'z';
  };
  std::vector<int> site_means;         // per-site <sigma^{x,y,z}> columns
  std::vector<PairCorrelation> pairs;  // selected <sigma_i^a sigma_j^b>

  double squeezing_epsilon_per_spin = 1e-6;  // |<S>| floor = eps * N
  double g2_floor = 1e-4;                    // <a^dag a> floor for g2
};

// Raw per-trajectory sums accumulated at each output time. Same-site squared
// components are kept separately so collective second moments can use the
// operator identity (sigma^k)^2 = 1 instead of sampled squares.
struct QuantityLayout {
  // Slots 0-12 are always present:
  //   0 m_x, 1 m_y, 2 m_z                      (m_k = sum_i s_i^k)
  //   3..8 mm_xx, mm_yy, mm_zz, mm_xy, mm_xz, mm_yz
  //        (mm_kl = m_k m_l - sum_i s_i^k s_i^l = sum_{i != j} s_i^k s_j^l)
  //   9 q_xx, 10 q_yy, 11 q_zz                 (q_kk = sum_i (s_i^k)^2)
  //   12 len = q_xx + q_yy + q_zz
  bool cavity = false;  // +4 slots: a_re, a_im, |a|^2, |a|^4
  std::vector<int> sites;
  std::vector<ObservableRequest::PairCorrelation> pairs;

  std::size_t count() const {
    return 13 + (cavity ? 4 : 0) + 3 * sites.size() + pairs.size();
  }
  std::size_t cavity_offset() const { return 13; }
  std::size_t site_offset() const { return 13 + (cavity ? 4 : 0); }
  std::size_t pair_offset() const { return site_offset() + 3 * sites.size(); }

  static QuantityLayout from_request(const ObservableRequest& req, bool has_cavity);
};

// Writes one trajectory's quantity vector for the current state into `out`
// (layout.count() doubles).
void evaluate_quantities(const SpinEnsembleState& state, const QuantityLayout& layout,
                         double* out);

// Trajectory-block accumulation. Blocks are contiguous index ranges fixed by
// (n_t, n_blocks) alone, so reductions are bitwise independent of the worker
// count; they double as jackknife resampling groups.
class EnsembleAccumulator {
 public:
  EnsembleAccumulator(QuantityLayout layout, std::size_t n_times, std::size_t n_t,
                      std::size_t n_blocks);

  std::size_t n_blocks() const { return n_blocks_; }
  std::size_t n_times() const { return n_times_; }
  std::size_t n_t() const { return n_t_; }
  const QuantityLayout& layout() const { return layout_; }

  std::size_t block_of(std::size_t trajectory) const;
  std::size_t block_begin(std::size_t block) const;
  std::size_t block_end(std::size_t block) const;

  // Adds one trajectory's samples (n_times x count) to its block.
  void add_trajectory(std::size_t trajectory, const std::vector<double>& samples);
  void record_failure(std::size_t trajectory, const std::string& message);

  std::size_t success_count() const;
  std::size_t failure_count() const { return failures_.size(); }
  const std::vector<std::pair<std::size_t, std::string>>& failures() const { return failures_; }

  // Ordered totals over blocks.
  std::vector<double> total_sum(std::size_t time_index) const;
  std::vector<double> total_sumsq(std::size_t time_index) const;
  std::vector<double> block_sum(std::size_t block, std::size_t time_index) const;
  std::size_t block_success(std::size_t block) const { return block_count_[block]; }

  // Per-block sums averaged over a trailing time window (for steady states).
  std::vector<double> window_block_sum(std::size_t block, std::size_t first_time,
                                       std::size_t last_time) const;

 private:
  QuantityLayout layout_;
  std::size_t n_times_, n_t_, n_blocks_, q_;
  std::vector<double> sum_;    // [block][time][q]
  std::vector<double> sumsq_;  // [block][time][q]
  std::vector<std::size_t> block_count_;
  std::vector<std::pair<std::size_t, std::string>> failures_;
};

struct ObservableColumn {
  std::string name;
  std::vector<double> value;
  std::vector<double> stderr_;  // NaN where undefined/absent
};

struct ObservableSeries {
  std::vector<double> time;
  std::vector<ObservableColumn> columns;
  nlohmann::json metadata;

  const ObservableColumn* find(const std::string& name) const;
};

std::string stderr_column_name(const std::string& column);

// Full-moment view of one time slice (means of the accumulated quantities).
struct MomentView {
  std::size_t n_spins = 0;
  const QuantityLayout* layout = nullptr;
  std::vector<double> mean;  // quantity means

  double spin_mean_sum(int axis) const { return mean[axis]; }
  double cross_sum(int a, int b) const;  // mean of mm_kl
};

// Collective spin estimators built from trajectory moments; same-site terms
// use the operator identity (sigma^k)^2 = 1.
struct CollectiveMoments {
  double s[3];        // <S_k>
  double ss[3][3];    // <{S_k S_l}_sym>
  double var(int k) const { return ss[k][k] - s[k] * s[k]; }
};
CollectiveMoments collective_spin_moments(const MomentView& view);

// Wineland squeezing parameter xi^2 = min_phi (Delta S_phi_perp)^2 N / |<S>|^2.
// Returns nullopt when |<S>| <= epsilon.
std::optional<double> squeezing_parameter(const CollectiveMoments& m, std::size_t n_spins,
                                          double epsilon);

// Symmetric-to-normal ordering corrections for the photonic mode:
//   <a^dag a>        = <|a|^2>_W - 1/2
//   <a^dag a^dag a a> = <|a|^4>_W - 2 <|a|^2>_W + 1/2
struct PhotonStatistics {
  double mean_photon = 0.0;
  double normal_fourth = 0.0;
  std::optional<double> g2;
};
PhotonStatistics photon_statistics(double a2_mean, double a4_mean, double g2_floor);

// Finalizes the accumulator into a column series at each recorded time.
ObservableSeries finalize_series(const EnsembleAccumulator& acc, const ObservableRequest& req,
                                 std::size_t n_spins, const std::vector<double>& times);

// Steady-state aggregation: estimator applied to window-averaged moments,
// with jackknife-over-blocks standard errors.
struct SteadyValue {
  std::string name;
  double value = 0.0;
  double stderr_ = 0.0;  // NaN when undefined
};
std::vector<SteadyValue> steady_state_summary(const EnsembleAccumulator& acc,
                                              const ObservableRequest& req, std::size_t n_spins,
                                              const std::vector<double>& times,
                                              double window_fraction);

// Window average of an already-finalized series (used for oracle tables).
std::vector<SteadyValue> steady_state_summary(const ObservableSeries& series,
                                              double window_fraction);

}  // namespace ddtwa

#endif
