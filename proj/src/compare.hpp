#ifndef DDTWA_COMPARE_HPP
#define DDTWA_COMPARE_HPP

#include <string>
#include <vector>

#include "observables.hpp"
#include "vendor_json.hpp"

namespace ddtwa {

// Pointwise tolerance: dev <= abs_floor + z_max * sqrt(se_a^2 + se_b^2).
// Symmetric in the two series; rows where either side is undefined (NaN) are
// skipped and counted.
struct CompareOptions {
  double z_max = 4.0;
  double abs_floor = 0.0;
};

struct CompareObservable {
  std::string name;
  double max_abs_dev = 0.0;
  double max_z = 0.0;        // dev / combined stderr (inf when stderr = 0)
  double max_ratio = 0.0;    // dev / (abs_floor + z_max * stderr)
  double worst_time = 0.0;
  std::size_t points = 0;
  std::size_t skipped = 0;
  bool pass = true;
};

struct CompareReport {
  bool pass = true;
  CompareOptions options;
  std::vector<CompareObservable> observables;

  nlohmann::json to_json() const;
};

CompareReport compare_series(const ObservableSeries& a, const ObservableSeries& b,
                             const CompareOptions& options);

}  // namespace ddtwa

#endif
