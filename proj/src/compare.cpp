#include "compare.hpp"

#include <cmath>
#include <limits>

#include "errors.hpp"

namespace ddtwa {

CompareReport compare_series(const ObservableSeries& a, const ObservableSeries& b,
                             const CompareOptions& options) {
  if (a.time.size() != b.time.size()) {
    throw ConfigError("compare: time grids have different lengths");
  }
  for (std::size_t t = 0; t < a.time.size(); ++t) {
    const double scale = std::max({1.0, std::abs(a.time[t]), std::abs(b.time[t])});
    if (std::abs(a.time[t] - b.time[t]) > 1e-9 * scale) {
      throw ConfigError("compare: time grids do not match at row " + std::to_string(t));
    }
  }

  CompareReport report;
  report.options = options;
  for (const auto& col_a : a.columns) {
    const ObservableColumn* col_b = b.find(col_a.name);
    if (!col_b) continue;

    CompareObservable obs;
    obs.name = col_a.name;
    for (std::size_t t = 0; t < a.time.size(); ++t) {
      const double va = col_a.value[t];
      const double vb = col_b->value[t];
      if (!std::isfinite(va) || !std::isfinite(vb)) {
        ++obs.skipped;
        continue;
      }
      ++obs.points;
      const double dev = std::abs(va - vb);
      double se_a = col_a.stderr_[t];
      double se_b = col_b->stderr_[t];
      if (!std::isfinite(se_a)) se_a = 0.0;
      if (!std::isfinite(se_b)) se_b = 0.0;
      const double se = std::sqrt(se_a * se_a + se_b * se_b);
      const double z = se > 0.0 ? dev / se
                                : (dev > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      const double tolerance = options.abs_floor + options.z_max * se;
      const double ratio =
          tolerance > 0.0 ? dev / tolerance
                          : (dev > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      obs.max_abs_dev = std::max(obs.max_abs_dev, dev);
      obs.max_z = std::max(obs.max_z, z);
      if (ratio > obs.max_ratio) {
        obs.max_ratio = ratio;
        obs.worst_time = a.time[t];
      }
    }
    obs.pass = obs.max_ratio <= 1.0;
    report.pass = report.pass && obs.pass;
    report.observables.push_back(obs);
  }
  if (report.observables.empty()) {
    throw ConfigError("compare: the tables share no observable columns");
  }
  return report;
}

nlohmann::json CompareReport::to_json() const {
  nlohmann::json doc;
  doc["pass"] = pass;
  doc["z_max"] = options.z_max;
  doc["abs_floor"] = options.abs_floor;
  nlohmann::json obs = nlohmann::json::object();
  for (const auto& o : observables) {
    obs[o.name] = {{"max_abs_dev", o.max_abs_dev},
                   {"max_z", std::isfinite(o.max_z) ? nlohmann::json(o.max_z) : nlohmann::json("inf")},
                   {"max_ratio", std::isfinite(o.max_ratio) ? nlohmann::json(o.max_ratio)
                                                            : nlohmann::json("inf")},
                   {"worst_time", o.worst_time},
                   {"points", o.points},
                   {"skipped", o.skipped},
                   {"pass", o.pass}};
  }
  doc["observables"] = obs;
  return doc;
}

}  // namespace ddtwa
