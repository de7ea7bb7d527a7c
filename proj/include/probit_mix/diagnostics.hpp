#pragma once

// Empirical TV upper-bound curve from lag-L meeting times, and the mixing-time
// bound read off it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

#include "probit_mix/couplings.hpp"
#include "probit_mix/errors.hpp"

namespace probit_mix {

struct TVBoundCurve {
  std::vector<std::int64_t> t_grid;
  std::vector<double> dbar;
  std::vector<double> se;
  std::int64_t lag = 0;
  std::size_t n_used = 0;
  std::size_t n_censored = 0;
};

/// max{0, ceil((tau - L - t) / L)} in integer arithmetic.
inline std::int64_t tv_bound_term(std::int64_t tau, std::int64_t lag, std::int64_t t) {
  const std::int64_t num = tau - lag - t;
  if (num <= 0) return 0;
  return (num + lag - 1) / lag;
}

/// Grid 1..(max tau - L) over the un-censored records (at least {1}).
inline std::vector<std::int64_t> default_t_grid(const std::vector<MeetingRecord>& records) {
  std::int64_t upper = 1;
  for (const auto& r : records)
    if (!r.censored) upper = std::max(upper, r.tau - r.lag);
  std::vector<std::int64_t> grid(static_cast<std::size_t>(upper));
  for (std::int64_t t = 1; t <= upper; ++t) grid[static_cast<std::size_t>(t - 1)] = t;
  return grid;
}

/// Empirical mean of the TV bound term over un-censored records, with plug-in CLT errors.
/// Censored records are dropped and reported on `warn`.
inline TVBoundCurve tv_bound_curve(const std::vector<MeetingRecord>& records, std::vector<std::int64_t> t_grid = {},
                                   std::ostream* warn = &std::cerr) {
  if (records.empty()) throw Error("no meeting records");
  TVBoundCurve curve;
  curve.lag = records.front().lag;
  std::vector<std::int64_t> taus;
  for (const auto& r : records) {
    if (r.lag != curve.lag) throw Error("meeting records mix different lags");
    if (r.censored) {
      ++curve.n_censored;
    } else {
      taus.push_back(r.tau);
    }
  }
  if (taus.empty()) throw Error("all meeting records are censored");
  if (curve.n_censored > 0 && warn != nullptr) {
    *warn << "warning: " << curve.n_censored << " of " << records.size()
          << " meeting records censored and excluded; the TV bound is biased downward\n";
  }
  curve.n_used = taus.size();
  if (t_grid.empty()) t_grid = default_t_grid(records);
  curve.t_grid = std::move(t_grid);
  curve.dbar.reserve(curve.t_grid.size());
  curve.se.reserve(curve.t_grid.size());
  const double n = static_cast<double>(taus.size());
  for (std::int64_t t : curve.t_grid) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::int64_t tau : taus) {
      const double v = static_cast<double>(tv_bound_term(tau, curve.lag, t));
      sum += v;
      sum_sq += v * v;
    }
    const double mean = sum / n;
    const double var = taus.size() > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
    curve.dbar.push_back(mean);
    curve.se.push_back(std::sqrt(var / n));
  }
  return curve;
}

/// Smallest grid t with dbar(t) <= epsilon.
inline std::int64_t tv_mixing_time_upper(const TVBoundCurve& curve, double epsilon) {
  for (std::size_t k = 0; k < curve.t_grid.size(); ++k)
    if (curve.dbar[k] <= epsilon) return curve.t_grid[k];
  throw GridExhaustedError("TV bound never drops to " + std::to_string(epsilon) +
                           " on the grid; extend the simulation horizon");
}

/// Mixing-time bound straight from the records.
inline std::int64_t tv_mixing_time_upper(const std::vector<MeetingRecord>& records, double epsilon) {
  return tv_mixing_time_upper(tv_bound_curve(records, {}, nullptr), epsilon);
}

}  // namespace probit_mix
