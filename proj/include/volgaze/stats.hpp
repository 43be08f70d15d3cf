#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "volgaze/common.hpp"

namespace volgaze {

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw InputError("mean of empty sequence");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Median; for an even count the mean of the two middle values.
inline double median(std::vector<double> v) {
  if (v.empty()) throw InputError("median of empty sequence");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Population standard deviation (divides by n, not n-1).
inline double population_std(const std::vector<double>& v) {
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

/// Linear-interpolated quantile (the "type 7" convention): for p in [0, 1],
/// index h = p * (n - 1) interpolated between the two nearest order statistics.
inline double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw InputError("quantile of empty sequence");
  if (p < 0 || p > 1) throw InputError("quantile probability must be in [0, 1]");
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Trapezoidal integral over uniformly spaced values (unit spacing).
inline double trapezoid_unit(const std::vector<double>& y) {
  if (y.size() < 2) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) s += 0.5 * (y[i] + y[i + 1]);
  return s;
}

}  // namespace volgaze
