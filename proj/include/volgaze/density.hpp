#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "volgaze/common.hpp"
#include "volgaze/stats.hpp"
#include "volgaze/visits.hpp"

namespace volgaze {

/// Gaussian kernel density of gaze over slice indices within one time window.
/// Degenerate windows (every sample on one slice) carry no curve and are
/// rendered as a vertical line; empty windows carry nothing.
struct DensityProfile {
  double t_start = 0;
  double t_end = 0;
  std::vector<double> slice_axis;  // grid over slice indices, 0..nz-1
  std::vector<double> density;     // unit trapezoidal mass when a curve exists
  bool degenerate = false;         // all samples share one slice
  bool empty = false;              // no qualifying samples in the window
  int degenerate_slice = -1;       // the shared slice when degenerate
  std::size_t n_samples = 0;
  double bandwidth = 0;            // kernel bandwidth actually used (slices)
};

namespace detail {

/// Silverman's rule over the sample slice indices, floored at 0.5 slices:
/// h = 0.9 * min(sigma, IQR / 1.34) * n^(-1/5).
inline double silverman_bandwidth(const std::vector<double>& xs) {
  const double sigma = population_std(xs);
  const double iqr = quantile(xs, 0.75) - quantile(xs, 0.25);
  const double spread = std::min(sigma, iqr / 1.34);
  const double h =
      0.9 * spread * std::pow(static_cast<double>(xs.size()), -0.2);
  return std::max(h, 0.5);
}

}  // namespace detail

/// Per-window Gaussian KDE over the slice indices of the given qualifying
/// samples. Windows must be ordered and non-overlapping; samples are assigned
/// by t_start <= t <= t_end. A non-positive bandwidth requests Silverman's
/// rule per window. Non-degenerate curves are renormalized to exact unit
/// trapezoidal mass over the grid.
inline std::vector<DensityProfile> density_profile(
    const std::vector<LabeledSample>& qualifying,
    const std::vector<std::pair<double, double>>& windows, int nz, double bandwidth = 0) {
  if (nz < 1) throw InputError("density grid requires at least one slice");
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].second < windows[i].first)
      throw InputError("density window " + std::to_string(i) + " ends before it starts");
    if (i > 0 && windows[i].first < windows[i - 1].second)
      throw InputError("density windows must be ordered and non-overlapping (window " +
                       std::to_string(i) + ")");
  }

  std::vector<DensityProfile> out;
  out.reserve(windows.size());
  for (const auto& [a, b] : windows) {
    DensityProfile prof;
    prof.t_start = a;
    prof.t_end = b;
    std::vector<double> xs;
    for (const auto& ls : qualifying)
      if (ls.sample.t >= a && ls.sample.t <= b) xs.push_back(static_cast<double>(ls.slice));
    prof.n_samples = xs.size();
    if (xs.empty()) {
      prof.empty = true;
      out.push_back(std::move(prof));
      continue;
    }
    const bool all_same = std::all_of(xs.begin(), xs.end(),
                                      [&](double v) { return v == xs.front(); });
    if (all_same) {
      prof.degenerate = true;
      prof.degenerate_slice = static_cast<int>(xs.front());
      out.push_back(std::move(prof));
      continue;
    }
    const double h = bandwidth > 0 ? bandwidth : detail::silverman_bandwidth(xs);
    prof.bandwidth = h;
    prof.slice_axis.resize(static_cast<std::size_t>(nz));
    prof.density.resize(static_cast<std::size_t>(nz));
    const double norm = 1.0 / (static_cast<double>(xs.size()) * h * std::sqrt(2.0 * kPi));
    for (int g = 0; g < nz; ++g) {
      prof.slice_axis[g] = g;
      double acc = 0;
      for (double x : xs) {
        const double u = (g - x) / h;
        acc += std::exp(-0.5 * u * u);
      }
      prof.density[g] = norm * acc;
    }
    const double mass = trapezoid_unit(prof.density);
    if (mass > 0)
      for (auto& d : prof.density) d /= mass;
    out.push_back(std::move(prof));
  }
  return out;
}

/// Visit time spans, in order — the default density windows.
inline std::vector<std::pair<double, double>> windows_from_visits(
    const std::vector<Visit>& visits) {
  std::vector<std::pair<double, double>> w;
  w.reserve(visits.size());
  for (const auto& v : visits) w.emplace_back(v.start_t, v.end_t);
  return w;
}

/// Depth-scroll versus in-plane search behaviour, duration-weighted across
/// visits. drill_index compares normalized scroll rate against normalized
/// dispersion; a zero-dispersion scroller gets an infinity sentinel.
struct StrategyMetrics {
  double scroll_rate = 0;  // mean absolute slice change per second
  double dispersion = 0;   // RMS gaze distance from visit centroid, image px
  double drill_index = 0;
  bool drill_infinite = false;
};

inline StrategyMetrics strategy_metrics(const std::vector<Visit>& visits,
                                        const std::vector<LabeledSample>& qualifying,
                                        int image_w, int nz) {
  if (image_w < 1 || nz < 1) throw InputError("strategy metrics need positive image width and depth");
  double weight_sum = 0;
  double scroll_acc = 0;
  double disp_acc = 0;
  for (const auto& v : visits) {
    const std::size_t n = v.last_idx - v.first_idx + 1;
    if (n < 2) continue;
    const double dur = v.duration();
    if (dur <= 0) continue;
    double travel = 0;
    double cx = 0, cy = 0;
    for (std::size_t i = v.first_idx; i <= v.last_idx; ++i) {
      if (i > v.first_idx)
        travel += std::abs(qualifying[i].slice - qualifying[i - 1].slice);
      cx += qualifying[i].image_pt.x;
      cy += qualifying[i].image_pt.y;
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);
    double sq = 0;
    for (std::size_t i = v.first_idx; i <= v.last_idx; ++i) {
      const double dx = qualifying[i].image_pt.x - cx;
      const double dy = qualifying[i].image_pt.y - cy;
      sq += dx * dx + dy * dy;
    }
    const double rms = std::sqrt(sq / static_cast<double>(n));
    weight_sum += dur;
    scroll_acc += dur * (travel / dur);
    disp_acc += dur * rms;
  }
  if (weight_sum <= 0)
    throw InputError("strategy metrics require at least one visit with 2 or more samples");
  StrategyMetrics m;
  m.scroll_rate = scroll_acc / weight_sum;
  m.dispersion = disp_acc / weight_sum;
  const double num = m.scroll_rate / static_cast<double>(nz);
  const double den = m.dispersion / static_cast<double>(image_w);
  if (num == 0) {
    m.drill_index = 0;
  } else if (den == 0) {
    m.drill_index = std::numeric_limits<double>::infinity();
    m.drill_infinite = true;
  } else {
    m.drill_index = num / std::max(den, 1e-9);
  }
  return m;
}

}  // namespace volgaze
