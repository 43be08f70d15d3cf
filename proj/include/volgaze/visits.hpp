#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "volgaze/common.hpp"
#include "volgaze/fovea.hpp"
#include "volgaze/gaze.hpp"
#include "volgaze/homography.hpp"
#include "volgaze/stats.hpp"
#include "volgaze/volume.hpp"

namespace volgaze {

/// Scenario 1 is gaze strictly on the organ; scenario 2 additionally counts
/// samples whose foveal disk reaches the organ. on_organ implies peripheral.
struct ScenarioLabel {
  bool on_organ = false;
  bool peripheral = false;
};

/// A gaze sample mapped into reference-image coordinates and labeled.
struct LabeledSample {
  GazeSample sample;
  Vec2 image_pt;          // scene -> image mapped point, sub-pixel
  bool in_image = false;  // nearest pixel falls inside the image bounds
  int slice = -1;         // slice displayed at sample.t
  ScenarioLabel label;
};

/// One contiguous group of organ-directed samples.
struct Visit {
  double start_t = 0;
  double end_t = 0;
  std::size_t first_idx = 0;  // range into the qualifying-sample list
  std::size_t last_idx = 0;
  std::set<int> slices;  // slices with organ-directed gaze during the visit

  double duration() const { return end_t - start_t; }
};

/// Table-style per-session summary for one scenario.
struct SessionStats {
  double mean_s = 0;
  double median_s = 0;
  double max_s = 0;
  double std_s = 0;
  double total_s = 0;
  long n_switches = 0;
  long n_revisits = 0;
  double coverage_pct = 0;
};

/// Gap statistics that define when a new visit starts.
struct JumpThreshold {
  double mu = 0;
  double sigma = 0;
  double k = 1.0;
  double tau = 0;
};

namespace detail {

/// Nearest-pixel convention: the image spans [-0.5, n-0.5) per axis, so the
/// nearest integer pixel of an in-image point is always a valid index.
inline int nearest_pixel(double v) { return static_cast<int>(std::floor(v + 0.5)); }

}  // namespace detail

/// Map every sample through the image->scene homography's inverse, assign the
/// displayed slice, and label both scenarios. Samples mapping outside the
/// image are labeled (false, false) even if their disk would reach it.
inline std::vector<LabeledSample> label_samples(const GazeRecording& rec, const SegMask& mask,
                                                const Homography& image_to_scene,
                                                const FovealModel& fov) {
  const Homography inv = invert_homography(image_to_scene);
  const int nx = mask.nx();
  const int ny = mask.ny();
  const double r = scaled_radius(fov, false);
  std::vector<LabeledSample> out;
  out.reserve(rec.samples.size());
  for (const auto& s : rec.samples) {
    LabeledSample ls;
    ls.sample = s;
    ls.image_pt = apply_homography(inv, s.x, s.y);
    ls.slice = slice_at(rec.trace, s.t);
    const int p = detail::nearest_pixel(ls.image_pt.x);
    const int q = detail::nearest_pixel(ls.image_pt.y);
    ls.in_image = p >= 0 && p < nx && q >= 0 && q < ny;
    if (ls.in_image) {
      ls.label.on_organ = mask.at(p, q, ls.slice);
      bool touches = ls.label.on_organ;
      if (!touches)
        for (const auto& [dp, dq] : foveal_disk(ls.image_pt.x, ls.image_pt.y, r, nx, ny))
          if (mask.at(dp, dq, ls.slice)) {
            touches = true;
            break;
          }
      ls.label.peripheral = touches;
    }
    out.push_back(ls);
  }
  return out;
}

/// Samples that qualify under a scenario (1 = on-organ, 2 = peripheral).
inline std::vector<LabeledSample> qualifying_samples(const std::vector<LabeledSample>& labeled,
                                                     int scenario) {
  if (scenario != 1 && scenario != 2)
    throw InputError("scenario must be 1 or 2, got " + std::to_string(scenario));
  std::vector<LabeledSample> out;
  for (const auto& ls : labeled)
    if (scenario == 1 ? ls.label.on_organ : ls.label.peripheral) out.push_back(ls);
  return out;
}

/// Population gap statistics over consecutive qualifying timestamps;
/// tau = mu + k * sigma.
inline JumpThreshold compute_threshold(const std::vector<double>& qualifying_times, double k) {
  if (qualifying_times.size() < 2)
    throw InputError("jump threshold requires at least 2 qualifying timestamps, got " +
                     std::to_string(qualifying_times.size()));
  std::vector<double> gaps;
  gaps.reserve(qualifying_times.size() - 1);
  for (std::size_t i = 1; i < qualifying_times.size(); ++i) {
    const double g = qualifying_times[i] - qualifying_times[i - 1];
    if (g < 0) throw InputError("qualifying timestamps must be non-decreasing");
    gaps.push_back(g);
  }
  JumpThreshold th;
  th.k = k;
  th.mu = mean(gaps);
  th.sigma = population_std(gaps);
  th.tau = th.mu + k * th.sigma;
  return th;
}

/// Group time-ordered qualifying samples into visits: a gap strictly greater
/// than tau starts a new visit. Each visit records the slices its samples
/// were assigned to. Empty input yields an empty list.
inline std::vector<Visit> segment_visits(const std::vector<LabeledSample>& qualifying,
                                         double tau) {
  std::vector<Visit> visits;
  if (qualifying.empty()) return visits;
  Visit cur;
  cur.start_t = qualifying[0].sample.t;
  cur.end_t = qualifying[0].sample.t;
  cur.first_idx = 0;
  cur.last_idx = 0;
  cur.slices.insert(qualifying[0].slice);
  for (std::size_t i = 1; i < qualifying.size(); ++i) {
    const double t = qualifying[i].sample.t;
    if (t - qualifying[i - 1].sample.t > tau) {
      visits.push_back(std::move(cur));
      cur = Visit{};
      cur.start_t = t;
      cur.first_idx = i;
    }
    cur.end_t = t;
    cur.last_idx = i;
    cur.slices.insert(qualifying[i].slice);
  }
  visits.push_back(std::move(cur));
  return visits;
}

/// Nr: for each visit after the first, the number of its slices already seen
/// in any earlier visit, summed. Counts slice-level revisits, so Nr can
/// exceed the visit count.
inline long count_revisits(const std::vector<Visit>& visits) {
  long nr = 0;
  std::set<int> seen;
  for (const auto& v : visits) {
    if (!seen.empty())
      for (int z : v.slices) nr += seen.count(z) ? 1 : 0;
    seen.insert(v.slices.begin(), v.slices.end());
  }
  return nr;
}

/// Duration statistics (population std), switch count N, revisit count Nr.
/// Coverage is computed separately and left at 0 here.
inline SessionStats visit_stats(const std::vector<Visit>& visits) {
  if (visits.empty()) throw InputError("visit statistics require at least one visit");
  std::vector<double> durations;
  durations.reserve(visits.size());
  for (const auto& v : visits) durations.push_back(v.duration());
  SessionStats st;
  st.mean_s = mean(durations);
  st.median_s = median(durations);
  st.max_s = *std::max_element(durations.begin(), durations.end());
  st.std_s = population_std(durations);
  double total = 0;
  for (double d : durations) total += d;
  st.total_s = total;
  st.n_switches = static_cast<long>(visits.size());
  st.n_revisits = count_revisits(visits);
  return st;
}

/// The exact set of mask foreground voxels (linear indices) touched by the
/// foveal disks of samples qualifying under the scenario, on the slices
/// displayed at sample time. With point_only_s1, scenario 1 marks only the
/// gazed pixel itself.
inline std::set<std::size_t> covered_voxels(const std::vector<LabeledSample>& labeled,
                                            const SegMask& mask, const FovealModel& fov,
                                            int scenario, bool point_only_s1 = false) {
  if (scenario != 1 && scenario != 2)
    throw InputError("scenario must be 1 or 2, got " + std::to_string(scenario));
  const int nx = mask.nx();
  const int ny = mask.ny();
  const double r = scaled_radius(fov, false);
  const bool point_only = point_only_s1 && scenario == 1;
  std::set<std::size_t> covered;
  for (const auto& ls : labeled) {
    if (!(scenario == 1 ? ls.label.on_organ : ls.label.peripheral)) continue;
    if (!ls.in_image) continue;
    if (point_only) {
      const int p = detail::nearest_pixel(ls.image_pt.x);
      const int q = detail::nearest_pixel(ls.image_pt.y);
      if (mask.at(p, q, ls.slice)) covered.insert(mask.index(p, q, ls.slice));
      continue;
    }
    for (const auto& [p, q] : foveal_disk(ls.image_pt.x, ls.image_pt.y, r, nx, ny))
      if (mask.at(p, q, ls.slice)) covered.insert(mask.index(p, q, ls.slice));
  }
  return covered;
}

/// Percent of mask foreground voxels in the covered set.
inline double coverage(const std::vector<LabeledSample>& labeled, const SegMask& mask,
                       const FovealModel& fov, int scenario, bool point_only_s1 = false) {
  const std::size_t fg = mask.foreground_count();
  if (fg == 0) throw InputError("coverage requires a mask with at least one foreground voxel");
  const auto covered = covered_voxels(labeled, mask, fov, scenario, point_only_s1);
  return 100.0 * static_cast<double>(covered.size()) / static_cast<double>(fg);
}

/// Full per-scenario summary for one labeled session: threshold from the
/// scenario's own qualifying timestamps, segmentation, duration statistics,
/// and volumetric coverage. A session with no qualifying samples yields an
/// all-zero row (zero visits) rather than an error.
inline SessionStats scenario_stats(const std::vector<LabeledSample>& labeled,
                                   const SegMask& mask, const FovealModel& fov, double jump_k,
                                   int scenario, bool point_only_s1 = false) {
  const auto qual = qualifying_samples(labeled, scenario);
  if (qual.empty()) return SessionStats{};
  std::vector<Visit> visits;
  if (qual.size() == 1) {
    visits = segment_visits(qual, 0.0);
  } else {
    std::vector<double> times;
    times.reserve(qual.size());
    for (const auto& ls : qual) times.push_back(ls.sample.t);
    visits = segment_visits(qual, compute_threshold(times, jump_k).tau);
  }
  SessionStats st = visit_stats(visits);
  st.coverage_pct = coverage(labeled, mask, fov, scenario, point_only_s1);
  return st;
}

/// Cross-case summary: arithmetic means of per-case means, medians, and
/// switch counts.
struct AggregateStats {
  double mean_of_means_s = 0;
  double mean_of_medians_s = 0;
  double mean_n_switches = 0;
};

inline AggregateStats aggregate(const std::vector<SessionStats>& rows) {
  if (rows.empty()) throw InputError("aggregate requires at least one session row");
  AggregateStats a;
  for (const auto& r : rows) {
    a.mean_of_means_s += r.mean_s;
    a.mean_of_medians_s += r.median_s;
    a.mean_n_switches += static_cast<double>(r.n_switches);
  }
  const auto n = static_cast<double>(rows.size());
  a.mean_of_means_s /= n;
  a.mean_of_medians_s /= n;
  a.mean_n_switches /= n;
  return a;
}

}  // namespace volgaze
