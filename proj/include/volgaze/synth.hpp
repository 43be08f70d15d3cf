#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "volgaze/common.hpp"
#include "volgaze/fovea.hpp"
#include "volgaze/gaze.hpp"
#include "volgaze/volume.hpp"

namespace volgaze {

enum class Archetype { driller, scanner, hybrid };

inline std::string archetype_name(Archetype a) {
  switch (a) {
    case Archetype::driller: return "driller";
    case Archetype::scanner: return "scanner";
    default: return "hybrid";
  }
}

inline Archetype archetype_from_name(const std::string& s) {
  if (s == "driller") return Archetype::driller;
  if (s == "scanner") return Archetype::scanner;
  if (s == "hybrid") return Archetype::hybrid;
  throw InputError("unknown archetype: " + s + " (expected driller, scanner, or hybrid)");
}

/// One planned gaze sample. Coordinates are scene pixels, which equal image
/// pixels because synthetic sessions use the identity homography.
struct PlannedSample {
  double t = 0;
  double x = 0;
  double y = 0;
  int slice = 0;
  bool peripheral_only = false;  // planted near, but not on, the organ
};

/// Generator recipe. When `plan` is empty an archetype builder fills it.
struct SynthSpec {
  std::array<int, 3> dims{96, 96, 24};
  std::array<double, 3> spacing{1.0, 1.0, 3.0};
  std::array<double, 3> organ_center{48.0, 48.0, 12.0};
  std::array<double, 3> organ_radii{26.0, 20.0, 8.0};
  Archetype archetype = Archetype::driller;
  std::vector<std::vector<PlannedSample>> plan;  // per-visit absolute-time samples
  int n_visits = 4;
  int samples_per_visit = 96;
  double inter_visit_gap_s = 10.0;   // dyadic so timestamps stay exact
  double intra_dt_s = 1.0 / 32.0;    // dyadic sample period within visits
  double noise_sigma = 0.0;          // isotropic scene-px noise, truncated at 3 sigma
  std::uint64_t seed = 0;
  std::string case_id = "synth-case";
  std::string reader = "SYN";
};

/// Planted truth for one visit under one scenario.
struct GtVisit {
  double start_t = 0;
  double end_t = 0;
  std::set<int> slices;
  std::size_t n_samples = 0;
};

/// Exact expected pipeline output, per scenario (index 0 = scenario 1).
struct GroundTruth {
  std::string archetype;
  std::array<std::vector<GtVisit>, 2> visits;
  std::array<long, 2> n_revisits{0, 0};
  std::array<std::set<std::size_t>, 2> covered;  // linear mask-voxel indices
  std::array<double, 2> coverage_pct{0.0, 0.0};
};

struct SynthSession {
  Volume vol;
  SegMask mask;
  GazeRecording rec;
  GroundTruth gt;
  FovealModel fov;  // the model ground truth was computed under
};

namespace detail {

inline bool inside_ellipsoid(const SynthSpec& s, int x, int y, int z) {
  const double dx = (x - s.organ_center[0]) / s.organ_radii[0];
  const double dy = (y - s.organ_center[1]) / s.organ_radii[1];
  const double dz = (z - s.organ_center[2]) / s.organ_radii[2];
  return dx * dx + dy * dy + dz * dz <= 1.0;
}

/// In-plane semi-axis shrink factor of the ellipsoid at slice z.
inline double plane_fraction(const SynthSpec& s, int z) {
  const double dz = (z - s.organ_center[2]) / s.organ_radii[2];
  return std::sqrt(std::max(0.0, 1.0 - dz * dz));
}

/// Snap a proposed in-plane point to an integer pixel strictly inside the
/// organ at slice z, stepping toward the organ center if needed.
inline void pull_onto_organ(const SynthSpec& s, int z, double& x, double& y) {
  int px = static_cast<int>(std::lround(x));
  int py = static_cast<int>(std::lround(y));
  const int cx = static_cast<int>(std::lround(s.organ_center[0]));
  const int cy = static_cast<int>(std::lround(s.organ_center[1]));
  for (int step = 0; step < 1024 && !inside_ellipsoid(s, px, py, z); ++step) {
    if (px != cx) px += px < cx ? 1 : -1;
    if (py != cy) py += py < cy ? 1 : -1;
    if (px == cx && py == cy) break;
  }
  x = px;
  y = py;
}

/// Independent per-sample labels: nearest-pixel organ test and a full
/// per-voxel slice scan for foveal reach (no shared geometry helpers).
struct SynthLabel {
  bool on_organ = false;
  bool peripheral = false;
};

inline SynthLabel synth_label(const SegMask& mask, double x, double y, int slice, double r) {
  SynthLabel lab;
  const int p = static_cast<int>(std::floor(x + 0.5));
  const int q = static_cast<int>(std::floor(y + 0.5));
  if (p < 0 || p >= mask.nx() || q < 0 || q >= mask.ny()) return lab;
  lab.on_organ = mask.at(p, q, slice);
  if (lab.on_organ) {
    lab.peripheral = true;
    return lab;
  }
  const double r2 = r * r;
  for (int vy = 0; vy < mask.ny(); ++vy)
    for (int vx = 0; vx < mask.nx(); ++vx) {
      if (!mask.at(vx, vy, slice)) continue;
      const double dx = vx - x;
      const double dy = vy - y;
      if (dx * dx + dy * dy <= r2) {
        lab.peripheral = true;
        return lab;
      }
    }
  return lab;
}

/// All mask voxels on the sample's slice within the foveal radius, as linear
/// indices — the brute-force coverage scan.
inline void synth_covered_voxels(const SegMask& mask, double x, double y, int slice, double r,
                                 std::set<std::size_t>& out) {
  const double r2 = r * r;
  for (int vy = 0; vy < mask.ny(); ++vy)
    for (int vx = 0; vx < mask.nx(); ++vx) {
      if (!mask.at(vx, vy, slice)) continue;
      const double dx = vx - x;
      const double dy = vy - y;
      if (dx * dx + dy * dy <= r2) out.insert(mask.index(vx, vy, slice));
    }
}

}  // namespace detail

/// Build the default visit plans for an archetype. Drillers hold an in-plane
/// anchor and sweep slices fast; scanners raster the organ plane and change
/// slice rarely; hybrids alternate. All timestamps are dyadic multiples.
inline std::vector<std::vector<PlannedSample>> build_archetype_plan(const SynthSpec& spec,
                                                                    Rng& rng) {
  const double cx = spec.organ_center[0];
  const double cy = spec.organ_center[1];
  const int cz = static_cast<int>(std::lround(spec.organ_center[2]));
  const int zspan = std::max(1, static_cast<int>(std::floor(spec.organ_radii[2] * 0.7)));
  const double margin = 3.0 * spec.noise_sigma + 2.0;

  std::vector<std::vector<PlannedSample>> plan;
  double t = 0.0;
  for (int v = 0; v < spec.n_visits; ++v) {
    const bool drill = spec.archetype == Archetype::driller ||
                       (spec.archetype == Archetype::hybrid && v % 2 == 0);
    std::vector<PlannedSample> visit;
    visit.reserve(spec.samples_per_visit);
    const double anchor_jx = std::floor(uniform_range(rng, -4.0, 5.0));
    const double anchor_jy = std::floor(uniform_range(rng, -4.0, 5.0));
    int scan_z = cz + ((v % 3) - 1);  // scanners hold one near-center slice
    for (int i = 0; i < spec.samples_per_visit; ++i) {
      PlannedSample ps;
      ps.t = t + i * spec.intra_dt_s;
      if (drill) {
        // Triangular slice sweep across the organ depth, one full cycle.
        const int period = std::max(2, spec.samples_per_visit);
        const double phase = static_cast<double>(i % period) / period;
        const double tri = phase < 0.5 ? phase * 2.0 : 2.0 - phase * 2.0;
        ps.slice = cz - zspan + static_cast<int>(std::lround(tri * 2.0 * zspan));
        const double ax =
            std::max(1.0, spec.organ_radii[0] * detail::plane_fraction(spec, ps.slice) - margin);
        const double ay =
            std::max(1.0, spec.organ_radii[1] * detail::plane_fraction(spec, ps.slice) - margin);
        double jx = truncated_normal(rng, 4.0) + anchor_jx;
        double jy = truncated_normal(rng, 4.0) + anchor_jy;
        // Keep the jitter jointly inside the margin-shrunk plane ellipse.
        const double e = (jx / ax) * (jx / ax) + (jy / ay) * (jy / ay);
        if (e > 1.0) {
          jx /= std::sqrt(e);
          jy /= std::sqrt(e);
        }
        ps.x = cx + jx;
        ps.y = cy + jy;
      } else {
        // Serpentine raster over the slice's in-plane ellipse; at most one
        // slice step near the middle of the visit.
        if (i == spec.samples_per_visit / 2) scan_z += 1;
        ps.slice = scan_z;
        const double ax =
            std::max(1.0, spec.organ_radii[0] * detail::plane_fraction(spec, ps.slice) - margin);
        const double ay =
            std::max(1.0, spec.organ_radii[1] * detail::plane_fraction(spec, ps.slice) - margin);
        const int rows = 6;
        const int per_row = std::max(1, spec.samples_per_visit / rows);
        const int row = std::min(rows - 1, i / per_row);
        const int col = i % per_row;
        const double fy = rows > 1 ? static_cast<double>(row) / (rows - 1) : 0.5;
        double fx = per_row > 1 ? static_cast<double>(col) / (per_row - 1) : 0.5;
        if (row % 2 == 1) fx = 1.0 - fx;
        const double half_w =
            ax * std::sqrt(std::max(0.05, 1.0 - (2.0 * fy - 1.0) * (2.0 * fy - 1.0)));
        ps.x = cx + (2.0 * fx - 1.0) * half_w;
        ps.y = cy + (2.0 * fy - 1.0) * ay;
      }
      detail::pull_onto_organ(spec, ps.slice, ps.x, ps.y);
      visit.push_back(ps);
    }
    plan.push_back(std::move(visit));
    t += (spec.samples_per_visit - 1) * spec.intra_dt_s + spec.inter_visit_gap_s;
  }
  return plan;
}

/// Deterministically generate a synthetic session with exact ground truth.
/// The emitted gaze is what the ground truth is computed from (noise
/// included), timestamps are dyadic, and the homography is the identity, so a
/// pipeline run reproduces the truth bit-for-bit.
inline SynthSession generate(const SynthSpec& spec) {
  for (int d : spec.dims)
    if (d < 4) throw InputError("synthetic volume dims must each be at least 4");
  for (int a = 0; a < 3; ++a) {
    if (spec.organ_radii[a] < 1.0) throw InputError("organ radii must each be at least 1");
    if (spec.organ_center[a] - spec.organ_radii[a] <= 0.0 ||
        spec.organ_center[a] + spec.organ_radii[a] >= spec.dims[a] - 1.0)
      throw InputError("organ ellipsoid must lie strictly inside the volume");
  }

  SynthSession out;
  out.fov = make_foveal_model();
  const double r = scaled_radius(out.fov, false);
  const int nx = spec.dims[0], ny = spec.dims[1], nz = spec.dims[2];

  // Volume: smooth gradient plus organ contrast, plus deterministic texture.
  out.vol.dims = spec.dims;
  out.vol.spacing = spec.spacing;
  out.vol.voxels.resize(static_cast<std::size_t>(nx) * ny * nz);
  out.mask.dims = spec.dims;
  out.mask.labels.assign(out.vol.voxels.size(), 0);
  Rng tex_rng(derive_seed(spec.seed, 0x7e78));
  std::vector<float> texture(out.vol.voxels.size());
  for (auto& tv : texture) tv = static_cast<float>(uniform_range(tex_rng, 0.0, 25.0));
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        const std::size_t i = out.vol.index(x, y, z);
        const bool organ = detail::inside_ellipsoid(spec, x, y, z);
        out.vol.voxels[i] =
            static_cast<float>(0.25 * x + 0.35 * y + 1.5 * z + (organ ? 90.0 : 0.0)) + texture[i];
        out.mask.labels[i] = organ ? 1 : 0;
      }
  if (out.mask.foreground_count() == 0)
    throw InputError("organ ellipsoid produced an empty mask");

  // Plan, then noise.
  auto plan = spec.plan;
  if (plan.empty() && spec.n_visits > 0) {
    Rng plan_rng(derive_seed(spec.seed, 0x9a11));
    plan = build_archetype_plan(spec, plan_rng);
  }
  Rng noise_rng(derive_seed(spec.seed, 0x401e));
  for (auto& visit : plan)
    for (auto& ps : visit) {
      if (spec.noise_sigma > 0) {
        ps.x += truncated_normal(noise_rng, spec.noise_sigma);
        ps.y += truncated_normal(noise_rng, spec.noise_sigma);
      }
      if (ps.x < 0.0 || ps.x > nx - 1.0 || ps.y < 0.0 || ps.y > ny - 1.0)
        throw InputError("infeasible synthetic plan: gaze path exits screen bounds");
      if (ps.slice < 0 || ps.slice >= nz)
        throw InputError("infeasible synthetic plan: slice path exits the volume");
    }

  // Emit recording: samples in time order plus midpoint slice-change events.
  out.rec.meta.reader = spec.reader;
  out.rec.meta.case_id = spec.case_id;
  out.rec.meta.screen_w = nx;
  out.rec.meta.screen_h = ny;
  std::vector<const PlannedSample*> flat;
  for (const auto& visit : plan)
    for (const auto& ps : visit) flat.push_back(&ps);
  for (std::size_t i = 1; i < flat.size(); ++i)
    if (flat[i]->t <= flat[i - 1]->t)
      throw InputError("infeasible synthetic plan: timestamps must strictly increase");
  for (const auto* ps : flat) out.rec.samples.push_back({ps->t, ps->x, ps->y, -1});
  if (!flat.empty()) {
    out.rec.trace.events.push_back({0.0, flat[0]->slice});
    for (std::size_t i = 1; i < flat.size(); ++i)
      if (flat[i]->slice != flat[i - 1]->slice)
        out.rec.trace.events.push_back({0.5 * (flat[i - 1]->t + flat[i]->t), flat[i]->slice});
  }

  // Ground truth from the emitted (noised) samples, per scenario.
  out.gt.archetype = archetype_name(spec.archetype);
  for (int sc = 0; sc < 2; ++sc) {
    std::vector<double> qual_times;
    for (const auto& visit : plan) {
      GtVisit gv;
      bool any = false;
      for (const auto& ps : visit) {
        const auto lab = detail::synth_label(out.mask, ps.x, ps.y, ps.slice, r);
        const bool q = sc == 0 ? lab.on_organ : lab.peripheral;
        if (!q) continue;
        if (!any) gv.start_t = ps.t;
        gv.end_t = ps.t;
        gv.slices.insert(ps.slice);
        ++gv.n_samples;
        any = true;
        qual_times.push_back(ps.t);
        detail::synth_covered_voxels(out.mask, ps.x, ps.y, ps.slice, r, out.gt.covered[sc]);
      }
      if (any) out.gt.visits[sc].push_back(std::move(gv));
    }
    out.gt.coverage_pct[sc] = 100.0 * static_cast<double>(out.gt.covered[sc].size()) /
                              static_cast<double>(out.mask.foreground_count());
    std::set<int> seen;
    for (const auto& gv : out.gt.visits[sc]) {
      if (!seen.empty())
        for (int z : gv.slices) out.gt.n_revisits[sc] += seen.count(z) ? 1 : 0;
      seen.insert(gv.slices.begin(), gv.slices.end());
    }

    // Recoverability: the planted grouping must be what any jump threshold
    // with k in [0, 3] recovers from the qualifying timestamps.
    if (qual_times.size() >= 2 && out.gt.visits[sc].size() >= 1) {
      double max_intra = 0.0, min_inter = std::numeric_limits<double>::infinity();
      std::vector<double> gaps;
      std::size_t pos = 0;
      for (const auto& gv : out.gt.visits[sc]) {
        for (std::size_t i = 0; i < gv.n_samples; ++i, ++pos) {
          if (pos == 0) continue;
          const double g = qual_times[pos] - qual_times[pos - 1];
          gaps.push_back(g);
          if (i == 0)
            min_inter = std::min(min_inter, g);
          else
            max_intra = std::max(max_intra, g);
        }
      }
      if (!gaps.empty() && out.gt.visits[sc].size() > 1) {
        double mu = 0;
        for (double g : gaps) mu += g;
        mu /= static_cast<double>(gaps.size());
        double var = 0;
        for (double g : gaps) var += (g - mu) * (g - mu);
        const double sigma = std::sqrt(var / static_cast<double>(gaps.size()));
        if (max_intra > mu)
          throw InputError("infeasible synthetic plan: intra-visit gap exceeds the k=0 threshold");
        if (mu + 3.0 * sigma >= min_inter)
          throw InputError("infeasible synthetic plan: inter-visit gap inside the k=3 threshold");
        if (max_intra > 0 && min_inter / max_intra < 10.0)
          throw InputError("infeasible synthetic plan: visit gaps must exceed intra gaps 10x");
      }
    }
  }
  return out;
}

struct SessionPaths {
  std::string gaze_csv;
  std::string trace_csv;
  std::string volume_json;
  std::string mask_json;
};

/// Write the session in the pipeline's input formats. Doubles use lossless
/// formatting so a reload reproduces identical values.
inline SessionPaths write_session(const std::string& dir, const SynthSession& s) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  const std::string base = (fs::path(dir) / s.rec.meta.case_id).string();
  SessionPaths paths;
  paths.gaze_csv = base + "_gaze.csv";
  paths.trace_csv = base + "_trace.csv";
  paths.volume_json = base + "_volume.json";
  paths.mask_json = base + "_mask.json";

  {
    std::ofstream g(paths.gaze_csv, std::ios::binary);
    if (!g) throw InputError("cannot write gaze CSV: " + paths.gaze_csv);
    g << "t,x,y\n";
    for (const auto& smp : s.rec.samples)
      g << format_double(smp.t) << ',' << format_double(smp.x) << ',' << format_double(smp.y)
        << '\n';
  }
  {
    std::ofstream tr(paths.trace_csv, std::ios::binary);
    if (!tr) throw InputError("cannot write trace CSV: " + paths.trace_csv);
    tr << "t,z\n";
    for (const auto& ev : s.rec.trace.events)
      tr << format_double(ev.t) << ',' << ev.z << '\n';
  }
  save_volume_raw(s.vol, paths.volume_json, "f32");
  save_mask_raw(s.mask, paths.mask_json);
  return paths;
}

}  // namespace volgaze
