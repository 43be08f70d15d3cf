#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "volgaze/align.hpp"
#include "volgaze/common.hpp"
#include "volgaze/config.hpp"
#include "volgaze/density.hpp"
#include "volgaze/fovea.hpp"
#include "volgaze/gaze.hpp"
#include "volgaze/png_io.hpp"
#include "volgaze/report.hpp"
#include "volgaze/svg.hpp"
#include "volgaze/visits.hpp"
#include "volgaze/volume.hpp"

namespace volgaze {

/// Inputs for one case. `scene_path` empty means gaze is already in image
/// coordinates (identity homography); `slice_spec` is "auto" or a slice index
/// naming the reference slice the scene is aligned against.
struct CaseInputs {
  std::string id;
  std::string reader;
  std::string gaze_csv;
  std::string trace_csv;
  std::string volume_path;
  std::string mask_path;
  std::string scene_path;
  std::string slice_spec = "auto";
};

struct RunConfig {
  std::vector<CaseInputs> cases;
  double theta = 1.5;
  double distance_cm = 60.0;
  double ppc = 38.4;
  double scale = 0.2667;
  double jump_k = 1.0;
  double ransac_px = 3.0;
  double bandwidth = 0.0;  // 0 requests Silverman's rule
  std::uint64_t seed = 0;
  std::vector<int> scenarios = {1, 2};
  bool coverage_point_only = false;
  int jobs = 1;
  std::string out_dir = "volgaze-out";
  std::vector<std::pair<double, double>> windows;  // empty: windows follow visits
};

/// Parse "a:b,c:d" into ordered density windows.
inline std::vector<std::pair<double, double>> parse_windows(const std::string& spec) {
  std::vector<std::pair<double, double>> out;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    auto comma = spec.find(',', pos);
    if (comma == std::string::npos) comma = spec.size();
    const std::string item = spec.substr(pos, comma - pos);
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw InputError("window spec '" + item + "' must look like start:end");
    out.emplace_back(config_double("windows", item.substr(0, colon)),
                     config_double("windows", item.substr(colon + 1)));
    pos = comma + 1;
  }
  return out;
}

inline std::vector<int> parse_scenarios(const std::string& spec) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    auto comma = spec.find(',', pos);
    if (comma == std::string::npos) comma = spec.size();
    const long v = config_long("scenarios", spec.substr(pos, comma - pos));
    if (v != 1 && v != 2) throw InputError("scenarios must list 1 and/or 2");
    if (std::find(out.begin(), out.end(), static_cast<int>(v)) == out.end())
      out.push_back(static_cast<int>(v));
    pos = comma + 1;
  }
  if (out.empty()) throw InputError("scenario list is empty");
  std::sort(out.begin(), out.end());
  return out;
}

/// Lift a parsed config file into a RunConfig (CLI flags override afterwards).
inline RunConfig config_to_run(const ConfigFile& file) {
  RunConfig cfg;
  for (const auto& [key, value] : file.globals) {
    if (key == "theta") cfg.theta = config_double(key, value);
    else if (key == "distance_cm") cfg.distance_cm = config_double(key, value);
    else if (key == "ppc") cfg.ppc = config_double(key, value);
    else if (key == "scale") cfg.scale = config_double(key, value);
    else if (key == "jump_k") cfg.jump_k = config_double(key, value);
    else if (key == "ransac_px") cfg.ransac_px = config_double(key, value);
    else if (key == "bandwidth") cfg.bandwidth = config_double(key, value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(config_long(key, value));
    else if (key == "scenarios") cfg.scenarios = parse_scenarios(value);
    else if (key == "coverage_point_only") cfg.coverage_point_only = value == "true" || value == "1";
    else if (key == "jobs") cfg.jobs = static_cast<int>(config_long(key, value));
    else if (key == "out") cfg.out_dir = value;
    else if (key == "windows") cfg.windows = parse_windows(value);
    else throw InputError("unknown config key: " + key);
  }
  for (const auto& [id, keys] : file.cases) {
    CaseInputs ci;
    ci.id = id;
    for (const auto& [key, value] : keys) {
      if (key == "gaze") ci.gaze_csv = value;
      else if (key == "trace") ci.trace_csv = value;
      else if (key == "volume") ci.volume_path = value;
      else if (key == "mask") ci.mask_path = value;
      else if (key == "scene") ci.scene_path = value;
      else if (key == "slice") ci.slice_spec = value;
      else if (key == "reader") ci.reader = value;
      else throw InputError("unknown config key in [case." + id + "]: " + key);
    }
    cfg.cases.push_back(std::move(ci));
  }
  return cfg;
}

namespace detail {

inline void require_file(const std::string& role, const std::string& path,
                         const std::string& case_id) {
  if (path.empty())
    throw InputError("case '" + case_id + "': missing required " + role + " path");
  if (!std::filesystem::exists(path))
    throw InputError("case '" + case_id + "': " + role + " file not found: " + path);
}

}  // namespace detail

/// What one case run produced, including every file written (for cleanup).
struct CaseOutcome {
  CaseReport report;
  std::vector<std::string> written;
};

/// Resolve the image->scene homography for a case: identity when no scene
/// capture is given, otherwise ORB alignment against the named or inferred
/// reference slice.
inline Homography resolve_homography(const CaseInputs& ci, const Volume& vol,
                                     const RunConfig& cfg, std::uint64_t case_seed) {
  if (ci.scene_path.empty()) return Homography::identity();
  const Image8 scene = read_image_gray8(ci.scene_path);
  if (ci.slice_spec == "auto") {
    std::vector<int> candidates(static_cast<std::size_t>(vol.dims[2]));
    for (int z = 0; z < vol.dims[2]; ++z) candidates[z] = z;
    return infer_slice(scene, vol, candidates, cfg.ransac_px, case_seed).h;
  }
  const long z = config_long("slice", ci.slice_spec);
  if (z < 0 || z >= vol.dims[2])
    throw InputError("case '" + ci.id + "': reference slice out of range: " + ci.slice_spec);
  return align_scene(vol.slice_gray8(static_cast<int>(z)), scene, cfg.ransac_px, case_seed);
}

/// Run the full pipeline for one case and write its per-case outputs
/// (stats JSON, density CSV, density SVG) into cfg.out_dir.
inline CaseOutcome run_case(const RunConfig& cfg, const CaseInputs& ci,
                            std::uint64_t case_seed) {
  namespace fs = std::filesystem;
  detail::require_file("gaze", ci.gaze_csv, ci.id);
  detail::require_file("trace", ci.trace_csv, ci.id);
  detail::require_file("volume", ci.volume_path, ci.id);
  detail::require_file("mask", ci.mask_path, ci.id);
  if (!ci.scene_path.empty()) detail::require_file("scene", ci.scene_path, ci.id);

  const Volume vol = load_volume(ci.volume_path);
  const SegMask mask = load_mask(ci.mask_path, vol);
  const FovealModel fov = make_foveal_model(cfg.theta, cfg.distance_cm, cfg.ppc, cfg.scale);

  GazeRecording rec;
  rec.samples = parse_gaze_csv(ci.gaze_csv);
  rec.meta.reader = ci.reader;
  rec.meta.case_id = ci.id;

  std::vector<LabeledSample> labeled;
  if (!rec.samples.empty()) {
    rec.trace = parse_slice_trace(ci.trace_csv, vol.dims[2]);
    const Homography h = resolve_homography(ci, vol, cfg, case_seed);
    labeled = label_samples(rec, mask, h, fov);
  }

  CaseOutcome outcome;
  outcome.report.case_id = ci.id;
  outcome.report.reader = ci.reader;
  for (int sc : cfg.scenarios)
    outcome.report.scenarios[sc] =
        scenario_stats(labeled, mask, fov, cfg.jump_k, sc, cfg.coverage_point_only);

  // Density and strategy follow the widest requested scenario.
  const int density_sc = cfg.scenarios.back();
  const auto qual = qualifying_samples(labeled, density_sc);
  std::vector<Visit> visits;
  if (qual.size() == 1) {
    visits = segment_visits(qual, 0.0);
  } else if (qual.size() >= 2) {
    std::vector<double> times;
    times.reserve(qual.size());
    for (const auto& ls : qual) times.push_back(ls.sample.t);
    visits = segment_visits(qual, compute_threshold(times, cfg.jump_k).tau);
  }
  const auto windows = cfg.windows.empty() ? windows_from_visits(visits) : cfg.windows;
  const auto profiles = density_profile(qual, windows, vol.dims[2], cfg.bandwidth);
  try {
    outcome.report.strategy = strategy_metrics(visits, qual, vol.dims[0], vol.dims[2]);
  } catch (const InputError&) {
    outcome.report.strategy = std::nullopt;  // no visit with 2+ samples
  }

  const std::string base = (fs::path(cfg.out_dir) / ci.id).string();
  const std::string stats_path = base + "_stats.json";
  const std::string density_csv_path = base + "_density.csv";
  const std::string density_svg_path = base + "_density.svg";
  outcome.written = {stats_path, density_csv_path, density_svg_path};
  write_stats_json(stats_path, outcome.report);
  write_density_csv(density_csv_path, profiles);
  write_density_svg(density_svg_path, profiles,
                    ci.id + " gaze density (scenario " + std::to_string(density_sc) + ")",
                    vol.dims[2]);
  return outcome;
}

/// Run all cases through a bounded worker pool and write the combined summary
/// CSV. On any failure every file written by this run is removed and the
/// first failing case's error is rethrown.
inline std::vector<CaseReport> run_analyze(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  if (cfg.cases.empty()) throw InputError("no cases configured");
  if (cfg.jobs < 1) throw InputError("jobs must be at least 1");
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec && !fs::exists(cfg.out_dir))
    throw InputError("cannot create output directory: " + cfg.out_dir);

  const std::size_t n = cfg.cases.size();
  std::vector<std::optional<CaseOutcome>> outcomes(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  std::vector<std::string> all_written;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        CaseOutcome oc = run_case(cfg, cfg.cases[i], derive_seed(cfg.seed, i));
        std::lock_guard<std::mutex> lock(io_mutex);
        all_written.insert(all_written.end(), oc.written.begin(), oc.written.end());
        outcomes[i] = std::move(oc);
      } catch (...) {
        errors[i] = std::current_exception();
        std::lock_guard<std::mutex> lock(io_mutex);
        const std::string base = (fs::path(cfg.out_dir) / cfg.cases[i].id).string();
        for (const char* suffix : {"_stats.json", "_density.csv", "_density.svg"})
          all_written.push_back(base + suffix);
      }
    }
  };

  const int pool = std::min<int>(cfg.jobs, static_cast<int>(n));
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (int i = 0; i < pool; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    for (const auto& path : all_written) fs::remove(path, ec);
    std::rethrow_exception(errors[i]);
  }

  std::vector<CaseReport> reports;
  reports.reserve(n);
  for (auto& oc : outcomes) reports.push_back(std::move(oc->report));
  write_summary_csv((fs::path(cfg.out_dir) / "summary.csv").string(), reports);
  return reports;
}

/// Aggregate previously written stats files into the cross-case summary JSON.
inline std::vector<AggregateGroup> run_report(const std::vector<std::string>& stats_paths,
                                              const std::string& out_path) {
  if (stats_paths.empty()) throw InputError("report requires at least one stats JSON file");
  std::vector<CaseReport> reports;
  reports.reserve(stats_paths.size());
  for (const auto& p : stats_paths) reports.push_back(read_stats_json(p));
  const auto groups = aggregate_reports(reports);
  write_aggregate_json(out_path, groups);
  return groups;
}

}  // namespace volgaze
