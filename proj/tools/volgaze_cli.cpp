// Command-line front end: analyze gaze sessions against CT volumes, align
// scene captures, generate synthetic oracle sessions, and aggregate reports.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "volgaze/align.hpp"
#include "volgaze/common.hpp"
#include "volgaze/pipeline.hpp"
#include "volgaze/report.hpp"
#include "volgaze/svg.hpp"
#include "volgaze/synth.hpp"

namespace {

using namespace volgaze;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitAlignment = 2;
constexpr int kExitInternal = 3;

struct SharedFlags {
  double theta = 1.5, distance_cm = 60.0, ppc = 38.4, scale = 0.2667;
  double jump_k = 1.0, ransac_px = 3.0, bandwidth = 0.0;
  std::uint64_t seed = 0;
  std::string scenarios = "1,2";
  bool coverage_point_only = false;
  int jobs = 1;
  std::string out_dir;
  std::string windows;
};

void add_shared_flags(CLI::App* cmd, SharedFlags& f) {
  cmd->add_option("--theta", f.theta, "Foveal visual angle, degrees");
  cmd->add_option("--distance-cm", f.distance_cm, "Viewing distance, cm");
  cmd->add_option("--ppc", f.ppc, "Screen resolution, px/cm");
  cmd->add_option("--scale", f.scale, "Uniform image scaling factor");
  cmd->add_option("--jump-k", f.jump_k, "Jump-threshold multiplier k");
  cmd->add_option("--ransac-px", f.ransac_px, "RANSAC reprojection threshold, px");
  cmd->add_option("--bandwidth", f.bandwidth, "Density kernel bandwidth, slices (0 = automatic)");
  cmd->add_option("--seed", f.seed, "Master random seed");
  cmd->add_option("--scenarios", f.scenarios, "Scenario list, e.g. 1,2");
  cmd->add_flag("--coverage-point-only", f.coverage_point_only,
                "Scenario-1 coverage counts only the gazed pixel");
  cmd->add_option("--jobs", f.jobs, "Worker pool size for multi-case runs");
  cmd->add_option("--windows", f.windows, "Explicit density windows start:end[,start:end...]");
}

void apply_shared_flags(const CLI::App* cmd, const SharedFlags& f, RunConfig& cfg) {
  if (cmd->count("--theta")) cfg.theta = f.theta;
  if (cmd->count("--distance-cm")) cfg.distance_cm = f.distance_cm;
  if (cmd->count("--ppc")) cfg.ppc = f.ppc;
  if (cmd->count("--scale")) cfg.scale = f.scale;
  if (cmd->count("--jump-k")) cfg.jump_k = f.jump_k;
  if (cmd->count("--ransac-px")) cfg.ransac_px = f.ransac_px;
  if (cmd->count("--bandwidth")) cfg.bandwidth = f.bandwidth;
  if (cmd->count("--seed")) cfg.seed = f.seed;
  if (cmd->count("--scenarios")) cfg.scenarios = parse_scenarios(f.scenarios);
  if (cmd->count("--coverage-point-only")) cfg.coverage_point_only = f.coverage_point_only;
  if (cmd->count("--jobs")) cfg.jobs = f.jobs;
  if (cmd->count("--out")) cfg.out_dir = f.out_dir;
  if (cmd->count("--windows")) cfg.windows = parse_windows(f.windows);
}

nlohmann::ordered_json homography_to_json(const Homography& h) {
  nlohmann::ordered_json j;
  j["h"] = {{h.h[0][0], h.h[0][1], h.h[0][2]},
            {h.h[1][0], h.h[1][1], h.h[1][2]},
            {h.h[2][0], h.h[2][1], h.h[2][2]}};
  j["inliers"] = h.inlier_count;
  j["rmse"] = h.reprojection_rmse;
  return j;
}

int cmd_analyze(const CLI::App* cmd, const SharedFlags& flags, const std::string& config_path,
                const CaseInputs& direct_case) {
  RunConfig cfg;
  if (!config_path.empty()) cfg = config_to_run(parse_config(config_path));
  apply_shared_flags(cmd, flags, cfg);
  if (cfg.out_dir.empty()) cfg.out_dir = "volgaze-out";
  if (!direct_case.gaze_csv.empty()) cfg.cases.push_back(direct_case);
  const auto reports = run_analyze(cfg);
  std::cout << "analyzed " << reports.size() << " case(s); outputs in " << cfg.out_dir << "\n";
  return kExitOk;
}

int cmd_align(const std::string& scene_path, const std::string& volume_path,
              const std::string& slice_spec, double ransac_px, std::uint64_t seed) {
  const Volume vol = load_volume(volume_path);
  const Image8 scene = read_image_gray8(scene_path);
  Homography h;
  int slice = -1;
  if (slice_spec == "auto") {
    std::vector<int> candidates(static_cast<std::size_t>(vol.dims[2]));
    for (int z = 0; z < vol.dims[2]; ++z) candidates[z] = z;
    const auto inf = infer_slice(scene, vol, candidates, ransac_px, seed);
    h = inf.h;
    slice = inf.z;
  } else {
    const long z = config_long("slice", slice_spec);
    if (z < 0 || z >= vol.dims[2])
      throw InputError("reference slice out of range: " + slice_spec);
    h = align_scene(vol.slice_gray8(static_cast<int>(z)), scene, ransac_px, seed);
    slice = static_cast<int>(z);
  }
  auto j = homography_to_json(h);
  j["slice"] = slice;
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_synth(const std::string& archetype, std::uint64_t seed, const std::string& out_dir,
              int n_cases, double noise_sigma, int n_visits, int samples_per_visit) {
  namespace fs = std::filesystem;
  if (n_cases < 1) throw InputError("--cases must be at least 1");
  nlohmann::ordered_json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["seed"] = seed;
  auto cases_json = nlohmann::ordered_json::array();
  std::string config_text = "# analyze config for the generated sessions\nout = " +
                            (fs::path(out_dir) / "analysis").string() + "\n";

  for (int i = 0; i < n_cases; ++i) {
    SynthSpec spec;
    if (archetype == "mixed")
      spec.archetype = i % 2 == 0 ? Archetype::driller : Archetype::scanner;
    else
      spec.archetype = archetype_from_name(archetype);
    spec.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    spec.noise_sigma = noise_sigma;
    if (n_visits > 0) spec.n_visits = n_visits;
    if (samples_per_visit > 0) spec.samples_per_visit = samples_per_visit;
    char id[32];
    std::snprintf(id, sizeof(id), "synth-%03d", i);
    spec.case_id = id;
    const SynthSession session = generate(spec);
    const SessionPaths paths = write_session(out_dir, session);

    nlohmann::ordered_json cj;
    cj["id"] = spec.case_id;
    cj["archetype"] = session.gt.archetype;
    cj["files"] = {{"gaze", paths.gaze_csv},
                   {"trace", paths.trace_csv},
                   {"volume", paths.volume_json},
                   {"mask", paths.mask_json}};
    auto scenarios = nlohmann::ordered_json::array();
    for (int sc = 0; sc < 2; ++sc) {
      nlohmann::ordered_json sj;
      sj["scenario"] = sc + 1;
      auto visits = nlohmann::ordered_json::array();
      for (const auto& gv : session.gt.visits[sc]) {
        nlohmann::ordered_json vj;
        vj["start_t"] = gv.start_t;
        vj["end_t"] = gv.end_t;
        vj["n_samples"] = gv.n_samples;
        vj["slices"] = std::vector<int>(gv.slices.begin(), gv.slices.end());
        visits.push_back(std::move(vj));
      }
      sj["visits"] = std::move(visits);
      sj["n_revisits"] = session.gt.n_revisits[sc];
      sj["coverage_pct"] = session.gt.coverage_pct[sc];
      sj["covered_voxels"] = session.gt.covered[sc].size();
      scenarios.push_back(std::move(sj));
    }
    cj["ground_truth"] = std::move(scenarios);
    cases_json.push_back(std::move(cj));

    config_text += "\n[case." + spec.case_id + "]\n";
    config_text += "reader = " + session.rec.meta.reader + "\n";
    config_text += "gaze = " + paths.gaze_csv + "\n";
    config_text += "trace = " + paths.trace_csv + "\n";
    config_text += "volume = " + paths.volume_json + "\n";
    config_text += "mask = " + paths.mask_json + "\n";
  }
  manifest["cases"] = std::move(cases_json);

  const std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
  {
    std::ofstream out(manifest_path, std::ios::binary);
    if (!out) throw InputError("cannot write manifest: " + manifest_path);
    out << manifest.dump(2) << "\n";
  }
  const std::string config_out = (fs::path(out_dir) / "analyze.cfg").string();
  {
    std::ofstream out(config_out, std::ios::binary);
    if (!out) throw InputError("cannot write config: " + config_out);
    out << config_text;
  }
  std::cout << "generated " << n_cases << " case(s); manifest at " << manifest_path << "\n";
  return kExitOk;
}

int cmd_report_aggregate(const std::vector<std::string>& stats_files,
                         const std::string& out_path) {
  const auto groups = run_report(stats_files, out_path);
  for (const auto& g : groups)
    std::cout << g.reader << " scenario " << g.scenario << ": mean-of-means "
              << format_double(g.stats.mean_of_means_s) << " s, mean-of-medians "
              << format_double(g.stats.mean_of_medians_s) << " s, mean N "
              << format_double(g.stats.mean_n_switches) << " (" << g.n_cases << " cases)\n";
  return kExitOk;
}

int cmd_report_density(const CLI::App* cmd, const SharedFlags& flags, CaseInputs ci) {
  RunConfig cfg;
  apply_shared_flags(cmd, flags, cfg);
  if (cfg.out_dir.empty()) cfg.out_dir = "volgaze-out";
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);

  const Volume vol = load_volume(ci.volume_path);
  const SegMask mask = load_mask(ci.mask_path, vol);
  const FovealModel fov = make_foveal_model(cfg.theta, cfg.distance_cm, cfg.ppc, cfg.scale);
  GazeRecording rec;
  rec.samples = parse_gaze_csv(ci.gaze_csv);
  std::vector<LabeledSample> labeled;
  if (!rec.samples.empty()) {
    rec.trace = parse_slice_trace(ci.trace_csv, vol.dims[2]);
    const Homography h = resolve_homography(ci, vol, cfg, cfg.seed);
    labeled = label_samples(rec, mask, h, fov);
  }
  const int density_sc = cfg.scenarios.back();
  const auto qual = qualifying_samples(labeled, density_sc);
  std::vector<Visit> visits;
  if (qual.size() == 1) {
    visits = segment_visits(qual, 0.0);
  } else if (qual.size() >= 2) {
    std::vector<double> times;
    for (const auto& ls : qual) times.push_back(ls.sample.t);
    visits = segment_visits(qual, compute_threshold(times, cfg.jump_k).tau);
  }
  const auto windows = cfg.windows.empty() ? windows_from_visits(visits) : cfg.windows;
  const auto profiles = density_profile(qual, windows, vol.dims[2], cfg.bandwidth);
  const std::string base = (fs::path(cfg.out_dir) / ci.id).string();
  write_density_csv(base + "_density.csv", profiles);
  write_density_svg(base + "_density.svg",
                    profiles, ci.id + " gaze density (scenario " + std::to_string(density_sc) + ")",
                    vol.dims[2]);
  std::cout << "density outputs in " << cfg.out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Volumetric gaze analysis for CT reading sessions"};
  app.require_subcommand(1);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Run the full pipeline over configured cases");
  SharedFlags an_flags;
  std::string an_config;
  CaseInputs an_case;
  an_case.id = "case1";
  analyze->add_option("--config", an_config, "Config file with [case.ID] sections");
  analyze->add_option("--out", an_flags.out_dir, "Output directory");
  analyze->add_option("--case", an_case.id, "Case id for directly given inputs");
  analyze->add_option("--reader", an_case.reader, "Reader label for directly given inputs");
  analyze->add_option("--gaze", an_case.gaze_csv, "Gaze CSV (t,x,y)");
  analyze->add_option("--trace", an_case.trace_csv, "Slice trace CSV (t,z)");
  analyze->add_option("--volume", an_case.volume_path, "CT volume (.json header or .nii)");
  analyze->add_option("--mask", an_case.mask_path, "Segmentation mask volume");
  analyze->add_option("--scene", an_case.scene_path, "Scene capture image (PNG/PGM)");
  analyze->add_option("--slice", an_case.slice_spec, "Reference slice for alignment, or 'auto'");
  add_shared_flags(analyze, an_flags);

  // align
  auto* align = app.add_subcommand("align", "Estimate the image-to-scene homography");
  std::string al_scene, al_volume, al_slice = "auto";
  double al_ransac = 3.0;
  std::uint64_t al_seed = 0;
  align->add_option("--scene", al_scene, "Scene capture image (PNG/PGM)")->required();
  align->add_option("--volume", al_volume, "CT volume")->required();
  align->add_option("--slice", al_slice, "Slice index, or 'auto' to infer");
  align->add_option("--ransac-px", al_ransac, "RANSAC reprojection threshold, px");
  align->add_option("--seed", al_seed, "Random seed");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic sessions with ground truth");
  std::string sy_archetype = "driller", sy_out = "synth-out";
  std::uint64_t sy_seed = 0;
  int sy_cases = 1, sy_visits = 0, sy_samples = 0;
  double sy_noise = 0.0;
  synth->add_option("--archetype", sy_archetype, "driller | scanner | hybrid | mixed");
  synth->add_option("--seed", sy_seed, "Master seed");
  synth->add_option("--out", sy_out, "Output directory");
  synth->add_option("--cases", sy_cases, "Number of cases to generate");
  synth->add_option("--noise-sigma", sy_noise, "Gaze noise sigma, scene px");
  synth->add_option("--visits", sy_visits, "Visits per case (0 = default)");
  synth->add_option("--samples-per-visit", sy_samples, "Samples per visit (0 = default)");

  // report
  auto* report = app.add_subcommand("report",
                                    "Aggregate stats files, or plot density for one session");
  SharedFlags rp_flags;
  std::vector<std::string> rp_stats;
  std::string rp_out = "aggregate.json";
  CaseInputs rp_case;
  rp_case.id = "session";
  report->add_option("--stats", rp_stats, "Per-case stats JSON files to aggregate");
  report->add_option("--aggregate-out", rp_out, "Aggregate JSON output path");
  report->add_option("--out", rp_flags.out_dir, "Output directory for density mode");
  report->add_option("--case", rp_case.id, "Case id for density mode");
  report->add_option("--gaze", rp_case.gaze_csv, "Gaze CSV (t,x,y)");
  report->add_option("--trace", rp_case.trace_csv, "Slice trace CSV (t,z)");
  report->add_option("--volume", rp_case.volume_path, "CT volume");
  report->add_option("--mask", rp_case.mask_path, "Segmentation mask volume");
  report->add_option("--scene", rp_case.scene_path, "Scene capture image");
  report->add_option("--slice", rp_case.slice_spec, "Reference slice, or 'auto'");
  add_shared_flags(report, rp_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(analyze, an_flags, an_config, an_case);
    if (align->parsed()) return cmd_align(al_scene, al_volume, al_slice, al_ransac, al_seed);
    if (synth->parsed())
      return cmd_synth(sy_archetype, sy_seed, sy_out, sy_cases, sy_noise, sy_visits, sy_samples);
    if (report->parsed()) {
      if (!rp_stats.empty()) return cmd_report_aggregate(rp_stats, rp_out);
      if (!rp_case.gaze_csv.empty()) return cmd_report_density(report, rp_flags, rp_case);
      throw InputError("report needs either --stats files or a session (--gaze ...)");
    }
    throw InvariantError("no subcommand dispatched");
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const AlignmentError& e) {
    std::cerr << "alignment error: " << e.what() << "\n";
    return kExitAlignment;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
