// End-to-end pipeline: synthetic sessions written to disk, analyzed back, and
// compared against planted ground truth; plus report serialization, summary
// output, aggregation, and failure cleanup.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "test_support.hpp"
#include "volgaze/pipeline.hpp"
#include "volgaze/report.hpp"
#include "volgaze/stats.hpp"
#include "volgaze/synth.hpp"

using namespace volgaze;
using testsupport::TempDir;
using testsupport::slurp;
using testsupport::spit;

namespace {

SynthSpec pipeline_spec(Archetype a, std::uint64_t seed, double sigma) {
  SynthSpec spec;
  spec.dims = {64, 64, 16};
  spec.organ_center = {32.0, 32.0, 8.0};
  spec.organ_radii = {18.0, 14.0, 5.0};
  spec.archetype = a;
  spec.n_visits = 3;
  spec.samples_per_visit = 32;
  spec.noise_sigma = sigma;
  spec.seed = seed;
  spec.case_id = archetype_name(a);
  spec.reader = "R1";
  return spec;
}

CaseInputs case_from_paths(const std::string& id, const SessionPaths& p) {
  CaseInputs ci;
  ci.id = id;
  ci.reader = "R1";
  ci.gaze_csv = p.gaze_csv;
  ci.trace_csv = p.trace_csv;
  ci.volume_path = p.volume_json;
  ci.mask_path = p.mask_json;
  return ci;
}

// The session statistics the planted truth implies, built with the same
// arithmetic the pipeline uses.
SessionStats stats_from_gt(const GroundTruth& gt, int scenario_idx) {
  std::vector<double> durations;
  for (const auto& gv : gt.visits[static_cast<std::size_t>(scenario_idx)])
    durations.push_back(gv.end_t - gv.start_t);
  SessionStats want;
  want.mean_s = mean(durations);
  want.median_s = median(durations);
  want.max_s = *std::max_element(durations.begin(), durations.end());
  want.std_s = population_std(durations);
  double total = 0;
  for (double d : durations) total += d;
  want.total_s = total;
  want.n_switches = static_cast<long>(durations.size());
  want.n_revisits = gt.n_revisits[static_cast<std::size_t>(scenario_idx)];
  want.coverage_pct = gt.coverage_pct[static_cast<std::size_t>(scenario_idx)];
  return want;
}

}  // namespace

TEST_CASE("analysis of a written synthetic session reproduces the planted truth",
          "[pipeline]") {
  struct Cfg {
    Archetype a;
    double sigma;
  };
  for (const Cfg& c : {Cfg{Archetype::driller, 0.0}, Cfg{Archetype::scanner, 0.5},
                       Cfg{Archetype::hybrid, 1.0}}) {
    TempDir dir;
    const SynthSession s = generate(pipeline_spec(c.a, 2718, c.sigma));
    const SessionPaths paths = write_session(dir.file("in"), s);

    RunConfig cfg;
    cfg.out_dir = dir.file("out");
    cfg.cases.push_back(case_from_paths(archetype_name(c.a), paths));
    const auto reports = run_analyze(cfg);
    REQUIRE(reports.size() == 1);
    INFO("archetype " << archetype_name(c.a) << " sigma " << c.sigma);

    for (int sc : {1, 2}) {
      const SessionStats& got = reports[0].scenarios.at(sc);
      const SessionStats want = stats_from_gt(s.gt, sc - 1);
      CHECK(got.n_switches == want.n_switches);
      CHECK(got.n_revisits == want.n_revisits);
      CHECK(got.coverage_pct == want.coverage_pct);  // exact, not approximate
      CHECK(got.mean_s == want.mean_s);
      CHECK(got.median_s == want.median_s);
      CHECK(got.max_s == want.max_s);
      CHECK(got.std_s == want.std_s);
      CHECK(got.total_s == want.total_s);
    }
    CHECK(reports[0].strategy.has_value());

    namespace fs = std::filesystem;
    const std::string base = (fs::path(cfg.out_dir) / archetype_name(c.a)).string();
    CHECK(fs::exists(base + "_stats.json"));
    CHECK(fs::exists(base + "_density.csv"));
    CHECK(fs::exists(base + "_density.svg"));
    CHECK(fs::exists(fs::path(cfg.out_dir) / "summary.csv"));
  }
}

TEST_CASE("repeated runs and worker counts produce byte-identical outputs",
          "[pipeline]") {
  TempDir dir;
  std::vector<CaseInputs> cases;
  for (const Archetype a : {Archetype::driller, Archetype::scanner, Archetype::hybrid}) {
    const SynthSession s = generate(pipeline_spec(a, 99, 0.6));
    cases.push_back(case_from_paths(archetype_name(a), write_session(dir.file("in"), s)));
  }

  auto run_into = [&](const std::string& out, int jobs) {
    RunConfig cfg;
    cfg.cases = cases;
    cfg.out_dir = out;
    cfg.jobs = jobs;
    run_analyze(cfg);
  };
  run_into(dir.file("a"), 1);
  run_into(dir.file("b"), 4);
  run_into(dir.file("c"), 1);

  namespace fs = std::filesystem;
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir.file("a")))
    names.push_back(e.path().filename().string());
  REQUIRE(names.size() == 10);  // 3 cases x 3 files + summary.csv
  for (const auto& n : names) {
    CHECK(slurp(dir.file("a") + "/" + n) == slurp(dir.file("b") + "/" + n));
    CHECK(slurp(dir.file("a") + "/" + n) == slurp(dir.file("c") + "/" + n));
  }
}

TEST_CASE("a failing case removes every file the run wrote", "[pipeline]") {
  TempDir dir;
  const SynthSession good = generate(pipeline_spec(Archetype::driller, 5, 0.0));
  const SessionPaths good_paths = write_session(dir.file("in"), good);

  const std::string bad_gaze = dir.file("bad_gaze.csv");
  spit(bad_gaze, "t,x,y\n1,2\n");  // wrong field count on row 1
  CaseInputs bad = case_from_paths("zz-broken", good_paths);
  bad.gaze_csv = bad_gaze;

  RunConfig cfg;
  cfg.out_dir = dir.file("out");
  cfg.cases.push_back(case_from_paths("aa-good", good_paths));
  cfg.cases.push_back(bad);

  CHECK_THROWS_AS(run_analyze(cfg), InputError);

  namespace fs = std::filesystem;
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(cfg.out_dir))
    if (e.is_regular_file()) ++files;
  CHECK(files == 0);  // the good case's outputs were rolled back too
}

TEST_CASE("missing inputs are reported with their role and path", "[pipeline]") {
  TempDir dir;
  const SynthSession s = generate(pipeline_spec(Archetype::scanner, 6, 0.0));
  CaseInputs ci = case_from_paths("m", write_session(dir.file("in"), s));
  ci.mask_path = dir.file("absent_mask.json");

  RunConfig cfg;
  cfg.out_dir = dir.file("out");
  cfg.cases.push_back(ci);
  CHECK_THROWS_WITH(run_analyze(cfg),
                    Catch::Matchers::ContainsSubstring("mask file not found") &&
                        Catch::Matchers::ContainsSubstring("absent_mask.json"));

  RunConfig none;
  none.out_dir = dir.file("out2");
  CHECK_THROWS_WITH(run_analyze(none), Catch::Matchers::ContainsSubstring("no cases"));

  RunConfig badjobs = cfg;
  badjobs.jobs = 0;
  CHECK_THROWS_WITH(run_analyze(badjobs), Catch::Matchers::ContainsSubstring("jobs"));
}

TEST_CASE("a recording with zero samples yields an all-zero report", "[pipeline]") {
  TempDir dir;
  const SynthSession s = generate(pipeline_spec(Archetype::driller, 8, 0.0));
  const SessionPaths paths = write_session(dir.file("in"), s);

  const std::string empty_gaze = dir.file("empty_gaze.csv");
  spit(empty_gaze, "t,x,y\n");
  CaseInputs ci = case_from_paths("empty", paths);
  ci.gaze_csv = empty_gaze;

  RunConfig cfg;
  cfg.out_dir = dir.file("out");
  cfg.cases.push_back(ci);
  const auto reports = run_analyze(cfg);
  REQUIRE(reports.size() == 1);
  for (int sc : {1, 2}) {
    const SessionStats& st = reports[0].scenarios.at(sc);
    CHECK(st.n_switches == 0);
    CHECK(st.total_s == 0.0);
    CHECK(st.coverage_pct == 0.0);
  }
  CHECK_FALSE(reports[0].strategy.has_value());

  const CaseReport back = read_stats_json(dir.file("out") + "/empty_stats.json");
  CHECK_FALSE(back.strategy.has_value());  // serialized as null
}

TEST_CASE("stats JSON round-trips, including the infinite drill sentinel",
          "[report]") {
  TempDir dir;
  CaseReport rep;
  rep.case_id = "case-7";
  rep.reader = "B";
  SessionStats s1;
  s1.mean_s = 1.5;
  s1.median_s = 1.25;
  s1.max_s = 4.0;
  s1.std_s = 0.5;
  s1.total_s = 9.0;
  s1.n_switches = 6;
  s1.n_revisits = 2;
  s1.coverage_pct = 37.5;
  rep.scenarios[1] = s1;
  SessionStats s2 = s1;
  s2.n_switches = 11;
  rep.scenarios[2] = s2;
  StrategyMetrics m;
  m.scroll_rate = 2.5;
  m.dispersion = 0.0;
  m.drill_index = std::numeric_limits<double>::infinity();
  m.drill_infinite = true;
  rep.strategy = m;

  const std::string path = dir.file("case7_stats.json");
  write_stats_json(path, rep);

  // the sentinel must appear as a JSON null, not a non-standard literal
  nlohmann::json j = nlohmann::json::parse(slurp(path));
  CHECK(j.at("strategy").at("drill_index").is_null());
  CHECK(j.at("strategy").at("drill_infinite").get<bool>() == true);
  CHECK(j.at("schema_version").get<int>() == kSchemaVersion);

  const CaseReport back = read_stats_json(path);
  CHECK(back.case_id == "case-7");
  CHECK(back.reader == "B");
  REQUIRE(back.scenarios.count(1) == 1);
  REQUIRE(back.scenarios.count(2) == 1);
  CHECK(back.scenarios.at(1).mean_s == 1.5);
  CHECK(back.scenarios.at(1).coverage_pct == 37.5);
  CHECK(back.scenarios.at(2).n_switches == 11);
  REQUIRE(back.strategy.has_value());
  CHECK(back.strategy->drill_infinite);
  CHECK(std::isinf(back.strategy->drill_index));
  CHECK(back.strategy->dispersion == 0.0);
}

TEST_CASE("malformed or mistyped stats JSON is rejected with the path", "[report]") {
  TempDir dir;
  const std::string garbled = dir.file("garbled.json");
  spit(garbled, "{ not json");
  CHECK_THROWS_WITH(read_stats_json(garbled),
                    Catch::Matchers::ContainsSubstring("malformed"));

  const std::string missing = dir.file("missing.json");
  spit(missing, R"({"schema_version":1,"case":"x","reader":"r",
                    "scenarios":{"1":{"mean_s":1.0}}})");
  CHECK_THROWS_WITH(read_stats_json(missing),
                    Catch::Matchers::ContainsSubstring("missing or mistyped"));

  const std::string badkey = dir.file("badkey.json");
  spit(badkey, R"({"case":"x","reader":"r","scenarios":{"7":{}}})");
  CHECK_THROWS_WITH(read_stats_json(badkey),
                    Catch::Matchers::ContainsSubstring("scenario key"));

  CHECK_THROWS_WITH(read_stats_json(dir.file("nope.json")),
                    Catch::Matchers::ContainsSubstring("cannot open"));
}

TEST_CASE("summary CSV is sorted by case with one row per scenario", "[report]") {
  TempDir dir;
  auto mk = [](const std::string& id, double mean_s) {
    CaseReport r;
    r.case_id = id;
    r.reader = "R";
    SessionStats st;
    st.mean_s = mean_s;
    r.scenarios[1] = st;
    r.scenarios[2] = st;
    return r;
  };
  const std::string path = dir.file("summary.csv");
  write_summary_csv(path, {mk("bravo", 2.0), mk("alpha", 1.0)});
  const std::string text = slurp(path);

  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] ==
        "case,reader,scenario,mean_s,median_s,max_s,std_s,total_s,n_switches,"
        "n_revisits,coverage_pct,schema_version");
  CHECK(lines[1].substr(0, 6) == "alpha,");
  CHECK(lines[2].substr(0, 6) == "alpha,");
  CHECK(lines[3].substr(0, 6) == "bravo,");
  CHECK(lines[1].find(",1,1,") != std::string::npos);  // scenario then mean_s
  CHECK(lines[2].find(",2,1,") != std::string::npos);
}

TEST_CASE("density CSV lists grid rows only for windows with curves", "[report]") {
  TempDir dir;
  std::vector<DensityProfile> profiles(3);
  profiles[0].degenerate = true;
  profiles[1].slice_axis = {0, 1, 2};
  profiles[1].density = {0.1, 0.5, 0.4};
  profiles[2].empty = true;
  const std::string path = dir.file("density.csv");
  write_density_csv(path, profiles);
  const std::string text = slurp(path);
  CHECK(text == "window_id,slice,density\n1,0,0.10000000000000001\n1,1,0.5\n1,2,"
                "0.40000000000000002\n");
}

TEST_CASE("aggregation groups stats files by reader and scenario", "[report]") {
  TempDir dir;
  auto mk = [&](const std::string& id, const std::string& reader, double mean1,
                double med1, long sw1, double mean2, double med2, long sw2) {
    CaseReport r;
    r.case_id = id;
    r.reader = reader;
    SessionStats a;
    a.mean_s = mean1;
    a.median_s = med1;
    a.n_switches = sw1;
    r.scenarios[1] = a;
    SessionStats b;
    b.mean_s = mean2;
    b.median_s = med2;
    b.n_switches = sw2;
    r.scenarios[2] = b;
    const std::string path = dir.file(id + "_stats.json");
    write_stats_json(path, r);
    return path;
  };
  // First reader's three published cases; second reader gets one small case.
  std::vector<std::string> paths{
      mk("c1", "A", 1.96, 1.40, 40, 3.35, 1.59, 71),
      mk("c2", "A", 4.73, 3.34, 59, 3.06, 0.80, 87),
      mk("c3", "A", 4.25, 2.43, 76, 1.35, 0.50, 175),
      mk("c4", "B", 2.0, 1.0, 10, 3.0, 2.0, 20),
  };
  const std::string out = dir.file("aggregate.json");
  const auto groups = run_report(paths, out);
  REQUIRE(groups.size() == 4);  // (A,1) (A,2) (B,1) (B,2), sorted

  CHECK(groups[0].reader == "A");
  CHECK(groups[0].scenario == 1);
  CHECK(groups[0].n_cases == 3);
  CHECK(groups[0].stats.mean_of_means_s == Catch::Approx(3.6466666666666669).margin(1e-12));
  CHECK(groups[0].stats.mean_of_medians_s == Catch::Approx(2.39).margin(1e-12));
  CHECK(groups[0].stats.mean_n_switches ==
        Catch::Approx(58.333333333333336).margin(1e-12));

  CHECK(groups[1].scenario == 2);
  CHECK(groups[1].stats.mean_of_medians_s ==
        Catch::Approx(0.96333333333333337).margin(1e-12));
  CHECK(groups[1].stats.mean_n_switches == Catch::Approx(111.0).margin(1e-12));

  CHECK(groups[2].reader == "B");
  CHECK(groups[2].n_cases == 1);
  CHECK(groups[2].stats.mean_of_means_s == 2.0);

  const nlohmann::json j = nlohmann::json::parse(slurp(out));
  REQUIRE(j.at("groups").size() == 4);
  CHECK(j.at("groups")[0].at("reader").get<std::string>() == "A");
  CHECK(j.at("groups")[0].at("mean_n_switches").get<double>() ==
        Catch::Approx(58.333333333333336));

  CHECK_THROWS_AS(run_report({}, out), InputError);
  CHECK_THROWS_AS(run_report({dir.file("ghost.json")}, out), InputError);
}
