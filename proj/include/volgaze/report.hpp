#pragma once

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "volgaze/common.hpp"
#include "volgaze/density.hpp"
#include "volgaze/visits.hpp"

namespace volgaze {

inline constexpr int kSchemaVersion = 1;

/// Everything reported for one analyzed case.
struct CaseReport {
  std::string case_id;
  std::string reader;
  std::map<int, SessionStats> scenarios;  // keyed by scenario number
  std::optional<StrategyMetrics> strategy;
};

namespace detail {

inline nlohmann::ordered_json stats_to_json(const SessionStats& st) {
  nlohmann::ordered_json s;
  s["mean_s"] = st.mean_s;
  s["median_s"] = st.median_s;
  s["max_s"] = st.max_s;
  s["std_s"] = st.std_s;
  s["total_s"] = st.total_s;
  s["n_switches"] = st.n_switches;
  s["n_revisits"] = st.n_revisits;
  s["coverage_pct"] = st.coverage_pct;
  return s;
}

inline SessionStats stats_from_json(const nlohmann::json& s) {
  SessionStats st;
  st.mean_s = s.at("mean_s").get<double>();
  st.median_s = s.at("median_s").get<double>();
  st.max_s = s.at("max_s").get<double>();
  st.std_s = s.at("std_s").get<double>();
  st.total_s = s.at("total_s").get<double>();
  st.n_switches = s.at("n_switches").get<long>();
  st.n_revisits = s.at("n_revisits").get<long>();
  st.coverage_pct = s.at("coverage_pct").get<double>();
  return st;
}

}  // namespace detail

/// Per-case stats JSON. The drill index serializes as null (with a flag) when
/// it is the infinity sentinel.
inline void write_stats_json(const std::string& path, const CaseReport& report) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["case"] = report.case_id;
  j["reader"] = report.reader;
  nlohmann::ordered_json scen;
  for (const auto& [num, st] : report.scenarios)
    scen[std::to_string(num)] = detail::stats_to_json(st);
  j["scenarios"] = std::move(scen);
  if (report.strategy) {
    nlohmann::ordered_json s;
    s["scroll_rate_slices_per_s"] = report.strategy->scroll_rate;
    s["dispersion_px"] = report.strategy->dispersion;
    if (report.strategy->drill_infinite)
      s["drill_index"] = nullptr;
    else
      s["drill_index"] = report.strategy->drill_index;
    s["drill_infinite"] = report.strategy->drill_infinite;
    j["strategy"] = std::move(s);
  } else {
    j["strategy"] = nullptr;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write stats JSON: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw InputError("failed while writing stats JSON: " + path);
}

/// Read one per-case stats JSON back (the inverse of write_stats_json).
inline CaseReport read_stats_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open stats JSON: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": malformed stats JSON: " + e.what());
  }
  try {
    CaseReport rep;
    rep.case_id = j.at("case").get<std::string>();
    rep.reader = j.at("reader").get<std::string>();
    for (const auto& [key, val] : j.at("scenarios").items()) {
      std::size_t used = 0;
      const int num = std::stoi(key, &used);
      if (used != key.size() || (num != 1 && num != 2))
        throw InputError(path + ": bad scenario key '" + key + "'");
      rep.scenarios[num] = detail::stats_from_json(val);
    }
    if (j.contains("strategy") && !j.at("strategy").is_null()) {
      const auto& s = j.at("strategy");
      StrategyMetrics m;
      m.scroll_rate = s.at("scroll_rate_slices_per_s").get<double>();
      m.dispersion = s.at("dispersion_px").get<double>();
      m.drill_infinite = s.at("drill_infinite").get<bool>();
      m.drill_index = m.drill_infinite ? std::numeric_limits<double>::infinity()
                                       : s.at("drill_index").get<double>();
      rep.strategy = m;
    }
    return rep;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": stats JSON missing or mistyped field: " + e.what());
  }
}

/// Combined table across cases and scenarios, one row per (case, scenario),
/// sorted for deterministic output. Doubles use lossless formatting.
inline void write_summary_csv(const std::string& path, std::vector<CaseReport> reports) {
  std::sort(reports.begin(), reports.end(), [](const CaseReport& a, const CaseReport& b) {
    if (a.case_id != b.case_id) return a.case_id < b.case_id;
    return a.reader < b.reader;
  });
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write summary CSV: " + path);
  out << "case,reader,scenario,mean_s,median_s,max_s,std_s,total_s,n_switches,n_revisits,"
         "coverage_pct,schema_version\n";
  for (const auto& rep : reports)
    for (const auto& [num, st] : rep.scenarios) {
      out << rep.case_id << ',' << rep.reader << ',' << num << ',' << format_double(st.mean_s)
          << ',' << format_double(st.median_s) << ',' << format_double(st.max_s) << ','
          << format_double(st.std_s) << ',' << format_double(st.total_s) << ','
          << st.n_switches << ',' << st.n_revisits << ',' << format_double(st.coverage_pct)
          << ',' << kSchemaVersion << '\n';
    }
  if (!out) throw InputError("failed while writing summary CSV: " + path);
}

/// Per-window density table: one row per (window, slice grid point); windows
/// without a curve (empty or degenerate) contribute no rows.
inline void write_density_csv(const std::string& path,
                              const std::vector<DensityProfile>& profiles) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write density CSV: " + path);
  out << "window_id,slice,density\n";
  for (std::size_t w = 0; w < profiles.size(); ++w) {
    const auto& p = profiles[w];
    for (std::size_t g = 0; g < p.density.size(); ++g)
      out << w << ',' << format_double(p.slice_axis[g]) << ',' << format_double(p.density[g])
          << '\n';
  }
  if (!out) throw InputError("failed while writing density CSV: " + path);
}

/// One aggregate group: a reader's rows for one scenario.
struct AggregateGroup {
  std::string reader;
  int scenario = 0;
  std::size_t n_cases = 0;
  AggregateStats stats;
};

/// Cross-case aggregation of stats files: group by (reader, scenario), then
/// mean-of-means, mean-of-medians, and mean switch count per group.
inline std::vector<AggregateGroup> aggregate_reports(const std::vector<CaseReport>& reports) {
  if (reports.empty()) throw InputError("aggregation requires at least one stats file");
  std::map<std::pair<std::string, int>, std::vector<SessionStats>> groups;
  for (const auto& rep : reports)
    for (const auto& [num, st] : rep.scenarios) groups[{rep.reader, num}].push_back(st);
  std::vector<AggregateGroup> out;
  for (const auto& [key, rows] : groups) {
    AggregateGroup g;
    g.reader = key.first;
    g.scenario = key.second;
    g.n_cases = rows.size();
    g.stats = aggregate(rows);
    out.push_back(std::move(g));
  }
  return out;
}

inline void write_aggregate_json(const std::string& path,
                                 const std::vector<AggregateGroup>& groups) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& g : groups) {
    nlohmann::ordered_json e;
    e["reader"] = g.reader;
    e["scenario"] = g.scenario;
    e["n_cases"] = g.n_cases;
    e["mean_of_means_s"] = g.stats.mean_of_means_s;
    e["mean_of_medians_s"] = g.stats.mean_of_medians_s;
    e["mean_n_switches"] = g.stats.mean_n_switches;
    arr.push_back(std::move(e));
  }
  j["groups"] = std::move(arr);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write aggregate JSON: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw InputError("failed while writing aggregate JSON: " + path);
}

}  // namespace volgaze
