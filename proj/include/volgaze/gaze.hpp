#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "volgaze/common.hpp"
#include "volgaze/csv.hpp"

namespace volgaze {

/// One gaze point in scene-frame pixel coordinates at time t (seconds since
/// session start).
struct GazeSample {
  double t = 0;
  double x = 0;
  double y = 0;
  long frame_id = -1;  // optional scene-video frame reference, -1 if absent
};

/// Step function "slice z is displayed from time t on". At exactly an event
/// time the new slice is in effect.
struct SliceTrace {
  struct Event {
    double t;
    int z;
  };
  std::vector<Event> events;  // strictly increasing t, first at t = 0
};

struct RecordingMeta {
  std::string reader;
  std::string case_id;
  int screen_w = 1920;
  int screen_h = 1080;
};

/// Time-ordered session: gaze samples plus the slice-navigation trace.
struct GazeRecording {
  std::vector<GazeSample> samples;
  SliceTrace trace;
  RecordingMeta meta;
};

/// Parse a gaze CSV with header columns t, x, y (optional frame_id; extra
/// columns ignored). Timestamps must be non-decreasing; ties keep file order.
/// Diagnostics name the 1-based file line (header is line 1).
inline std::vector<GazeSample> parse_gaze_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  if (t.header.empty()) throw InputError(path + ": empty file");
  const int ct = t.column("t");
  const int cx = t.column("x");
  const int cy = t.column("y");
  if (ct < 0 || cx < 0 || cy < 0)
    throw InputError(path + ": header must contain columns t, x, y");
  const int cf = t.column("frame_id");

  std::vector<GazeSample> out;
  out.reserve(t.rows.size());
  double prev_t = -1;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const int line = t.line_numbers[i];
    GazeSample s;
    s.t = parse_double_cell(t.rows[i][ct], path, line, "t");
    s.x = parse_double_cell(t.rows[i][cx], path, line, "x");
    s.y = parse_double_cell(t.rows[i][cy], path, line, "y");
    if (cf >= 0 && !t.rows[i][cf].empty())
      s.frame_id = parse_long_cell(t.rows[i][cf], path, line, "frame_id");
    if (s.t < 0)
      throw InputError(path + ": row " + std::to_string(line) + ": negative timestamp");
    if (!out.empty() && s.t < prev_t)
      throw InputError(path + ": row " + std::to_string(line) + ": decreasing timestamp " +
                       format_double(s.t) + " after " + format_double(prev_t));
    prev_t = s.t;
    out.push_back(s);
  }
  return out;
}

/// Parse a slice-navigation CSV with columns t, z. Events must start at t = 0,
/// increase strictly in t, and stay within [0, nz).
inline SliceTrace parse_slice_trace(const std::string& path, int nz) {
  const CsvTable t = read_csv(path);
  if (t.header.empty()) throw InputError(path + ": empty file");
  const int ct = t.column("t");
  const int cz = t.column("z");
  if (ct < 0 || cz < 0) throw InputError(path + ": header must contain columns t, z");
  if (t.rows.empty()) throw InputError(path + ": trace has no events");

  SliceTrace trace;
  trace.events.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const int line = t.line_numbers[i];
    SliceTrace::Event e;
    e.t = parse_double_cell(t.rows[i][ct], path, line, "t");
    const long z = parse_long_cell(t.rows[i][cz], path, line, "z");
    if (z < 0 || z >= nz)
      throw InputError(path + ": row " + std::to_string(line) + ": slice index " +
                       std::to_string(z) + " outside [0, " + std::to_string(nz) + ")");
    e.z = static_cast<int>(z);
    if (trace.events.empty()) {
      if (e.t != 0.0)
        throw InputError(path + ": first event at t = " + format_double(e.t) +
                         "; no slice defined on [0, " + format_double(e.t) + ")");
    } else if (e.t <= trace.events.back().t) {
      throw InputError(path + ": row " + std::to_string(line) +
                       ": event times must increase strictly");
    }
    trace.events.push_back(e);
  }
  return trace;
}

/// Displayed slice at time t: the last event with event-time <= t.
inline int slice_at(const SliceTrace& trace, double t) {
  if (trace.events.empty()) throw InvariantError("slice_at on empty trace");
  // first event strictly after t, then step back one
  auto it = std::upper_bound(trace.events.begin(), trace.events.end(), t,
                             [](double v, const SliceTrace::Event& e) { return v < e.t; });
  if (it == trace.events.begin()) throw InvariantError("slice_at before first trace event");
  return std::prev(it)->z;
}

}  // namespace volgaze
