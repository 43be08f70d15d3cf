#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "volgaze/common.hpp"
#include "volgaze/density.hpp"

namespace volgaze {

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string svg_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline constexpr std::array<const char*, 10> kCurvePalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace detail

/// Density-over-slices plot: one curve per time window with the window
/// duration in the legend; windows without slice variance appear as vertical
/// line markers instead of curves. Output is a standalone deterministic SVG.
inline void write_density_svg(const std::string& path,
                              const std::vector<DensityProfile>& profiles,
                              const std::string& title, int nz) {
  if (nz < 1) throw InputError("density plot requires at least one slice");
  const double width = 880, height = 520;
  const double ml = 64, mr = 220, mt = 48, mb = 56;
  const double pw = width - ml - mr;
  const double ph = height - mt - mb;

  double ymax = 0;
  for (const auto& p : profiles)
    for (double d : p.density) ymax = std::max(ymax, d);
  if (ymax <= 0) ymax = 1.0;
  ymax *= 1.05;

  const double xspan = nz > 1 ? static_cast<double>(nz - 1) : 1.0;
  auto sx = [&](double slice) { return ml + (slice / xspan) * pw; };
  auto sy = [&](double dens) { return mt + ph - (dens / ymax) * ph; };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write SVG file: " + path);

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << detail::svg_num(ml) << "\" y=\"28\" font-family=\"sans-serif\" "
         "font-size=\"16\" fill=\"#222\">"
      << detail::svg_escape(title) << "</text>\n";

  // Axes.
  out << "<line x1=\"" << detail::svg_num(ml) << "\" y1=\"" << detail::svg_num(mt + ph)
      << "\" x2=\"" << detail::svg_num(ml + pw) << "\" y2=\"" << detail::svg_num(mt + ph)
      << "\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << detail::svg_num(ml) << "\" y1=\"" << detail::svg_num(mt)
      << "\" x2=\"" << detail::svg_num(ml) << "\" y2=\"" << detail::svg_num(mt + ph)
      << "\" stroke=\"#444\" stroke-width=\"1\"/>\n";

  // X ticks at 5 evenly spaced slice positions; Y ticks at quarters.
  for (int i = 0; i <= 4; ++i) {
    const double slice = xspan * i / 4.0;
    const double x = sx(slice);
    out << "<line x1=\"" << detail::svg_num(x) << "\" y1=\"" << detail::svg_num(mt + ph)
        << "\" x2=\"" << detail::svg_num(x) << "\" y2=\"" << detail::svg_num(mt + ph + 5)
        << "\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << detail::svg_num(x) << "\" y=\"" << detail::svg_num(mt + ph + 20)
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\" "
           "text-anchor=\"middle\">"
        << detail::svg_num(slice) << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double d = ymax * i / 4.0;
    const double y = sy(d);
    out << "<line x1=\"" << detail::svg_num(ml - 5) << "\" y1=\"" << detail::svg_num(y)
        << "\" x2=\"" << detail::svg_num(ml) << "\" y2=\"" << detail::svg_num(y)
        << "\" stroke=\"#444\"/>\n";
    char dbuf[32];
    std::snprintf(dbuf, sizeof(dbuf), "%.3g", d);
    out << "<text x=\"" << detail::svg_num(ml - 9) << "\" y=\"" << detail::svg_num(y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\" "
           "text-anchor=\"end\">"
        << dbuf << "</text>\n";
  }
  out << "<text x=\"" << detail::svg_num(ml + pw / 2) << "\" y=\""
      << detail::svg_num(height - 14)
      << "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#222\" "
         "text-anchor=\"middle\">slice index</text>\n";
  out << "<text x=\"18\" y=\"" << detail::svg_num(mt + ph / 2)
      << "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#222\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << detail::svg_num(mt + ph / 2) << ")\">gaze density</text>\n";

  // Curves and degenerate markers.
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const auto& p = profiles[i];
    const char* color = detail::kCurvePalette[i % detail::kCurvePalette.size()];
    if (p.empty) continue;
    if (p.degenerate) {
      const double x = sx(p.degenerate_slice);
      out << "<line class=\"degenerate-marker\" x1=\"" << detail::svg_num(x) << "\" y1=\""
          << detail::svg_num(sy(0)) << "\" x2=\"" << detail::svg_num(x) << "\" y2=\""
          << detail::svg_num(sy(ymax * 0.8)) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\" stroke-dasharray=\"5,3\"/>\n";
      continue;
    }
    out << "<polyline class=\"density-curve\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t g = 0; g < p.density.size(); ++g) {
      if (g) out << ' ';
      out << detail::svg_num(sx(p.slice_axis[g])) << ',' << detail::svg_num(sy(p.density[g]));
    }
    out << "\"/>\n";
  }

  // Legend: one entry per window with its duration.
  const double lx = ml + pw + 18;
  double ly = mt + 8;
  out << "<text x=\"" << detail::svg_num(lx) << "\" y=\"" << detail::svg_num(ly)
      << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">time windows</text>\n";
  ly += 10;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const auto& p = profiles[i];
    const char* color = detail::kCurvePalette[i % detail::kCurvePalette.size()];
    ly += 18;
    char label[96];
    const double dur = p.t_end - p.t_start;
    if (p.empty)
      std::snprintf(label, sizeof(label), "w%zu: %.2f s (no samples)", i, dur);
    else if (p.degenerate)
      std::snprintf(label, sizeof(label), "w%zu: %.2f s (slice %d only)", i, dur,
                    p.degenerate_slice);
    else
      std::snprintf(label, sizeof(label), "w%zu: %.2f s", i, dur);
    out << "<line x1=\"" << detail::svg_num(lx) << "\" y1=\"" << detail::svg_num(ly - 4)
        << "\" x2=\"" << detail::svg_num(lx + 22) << "\" y2=\"" << detail::svg_num(ly - 4)
        << "\" stroke=\"" << (p.empty ? "#bbb" : color) << "\" stroke-width=\"2\""
        << (p.degenerate ? " stroke-dasharray=\"5,3\"" : "") << "/>\n";
    out << "<text x=\"" << detail::svg_num(lx + 28) << "\" y=\"" << detail::svg_num(ly)
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">"
        << detail::svg_escape(label) << "</text>\n";
  }

  out << "</svg>\n";
  if (!out) throw InputError("failed while writing SVG file: " + path);
}

}  // namespace volgaze
