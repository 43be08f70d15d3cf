#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "volgaze/common.hpp"

namespace volgaze {

/// Foveal radius on screen for visual angle theta (degrees), viewing distance
/// (cm), and screen resolution (px/cm): r = tan(theta/2) * dist * ppc.
inline double foveal_radius(double theta_deg, double dist_cm, double ppc) {
  if (!(theta_deg > 0.0 && theta_deg < 30.0))
    throw InputError("visual angle must be in (0, 30) degrees, got " + format_double(theta_deg));
  if (!(dist_cm > 0.0)) throw InputError("viewing distance must be positive");
  if (!(ppc > 0.0)) throw InputError("pixels-per-cm must be positive");
  return std::tan(deg_to_rad(theta_deg) / 2.0) * dist_cm * ppc;
}

/// Screen-space foveal geometry and its image-space equivalent under a uniform
/// display scaling factor.
struct FovealModel {
  double theta_deg = 1.5;
  double dist_cm = 60.0;
  double ppc = 38.4;
  double scale = 0.2667;
  double r_screen = 0;  // px on screen
  double r_image = 0;   // px in reference image space, unrounded
};

inline FovealModel make_foveal_model(double theta_deg = 1.5, double dist_cm = 60.0,
                                     double ppc = 38.4, double scale = 0.2667) {
  if (!(scale > 0.0 && scale <= 1.0))
    throw InputError("scaling factor must be in (0, 1], got " + format_double(scale));
  FovealModel m;
  m.theta_deg = theta_deg;
  m.dist_cm = dist_cm;
  m.ppc = ppc;
  m.scale = scale;
  m.r_screen = foveal_radius(theta_deg, dist_cm, ppc);
  m.r_image = m.r_screen * scale;
  return m;
}

/// Image-space radius; rounding is presentation only, geometry stays unrounded.
inline double scaled_radius(const FovealModel& m, bool round_to_int) {
  const double r = m.r_screen * m.scale;
  return round_to_int ? std::round(r) : r;
}

/// All integer pixels within Euclidean distance r of (u, v), clipped to
/// [0, w) x [0, h). Membership test is (p-u)^2 + (q-v)^2 <= r^2.
inline std::vector<std::pair<int, int>> foveal_disk(double u, double v, double r, int w, int h) {
  std::vector<std::pair<int, int>> out;
  if (r < 0) return out;
  const int x0 = std::max(0, static_cast<int>(std::ceil(u - r)));
  const int x1 = std::min(w - 1, static_cast<int>(std::floor(u + r)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(v - r)));
  const int y1 = std::min(h - 1, static_cast<int>(std::floor(v + r)));
  const double r2 = r * r;
  for (int q = y0; q <= y1; ++q)
    for (int p = x0; p <= x1; ++p) {
      const double dx = p - u;
      const double dy = q - v;
      if (dx * dx + dy * dy <= r2) out.emplace_back(p, q);
    }
  return out;
}

}  // namespace volgaze
