#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "volgaze/common.hpp"
#include "volgaze/image.hpp"
#include "volgaze/orb_pattern.hpp"

namespace volgaze {

/// Detector configuration. Defaults are the classic ORB choices: FAST-9 with
/// intensity threshold 20, Harris ranking, 8 pyramid levels at scale 1.2,
/// 256-bit steered BRIEF over a 31x31 patch.
struct OrbParams {
  int n_levels = 8;
  double scale_factor = 1.2;
  int fast_threshold = 20;
  int border = 19;  // exclusion border per level; covers patch rotation reach
};

struct Keypoint {
  double x = 0;  // base-image coordinates
  double y = 0;
  double response = 0;  // Harris corner score
  double angle = 0;     // intensity-centroid orientation, radians
  int octave = 0;       // pyramid level
};

/// 256-bit binary descriptor, packed LSB-first into four 64-bit words.
struct Descriptor {
  std::array<std::uint64_t, 4> words{};

  bool bit(int i) const { return (words[i >> 6] >> (i & 63)) & 1; }
  void set_bit(int i) { words[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
};

inline int hamming_distance(const Descriptor& a, const Descriptor& b) {
  int d = 0;
  for (int i = 0; i < 4; ++i) d += std::popcount(a.words[i] ^ b.words[i]);
  return d;
}

struct OrbFeature {
  Keypoint kp;
  Descriptor desc;
};

namespace detail {

// Bresenham circle of radius 3, clockwise from the top pixel.
inline constexpr int kCircleDx[16] = {0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1};
inline constexpr int kCircleDy[16] = {-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3};

/// FAST-9 corner score at (x, y): the largest contiguous-arc contrast sum over
/// runs of at least 9 pixels all brighter than p+t or all darker than p-t.
/// Returns 0 when (x, y) is not a corner.
inline double fast9_score(const Image8& img, int x, int y, int t) {
  const int p = img.at(x, y);
  int cls[32];    // 1 bright, -1 dark, 0 neither; doubled for circular runs
  double mag[32]; // contrast beyond threshold
  for (int k = 0; k < 16; ++k) {
    const int v = img.at(x + kCircleDx[k], y + kCircleDy[k]);
    int c = 0;
    double m = 0;
    if (v > p + t) {
      c = 1;
      m = v - p - t;
    } else if (v < p - t) {
      c = -1;
      m = p - t - v;
    }
    cls[k] = cls[k + 16] = c;
    mag[k] = mag[k + 16] = m;
  }
  double best = 0;
  int run = 0;
  double sum = 0;
  for (int k = 0; k < 32; ++k) {
    if (k > 0 && cls[k] == cls[k - 1] && cls[k] != 0) {
      ++run;
      sum += mag[k];
    } else {
      run = cls[k] != 0 ? 1 : 0;
      sum = mag[k];
    }
    if (cls[k] != 0 && run >= 9) best = std::max(best, sum);
    if (run >= 25) break;  // full circle covered
  }
  return best;
}

/// Harris corner measure over a 7x7 block with Sobel-style gradients.
inline double harris_response(const Image8& img, int x0, int y0) {
  constexpr int kBlock = 7;
  constexpr double kHarrisK = 0.04;
  const double scale = 1.0 / ((1 << 2) * kBlock * 255.0);
  const double scale_sq_sq = scale * scale * scale * scale;
  double a = 0, b = 0, c = 0;
  for (int dy = -kBlock / 2; dy <= kBlock / 2; ++dy)
    for (int dx = -kBlock / 2; dx <= kBlock / 2; ++dx) {
      const int x = x0 + dx;
      const int y = y0 + dy;
      const double ix = (img.at(x + 1, y) - img.at(x - 1, y)) * 2.0 +
                        (img.at(x + 1, y - 1) - img.at(x - 1, y - 1)) +
                        (img.at(x + 1, y + 1) - img.at(x - 1, y + 1));
      const double iy = (img.at(x, y + 1) - img.at(x, y - 1)) * 2.0 +
                        (img.at(x - 1, y + 1) - img.at(x - 1, y - 1)) +
                        (img.at(x + 1, y + 1) - img.at(x + 1, y - 1));
      a += ix * ix;
      b += iy * iy;
      c += ix * iy;
    }
  return (a * b - c * c - kHarrisK * (a + b) * (a + b)) * scale_sq_sq;
}

/// Intensity-centroid orientation over the radius-15 disk.
inline double intensity_centroid_angle(const Image8& img, int x0, int y0) {
  constexpr int kR = 15;
  double m01 = 0, m10 = 0;
  for (int dy = -kR; dy <= kR; ++dy)
    for (int dx = -kR; dx <= kR; ++dx) {
      if (dx * dx + dy * dy > kR * kR) continue;
      const double v = img.at(x0 + dx, y0 + dy);
      m10 += dx * v;
      m01 += dy * v;
    }
  return std::atan2(m01, m10);
}

/// Steered 256-bit BRIEF descriptor sampled from the blurred level image.
inline Descriptor steered_brief(const Image8& blurred, int cx, int cy, double angle) {
  const double ca = std::cos(angle);
  const double sa = std::sin(angle);
  Descriptor d;
  for (int i = 0; i < 256; ++i) {
    const int x1 = kBriefPattern31[4 * i + 0];
    const int y1 = kBriefPattern31[4 * i + 1];
    const int x2 = kBriefPattern31[4 * i + 2];
    const int y2 = kBriefPattern31[4 * i + 3];
    const int c1 = cx + static_cast<int>(std::lround(x1 * ca - y1 * sa));
    const int r1 = cy + static_cast<int>(std::lround(x1 * sa + y1 * ca));
    const int c2 = cx + static_cast<int>(std::lround(x2 * ca - y2 * sa));
    const int r2 = cy + static_cast<int>(std::lround(x2 * sa + y2 * ca));
    if (blurred.at_clamped(c1, r1) < blurred.at_clamped(c2, r2)) d.set_bit(i);
  }
  return d;
}

struct LevelCandidate {
  int x, y, level;
  double response;
};

}  // namespace detail

/// ORB keypoints and descriptors: FAST-9 corners with 3x3 non-max suppression,
/// ranked by Harris response across an 8-level pyramid, oriented by intensity
/// centroid, described by steered BRIEF. Keypoint coordinates are reported in
/// base-image pixels. A flat image yields an empty list.
inline std::vector<OrbFeature> detect_orb(const Image8& img, int max_features,
                                          const OrbParams& params = {}) {
  if (img.w < 32 || img.h < 32)
    throw InputError("image too small for feature detection (minimum 32x32): " +
                     std::to_string(img.w) + "x" + std::to_string(img.h));
  if (max_features < 1) throw InputError("max_features must be positive");

  std::vector<Image8> levels;
  std::vector<double> level_scale;
  for (int l = 0; l < params.n_levels; ++l) {
    const double s = std::pow(params.scale_factor, l);
    const int lw = static_cast<int>(std::lround(img.w / s));
    const int lh = static_cast<int>(std::lround(img.h / s));
    if (lw < 2 * params.border + 5 || lh < 2 * params.border + 5) break;
    levels.push_back(l == 0 ? img : bilinear_resize(img, lw, lh));
    level_scale.push_back(s);
  }

  std::vector<detail::LevelCandidate> candidates;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const Image8& li = levels[l];
    const int b = params.border;
    std::vector<double> score(static_cast<std::size_t>(li.w) * li.h, 0.0);
    for (int y = b; y < li.h - b; ++y)
      for (int x = b; x < li.w - b; ++x)
        score[static_cast<std::size_t>(y) * li.w + x] =
            detail::fast9_score(li, x, y, params.fast_threshold);
    for (int y = b; y < li.h - b; ++y)
      for (int x = b; x < li.w - b; ++x) {
        const double s = score[static_cast<std::size_t>(y) * li.w + x];
        if (s <= 0) continue;
        bool is_max = true;
        for (int dy = -1; dy <= 1 && is_max; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (score[static_cast<std::size_t>(y + dy) * li.w + (x + dx)] >= s) {
              is_max = false;
              break;
            }
          }
        if (is_max)
          candidates.push_back({x, y, static_cast<int>(l), detail::harris_response(li, x, y)});
      }
  }

  std::sort(candidates.begin(), candidates.end(),
            [](const detail::LevelCandidate& a, const detail::LevelCandidate& b) {
              if (a.response != b.response) return a.response > b.response;
              if (a.level != b.level) return a.level < b.level;
              if (a.y != b.y) return a.y < b.y;
              return a.x < b.x;
            });
  if (static_cast<int>(candidates.size()) > max_features) candidates.resize(max_features);

  std::vector<Image8> blurred(levels.size());
  std::vector<bool> blur_done(levels.size(), false);
  std::vector<OrbFeature> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (!blur_done[c.level]) {
      blurred[c.level] = gaussian_blur7(levels[c.level]);
      blur_done[c.level] = true;
    }
    OrbFeature f;
    f.kp.x = c.x * level_scale[c.level];
    f.kp.y = c.y * level_scale[c.level];
    f.kp.response = c.response;
    f.kp.octave = c.level;
    f.kp.angle = detail::intensity_centroid_angle(levels[c.level], c.x, c.y);
    f.desc = detail::steered_brief(blurred[c.level], c.x, c.y, f.kp.angle);
    out.push_back(f);
  }
  return out;
}

}  // namespace volgaze
