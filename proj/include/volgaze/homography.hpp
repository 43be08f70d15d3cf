#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "volgaze/common.hpp"

namespace volgaze {

struct Vec2 {
  double x = 0;
  double y = 0;
};

/// A correspondence between a reference-image point and a scene point.
struct PointPair {
  Vec2 src;  // reference (CT image) coordinates
  Vec2 dst;  // scene (screen capture) coordinates
};

/// Plane projective map stored in the image(src) -> scene(dst) direction,
/// normalized so h[2][2] == 1.
struct Homography {
  std::array<std::array<double, 3>, 3> h{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  int inlier_count = 0;
  double reprojection_rmse = 0.0;

  static Homography identity() { return Homography{}; }
};

/// Forward application (src -> dst) with projective division.
inline Vec2 apply_homography(const Homography& H, double x, double y) {
  const auto& h = H.h;
  const double w = h[2][0] * x + h[2][1] * y + h[2][2];
  if (std::abs(w) < 1e-12)
    throw AlignmentError("homography maps point to the plane at infinity");
  return {(h[0][0] * x + h[0][1] * y + h[0][2]) / w,
          (h[1][0] * x + h[1][1] * y + h[1][2]) / w};
}

inline double homography_det(const Homography& H) {
  const auto& h = H.h;
  return h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1]) -
         h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0]) +
         h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0]);
}

/// Inverse map (dst -> src); the adjugate is rescaled so h[2][2] == 1.
inline Homography invert_homography(const Homography& H) {
  const double det = homography_det(H);
  if (std::abs(det) < 1e-15) throw AlignmentError("homography is singular");
  const auto& h = H.h;
  std::array<std::array<double, 3>, 3> a{};  // adjugate / det
  a[0][0] = (h[1][1] * h[2][2] - h[1][2] * h[2][1]) / det;
  a[0][1] = (h[0][2] * h[2][1] - h[0][1] * h[2][2]) / det;
  a[0][2] = (h[0][1] * h[1][2] - h[0][2] * h[1][1]) / det;
  a[1][0] = (h[1][2] * h[2][0] - h[1][0] * h[2][2]) / det;
  a[1][1] = (h[0][0] * h[2][2] - h[0][2] * h[2][0]) / det;
  a[1][2] = (h[0][2] * h[1][0] - h[0][0] * h[1][2]) / det;
  a[2][0] = (h[1][0] * h[2][1] - h[1][1] * h[2][0]) / det;
  a[2][1] = (h[0][1] * h[2][0] - h[0][0] * h[2][1]) / det;
  a[2][2] = (h[0][0] * h[1][1] - h[0][1] * h[1][0]) / det;
  if (std::abs(a[2][2]) < 1e-15) throw AlignmentError("inverse homography is degenerate");
  Homography out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.h[r][c] = a[r][c] / a[2][2];
  out.inlier_count = H.inlier_count;
  out.reprojection_rmse = H.reprojection_rmse;
  return out;
}

namespace detail {

struct NormalizeResult {
  std::vector<Vec2> pts;
  // Similarity transform T: p_hat = (p - centroid) * scale, as a 3x3 matrix.
  double scale = 1.0;
  Vec2 centroid;
};

/// Hartley conditioning: centroid to origin, mean distance sqrt(2).
inline NormalizeResult hartley_normalize(const std::vector<Vec2>& pts) {
  NormalizeResult r;
  double cx = 0, cy = 0;
  for (const auto& p : pts) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(pts.size());
  cy /= static_cast<double>(pts.size());
  double mean_dist = 0;
  for (const auto& p : pts) mean_dist += std::hypot(p.x - cx, p.y - cy);
  mean_dist /= static_cast<double>(pts.size());
  r.scale = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
  r.centroid = {cx, cy};
  r.pts.reserve(pts.size());
  for (const auto& p : pts) r.pts.push_back({(p.x - cx) * r.scale, (p.y - cy) * r.scale});
  return r;
}

/// Direct linear transform on normalized coordinates; returns false when the
/// system is numerically rank-deficient or yields a non-invertible matrix.
inline bool dlt_homography(const std::vector<PointPair>& pairs, Homography& out) {
  const auto n = pairs.size();
  std::vector<Vec2> src(n), dst(n);
  for (std::size_t i = 0; i < n; ++i) {
    src[i] = pairs[i].src;
    dst[i] = pairs[i].dst;
  }
  const auto ns = hartley_normalize(src);
  const auto nd = hartley_normalize(dst);

  Eigen::MatrixXd A(2 * static_cast<Eigen::Index>(n), 9);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ns.pts[i].x, y = ns.pts[i].y;
    const double u = nd.pts[i].x, v = nd.pts[i].y;
    const auto r0 = static_cast<Eigen::Index>(2 * i);
    A.row(r0) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
    A.row(r0 + 1) << x, y, 1, 0, 0, 0, -u * x, -u * y, -u;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  if (svd.rank() < 8) return false;
  const Eigen::VectorXd hv = svd.matrixV().col(8);

  Eigen::Matrix3d Hn;
  Hn << hv(0), hv(1), hv(2), hv(3), hv(4), hv(5), hv(6), hv(7), hv(8);
  // Denormalize: H = T_dst^{-1} * Hn * T_src.
  Eigen::Matrix3d Ts, TdInv;
  Ts << ns.scale, 0, -ns.scale * ns.centroid.x, 0, ns.scale, -ns.scale * ns.centroid.y, 0, 0, 1;
  TdInv << 1.0 / nd.scale, 0, nd.centroid.x, 0, 1.0 / nd.scale, nd.centroid.y, 0, 0, 1;
  Eigen::Matrix3d H = TdInv * Hn * Ts;
  if (std::abs(H(2, 2)) < 1e-12 || std::abs(H.determinant()) < 1e-15) return false;
  H /= H(2, 2);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.h[r][c] = H(r, c);
  return true;
}

inline bool three_collinear(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  const double len = std::max(1.0, std::hypot(b.x - a.x, b.y - a.y) *
                                       std::hypot(c.x - a.x, c.y - a.y));
  return std::abs(cross) <= 1e-6 * len;
}

/// True when any 3 of the 4 sampled pairs are collinear on either side.
inline bool degenerate_sample(const std::array<PointPair, 4>& s) {
  static constexpr int kTriples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  for (const auto& t : kTriples) {
    if (three_collinear(s[t[0]].src, s[t[1]].src, s[t[2]].src)) return true;
    if (three_collinear(s[t[0]].dst, s[t[1]].dst, s[t[2]].dst)) return true;
  }
  return false;
}

inline double reprojection_error(const Homography& H, const PointPair& p) {
  const auto& h = H.h;
  const double w = h[2][0] * p.src.x + h[2][1] * p.src.y + h[2][2];
  if (std::abs(w) < 1e-12) return std::numeric_limits<double>::infinity();
  const double u = (h[0][0] * p.src.x + h[0][1] * p.src.y + h[0][2]) / w;
  const double v = (h[1][0] * p.src.x + h[1][1] * p.src.y + h[1][2]) / w;
  return std::hypot(u - p.dst.x, v - p.dst.y);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  const auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
  return std::min(i, n - 1);
}

}  // namespace detail

/// Robust src->dst homography from point correspondences: RANSAC over
/// normalized-DLT minimal fits with adaptive early exit at 99% confidence,
/// then a least-squares refit on the best inlier set. Reports the inlier
/// count and the reprojection RMSE of the refit model over those inliers.
inline Homography estimate_homography(const std::vector<PointPair>& pairs,
                                      double ransac_px = 3.0, std::uint64_t seed = 0,
                                      int max_iters = 2000) {
  if (pairs.size() < 4)
    throw AlignmentError("homography estimation requires at least 4 point pairs, got " +
                         std::to_string(pairs.size()));
  if (!(ransac_px > 0)) throw InputError("RANSAC threshold must be positive");

  const std::size_t n = pairs.size();
  Rng rng(seed);
  std::vector<int> best_inliers;
  Homography best_model;
  bool have_model = false;
  bool saw_degenerate = false;
  const double kConfidence = 0.99;
  int needed_iters = max_iters;

  for (int iter = 0; iter < std::min(needed_iters, max_iters); ++iter) {
    std::array<std::size_t, 4> idx{};
    if (n == 4) {
      idx = {0, 1, 2, 3};
    } else {
      for (int k = 0; k < 4; ++k) {
        bool fresh;
        do {
          idx[k] = detail::uniform_index(rng, n);
          fresh = true;
          for (int j = 0; j < k; ++j)
            if (idx[j] == idx[k]) fresh = false;
        } while (!fresh);
      }
    }
    std::array<PointPair, 4> sample{pairs[idx[0]], pairs[idx[1]], pairs[idx[2]],
                                    pairs[idx[3]]};
    if (detail::degenerate_sample(sample)) {
      saw_degenerate = true;
      if (n == 4) break;  // the only possible sample is degenerate
      continue;
    }
    Homography cand;
    if (!detail::dlt_homography({sample.begin(), sample.end()}, cand)) {
      saw_degenerate = true;
      if (n == 4) break;
      continue;
    }
    std::vector<int> inliers;
    for (std::size_t i = 0; i < n; ++i)
      if (detail::reprojection_error(cand, pairs[i]) <= ransac_px)
        inliers.push_back(static_cast<int>(i));
    if (inliers.size() > best_inliers.size()) {
      best_inliers = std::move(inliers);
      best_model = cand;
      have_model = true;
      const double w = static_cast<double>(best_inliers.size()) / static_cast<double>(n);
      const double p_all = std::pow(w, 4);
      if (p_all >= 1.0 - 1e-12) {
        needed_iters = iter + 1;
      } else if (p_all > 0) {
        const double ni = std::log(1.0 - kConfidence) / std::log(1.0 - p_all);
        needed_iters = static_cast<int>(std::min<double>(max_iters, std::ceil(ni)));
      }
    }
    if (n == 4) break;  // exhaustive: a single minimal sample exists
  }

  if (!have_model || best_inliers.size() < 4) {
    if (saw_degenerate && !have_model)
      throw AlignmentError("degenerate point configuration: collinear samples in all attempts");
    throw AlignmentError("alignment failed: fewer than 4 RANSAC inliers after " +
                         std::to_string(max_iters) + " iterations");
  }

  std::vector<PointPair> inlier_pairs;
  inlier_pairs.reserve(best_inliers.size());
  for (int i : best_inliers) inlier_pairs.push_back(pairs[i]);
  Homography refined = best_model;
  if (!detail::dlt_homography(inlier_pairs, refined)) refined = best_model;

  // Iterate refit <-> consensus until the inlier set stabilizes. The minimal
  // sample's consensus set is biased toward that sample's tilt; re-collecting
  // inliers under each least-squares fit removes the dependence on which
  // minimal sample happened to win.
  for (int round = 0; round < 10; ++round) {
    std::vector<int> consensus;
    for (std::size_t i = 0; i < n; ++i)
      if (detail::reprojection_error(refined, pairs[i]) <= ransac_px)
        consensus.push_back(static_cast<int>(i));
    if (consensus.size() < 4 || consensus == best_inliers) break;
    std::vector<PointPair> next_pairs;
    next_pairs.reserve(consensus.size());
    for (int i : consensus) next_pairs.push_back(pairs[i]);
    Homography next = refined;
    if (!detail::dlt_homography(next_pairs, next)) break;
    best_inliers = std::move(consensus);
    inlier_pairs = std::move(next_pairs);
    refined = next;
  }

  double se = 0;
  for (const auto& p : inlier_pairs) {
    const double e = detail::reprojection_error(refined, p);
    se += e * e;
  }
  refined.inlier_count = static_cast<int>(inlier_pairs.size());
  refined.reprojection_rmse = std::sqrt(se / static_cast<double>(inlier_pairs.size()));
  return refined;
}

/// Scene-pixel -> image-pixel map: the inverse of the stored image->scene
/// homography with projective division. The result is not clamped; callers
/// decide whether it falls inside the displayed image.
inline Vec2 map_gaze(const Homography& image_to_scene, double scene_x, double scene_y) {
  const Homography inv = invert_homography(image_to_scene);
  return apply_homography(inv, scene_x, scene_y);
}

}  // namespace volgaze
