#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "volgaze/common.hpp"
#include "volgaze/homography.hpp"
#include "volgaze/image.hpp"
#include "volgaze/matching.hpp"
#include "volgaze/orb.hpp"
#include "volgaze/volume.hpp"

namespace volgaze {

/// Estimate the reference-image -> scene homography between a rendered CT
/// slice and a screen capture: ORB keypoints on both, cross-checked
/// brute-force matching, robust RANSAC fit.
inline Homography align_scene(const Image8& reference, const Image8& scene,
                              double ransac_px = 3.0, std::uint64_t seed = 0,
                              int max_features = 500) {
  const auto ref_feats = detect_orb(reference, max_features);
  const auto scene_feats = detect_orb(scene, max_features);
  if (ref_feats.size() < 4 || scene_feats.size() < 4)
    throw AlignmentError("too few keypoints for alignment (reference " +
                         std::to_string(ref_feats.size()) + ", scene " +
                         std::to_string(scene_feats.size()) + ")");
  const auto matches = match_crosscheck(ref_feats, scene_feats);
  std::vector<PointPair> pairs;
  pairs.reserve(matches.size());
  for (const auto& m : matches)
    pairs.push_back({{ref_feats[m.query].kp.x, ref_feats[m.query].kp.y},
                     {scene_feats[m.train].kp.x, scene_feats[m.train].kp.y}});
  if (pairs.size() < 4)
    throw AlignmentError("too few cross-checked matches for alignment: " +
                         std::to_string(pairs.size()));
  return estimate_homography(pairs, ransac_px, seed);
}

struct SliceInference {
  int z = -1;
  Homography h;  // image -> scene for the winning slice
};

/// Identify which slice a scene capture shows by aligning the scene against
/// each candidate slice; the winner maximizes inlier count, with ties broken
/// by lower reprojection RMSE and then lower slice index. Candidates that
/// fail to align are skipped; if none reaches 4 inliers the scene is
/// considered unalignable.
inline SliceInference infer_slice(const Image8& scene, const Volume& vol,
                                  const std::vector<int>& candidates,
                                  double ransac_px = 3.0, std::uint64_t seed = 0,
                                  int max_features = 500) {
  if (candidates.empty()) throw InputError("slice inference requires a non-empty candidate list");
  const auto scene_feats = detect_orb(scene, max_features);
  SliceInference best;
  for (int z : candidates) {
    if (z < 0 || z >= vol.dims[2])
      throw InputError("candidate slice index out of range: " + std::to_string(z));
    Homography h;
    try {
      const Image8 ref = vol.slice_gray8(z);
      const auto ref_feats = detect_orb(ref, max_features);
      if (ref_feats.size() < 4 || scene_feats.size() < 4) continue;
      const auto matches = match_crosscheck(ref_feats, scene_feats);
      std::vector<PointPair> pairs;
      pairs.reserve(matches.size());
      for (const auto& m : matches)
        pairs.push_back({{ref_feats[m.query].kp.x, ref_feats[m.query].kp.y},
                         {scene_feats[m.train].kp.x, scene_feats[m.train].kp.y}});
      if (pairs.size() < 4) continue;
      h = estimate_homography(pairs, ransac_px, seed);
    } catch (const AlignmentError&) {
      continue;
    }
    const bool better =
        best.z < 0 || h.inlier_count > best.h.inlier_count ||
        (h.inlier_count == best.h.inlier_count &&
         (h.reprojection_rmse < best.h.reprojection_rmse ||
          (h.reprojection_rmse == best.h.reprojection_rmse && z < best.z)));
    if (better) {
      best.z = z;
      best.h = h;
    }
  }
  if (best.z < 0)
    throw AlignmentError("no candidate slice aligned with the scene (all below 4 inliers)");
  return best;
}

}  // namespace volgaze
