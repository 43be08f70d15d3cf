#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "volgaze/common.hpp"
#include "volgaze/orb.hpp"

namespace volgaze {

struct Match {
  int query = -1;  // index into the first feature set
  int train = -1;  // index into the second feature set
  int distance = 0;
};

namespace detail {

/// Index of the nearest descriptor in `set` by Hamming distance; ties resolve
/// to the lowest index so matching is order-deterministic.
inline int nearest_descriptor(const Descriptor& d, const std::vector<OrbFeature>& set) {
  int best = -1;
  int best_dist = 257;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const int dist = hamming_distance(d, set[i].desc);
    if (dist < best_dist) {
      best_dist = dist;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace detail

/// Brute-force Hamming matching with cross-check: a pair survives only when
/// each descriptor is the other's nearest neighbour. Result is sorted by
/// ascending distance (ties by query index). Empty inputs are an error.
inline std::vector<Match> match_crosscheck(const std::vector<OrbFeature>& a,
                                           const std::vector<OrbFeature>& b) {
  if (a.empty() || b.empty())
    throw InputError("descriptor matching requires two non-empty feature sets");
  std::vector<Match> out;
  std::vector<int> b_to_a(b.size());
  for (std::size_t j = 0; j < b.size(); ++j)
    b_to_a[j] = detail::nearest_descriptor(b[j].desc, a);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int j = detail::nearest_descriptor(a[i].desc, b);
    if (j >= 0 && b_to_a[j] == static_cast<int>(i))
      out.push_back({static_cast<int>(i), j, hamming_distance(a[i].desc, b[j].desc)});
  }
  std::sort(out.begin(), out.end(), [](const Match& m, const Match& n) {
    if (m.distance != n.distance) return m.distance < n.distance;
    return m.query < n.query;
  });
  return out;
}

}  // namespace volgaze
