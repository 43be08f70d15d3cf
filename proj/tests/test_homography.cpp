// Projective estimation: exact minimal fits, robustness to outliers,
// degeneracy detection, inversion, and gaze mapping.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "volgaze/common.hpp"
#include "volgaze/homography.hpp"

using namespace volgaze;

namespace {

Homography make_h(double a, double b, double tx, double c, double d, double ty, double px,
                  double py) {
  Homography h;
  h.h[0][0] = a;
  h.h[0][1] = b;
  h.h[0][2] = tx;
  h.h[1][0] = c;
  h.h[1][1] = d;
  h.h[1][2] = ty;
  h.h[2][0] = px;
  h.h[2][1] = py;
  h.h[2][2] = 1.0;
  return h;
}

Homography random_projective(Rng& rng) {
  return make_h(1.0 + uniform_range(rng, -0.15, 0.15), uniform_range(rng, -0.15, 0.15),
                uniform_range(rng, -40.0, 40.0), uniform_range(rng, -0.15, 0.15),
                1.0 + uniform_range(rng, -0.15, 0.15), uniform_range(rng, -40.0, 40.0),
                uniform_range(rng, -2e-4, 2e-4), uniform_range(rng, -2e-4, 2e-4));
}

double max_corner_error(const Homography& est, const Homography& truth, double extent) {
  double worst = 0;
  const double corners[4][2] = {{0, 0}, {extent, 0}, {extent, extent}, {0, extent}};
  for (const auto& c : corners) {
    const Vec2 a = apply_homography(est, c[0], c[1]);
    const Vec2 b = apply_homography(truth, c[0], c[1]);
    worst = std::max(worst, std::hypot(a.x - b.x, a.y - b.y));
  }
  return worst;
}

}  // namespace

TEST_CASE("four exact pairs reproduce the transform with zero residual", "[homography]") {
  const Homography truth = make_h(2.0, 0.1, 30.0, -0.05, 1.5, -12.0, 1e-4, -5e-5);
  std::vector<PointPair> pairs;
  const double pts[4][2] = {{0, 0}, {100, 10}, {90, 120}, {5, 95}};
  for (const auto& p : pts) {
    const Vec2 d = apply_homography(truth, p[0], p[1]);
    pairs.push_back({{p[0], p[1]}, {d.x, d.y}});
  }
  const Homography est = estimate_homography(pairs, 3.0, 1);
  CHECK(est.inlier_count == 4);
  CHECK(est.reprojection_rmse < 1e-8);
  CHECK(max_corner_error(est, truth, 128.0) < 1e-6);
  CHECK(est.h[2][2] == 1.0);  // normalized representation
}

TEST_CASE("identity correspondences give the identity map", "[homography]") {
  std::vector<PointPair> pairs;
  Rng rng(3);
  for (int i = 0; i < 12; ++i) {
    const double x = uniform_range(rng, 0.0, 200.0);
    const double y = uniform_range(rng, 0.0, 200.0);
    pairs.push_back({{x, y}, {x, y}});
  }
  const Homography est = estimate_homography(pairs, 3.0, 5);
  CHECK(est.inlier_count == 12);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      CHECK(std::abs(est.h[r][c] - (r == c ? 1.0 : 0.0)) < 1e-9);
}

TEST_CASE("RANSAC recovers a warp through 20 percent outliers", "[homography]") {
  Rng rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const Homography truth = random_projective(rng);
    std::vector<PointPair> pairs;
    const int n = 60;
    for (int i = 0; i < n; ++i) {
      const double x = uniform_range(rng, 20.0, 490.0);
      const double y = uniform_range(rng, 20.0, 490.0);
      const Vec2 d = apply_homography(truth, x, y);
      pairs.push_back({{x, y}, {d.x, d.y}});
    }
    for (int i = 0; i < n / 5; ++i) {  // corrupt 20%
      pairs[static_cast<std::size_t>(i) * 5].dst = {uniform_range(rng, -200.0, 700.0),
                                                    uniform_range(rng, -200.0, 700.0)};
    }
    const Homography est = estimate_homography(pairs, 3.0, 1000 + trial);
    CHECK(est.inlier_count >= (n * 4) / 5);
    CHECK(max_corner_error(est, truth, 511.0) < 1.0);
  }
}

TEST_CASE("collinear points are a degenerate configuration", "[homography]") {
  std::vector<PointPair> pairs;
  for (int i = 0; i < 4; ++i) {
    const double x = 10.0 * i;
    pairs.push_back({{x, 2.0 * x + 1.0}, {x + 5.0, 2.0 * x}});  // all on one line
  }
  CHECK_THROWS_AS(estimate_homography(pairs, 3.0, 0), AlignmentError);
  CHECK_THROWS_WITH(estimate_homography(pairs, 3.0, 0),
                    Catch::Matchers::ContainsSubstring("degenerate"));
}

TEST_CASE("fewer than four pairs cannot constrain a homography", "[homography]") {
  std::vector<PointPair> pairs{{{0, 0}, {1, 1}}, {{5, 0}, {6, 1}}, {{0, 5}, {1, 6}}};
  CHECK_THROWS_AS(estimate_homography(pairs), AlignmentError);
  CHECK_THROWS_AS(estimate_homography({}), AlignmentError);
  std::vector<PointPair> four{{{0, 0}, {0, 0}}, {{9, 0}, {9, 0}}, {{0, 9}, {0, 9}}, {{9, 9}, {9, 9}}};
  CHECK_THROWS_AS(estimate_homography(four, -1.0), InputError);
}

TEST_CASE("inversion composes to the identity on random points", "[homography]") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Homography h = random_projective(rng);
    const Homography inv = invert_homography(h);
    for (int i = 0; i < 10; ++i) {
      const double x = uniform_range(rng, -100.0, 600.0);
      const double y = uniform_range(rng, -100.0, 600.0);
      const Vec2 fwd = apply_homography(h, x, y);
      const Vec2 back = apply_homography(inv, fwd.x, fwd.y);
      CHECK(std::abs(back.x - x) < 1e-6);
      CHECK(std::abs(back.y - y) < 1e-6);
    }
  }
  CHECK_THROWS_AS(invert_homography(make_h(1, 0, 0, 2, 0, 0, 0, 0)), AlignmentError);
}

TEST_CASE("gaze mapping applies the inverse transform", "[homography]") {
  // image -> scene doubles both axes; a scene point maps back to half
  const Homography h = make_h(2, 0, 0, 0, 2, 0, 0, 0);
  const Vec2 p = map_gaze(h, 100.0, 200.0);
  CHECK(p.x == Catch::Approx(50.0));
  CHECK(p.y == Catch::Approx(100.0));

  const Vec2 q = map_gaze(Homography::identity(), 123.25, -4.5);
  CHECK(q.x == 123.25);
  CHECK(q.y == -4.5);
}

TEST_CASE("estimation is invariant to the sample order of inliers", "[homography]") {
  Rng rng(99);
  const Homography truth = random_projective(rng);
  std::vector<PointPair> pairs;
  for (int i = 0; i < 40; ++i) {
    const double x = uniform_range(rng, 0.0, 500.0);
    const double y = uniform_range(rng, 0.0, 500.0);
    const Vec2 d = apply_homography(truth, x, y);
    pairs.push_back({{x, y}, {d.x, d.y}});
  }
  auto shuffled = pairs;
  for (std::size_t i = shuffled.size(); i > 1; --i)
    std::swap(shuffled[i - 1], shuffled[static_cast<std::size_t>(uniform_range(rng, 0.0, static_cast<double>(i)))]);
  const Homography a = estimate_homography(pairs, 3.0, 7);
  const Homography b = estimate_homography(shuffled, 3.0, 8);
  CHECK(max_corner_error(a, b, 511.0) < 1e-6);  // all-inlier fits agree
}

TEST_CASE("projective division rejects points mapped to infinity", "[homography]") {
  // the line 1 + 0.01 x = 0 maps to infinity under this transform
  const Homography h = make_h(1, 0, 0, 0, 1, 0, 0.01, 0);
  CHECK_THROWS_AS(apply_homography(h, -100.0, 5.0), AlignmentError);
  CHECK(apply_homography(h, 0.0, 5.0).y == Catch::Approx(5.0));
}
