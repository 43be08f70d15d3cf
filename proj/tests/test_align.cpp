// Scene-to-volume alignment: slice identification and homography recovery on
// synthetic slices with distinct textures.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_support.hpp"
#include "volgaze/align.hpp"

using namespace volgaze;

namespace {

// A volume whose axial slices carry distinct random textures, so that slice
// identity is recoverable from appearance.
Volume textured_volume(int nx, int ny, int nz, std::uint64_t seed) {
  Volume v;
  v.dims = {nx, ny, nz};
  v.voxels.resize(static_cast<std::size_t>(nx) * ny * nz);
  for (int z = 0; z < nz; ++z) {
    const Image8 img = testsupport::textured_image(nx, ny, seed + 1000 * z);
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x)
        v.voxels[v.index(x, y, z)] = static_cast<float>(img.at(x, y));
  }
  return v;
}

double corner_error(const Homography& a, const Homography& b, double w, double h) {
  double worst = 0;
  const double corners[4][2] = {{0, 0}, {w - 1, 0}, {w - 1, h - 1}, {0, h - 1}};
  for (const auto& c : corners) {
    const Vec2 pa = apply_homography(a, c[0], c[1]);
    const Vec2 pb = apply_homography(b, c[0], c[1]);
    worst = std::max(worst, std::hypot(pa.x - pb.x, pa.y - pb.y));
  }
  return worst;
}

}  // namespace

TEST_CASE("aligning a slice against itself yields a near-identity map", "[align]") {
  const Volume vol = textured_volume(160, 160, 4, 500);
  const Image8 ref = vol.slice_gray8(2);
  const Homography h = align_scene(ref, ref, 3.0, 1);
  CHECK(h.inlier_count >= 50);
  CHECK(h.reprojection_rmse < 1.0);
  CHECK(corner_error(h, Homography::identity(), 160, 160) < 1.0);
}

TEST_CASE("slice inference picks the displayed slice from a capture", "[align]") {
  const Volume vol = textured_volume(160, 160, 6, 900);
  std::vector<int> all{0, 1, 2, 3, 4, 5};

  SECTION("exact capture") {
    const SliceInference inf = infer_slice(vol.slice_gray8(3), vol, all, 3.0, 2);
    CHECK(inf.z == 3);
    CHECK(inf.h.inlier_count >= 50);
  }

  SECTION("warped capture") {
    Homography warp;  // mild projective view of the screen
    warp.h = {{{1.05, 0.04, 6.0}, {-0.03, 0.97, 4.0}, {1e-4, -8e-5, 1.0}}};
    const Image8 scene = testsupport::warp_image(vol.slice_gray8(4), warp, 160, 160);
    const SliceInference inf = infer_slice(scene, vol, all, 3.0, 3);
    CHECK(inf.z == 4);
    CHECK(corner_error(inf.h, warp, 160, 160) < 2.0);
  }

  SECTION("featureless scene cannot align") {
    Image8 flat(160, 160);
    for (auto& p : flat.px) p = 90;
    CHECK_THROWS_AS(infer_slice(flat, vol, all, 3.0, 4), AlignmentError);
  }

  SECTION("candidate validation") {
    CHECK_THROWS_AS(infer_slice(vol.slice_gray8(0), vol, {0, 6}, 3.0, 5), InputError);
    CHECK_THROWS_AS(infer_slice(vol.slice_gray8(0), vol, {}, 3.0, 5), InputError);
  }
}

TEST_CASE("alignment refuses featureless inputs", "[align]") {
  Image8 flat(64, 64);
  for (auto& p : flat.px) p = 10;
  const Image8 rich = testsupport::textured_image(64, 64, 77);
  CHECK_THROWS_AS(align_scene(flat, rich), AlignmentError);
  CHECK_THROWS_AS(align_scene(rich, flat), AlignmentError);
}
