// Raster primitives: normalization, resize, rotation, blur, PGM and PNG I/O.

#include <catch2/catch_amalgamated.hpp>

#include <png.h>

#include <cstdio>
#include <vector>

#include "test_support.hpp"
#include "volgaze/image.hpp"
#include "volgaze/png_io.hpp"

using namespace volgaze;
using testsupport::TempDir;

namespace {

// Minimal 8-bit grayscale PNG writer, used only to create fixtures; the
// library itself only reads PNG.
void write_gray_png(const std::string& path, const Image8& img) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  REQUIRE(fp != nullptr);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  REQUIRE(png != nullptr);
  REQUIRE(info != nullptr);
  REQUIRE(setjmp(png_jmpbuf(png)) == 0);
  png_init_io(png, fp);
  png_set_IHDR(png, info, img.w, img.h, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(img.h);
  for (int y = 0; y < img.h; ++y)
    rows[y] = const_cast<png_bytep>(img.px.data() + static_cast<std::size_t>(y) * img.w);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace

TEST_CASE("min-max normalization maps extremes to 0 and 255", "[image]") {
  const std::vector<float> data{10.f, 20.f, 30.f, 20.f};
  const Image8 img = to_gray8(data, 2, 2);
  CHECK(img.at(0, 0) == 0);
  CHECK(img.at(0, 1) == 255);
  CHECK(img.at(1, 0) == 128);  // midpoint rounds to 128

  const Image8 flat = to_gray8({5.f, 5.f, 5.f, 5.f}, 2, 2);
  for (auto v : flat.px) CHECK(v == 0);
}

TEST_CASE("bilinear resize preserves a constant field and identity size", "[image]") {
  Image8 src(8, 6);
  for (auto& p : src.px) p = 77;
  const Image8 up = bilinear_resize(src, 13, 9);
  REQUIRE(up.w == 13);
  REQUIRE(up.h == 9);
  for (auto v : up.px) CHECK(v == 77);

  const Image8 same = bilinear_resize(testsupport::textured_image(16, 16, 3), 16, 16);
  const Image8 orig = testsupport::textured_image(16, 16, 3);
  CHECK(same.px == orig.px);  // scale 1 samples the original grid exactly
}

TEST_CASE("four quarter-turns compose to the identity", "[image]") {
  const Image8 img = testsupport::textured_image(21, 13, 11);
  const Image8 r1 = rotate90cw(img);
  REQUIRE(r1.w == img.h);
  REQUIRE(r1.h == img.w);
  CHECK(r1.at(img.h - 1 - 2, 5) == img.at(5, 2));
  const Image8 back = rotate90cw(rotate90cw(rotate90cw(r1)));
  CHECK(back.px == img.px);
  CHECK(rotate180(rotate180(img)).px == img.px);
}

TEST_CASE("gaussian blur preserves constants and reduces contrast", "[image]") {
  Image8 flat(16, 16);
  for (auto& p : flat.px) p = 100;
  CHECK(gaussian_blur7(flat).px == flat.px);

  Image8 step(32, 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) step.at(x, y) = x < 16 ? 0 : 255;
  const Image8 soft = gaussian_blur7(step);
  // the hard edge becomes a ramp: strictly between the extremes at the seam
  CHECK(soft.at(15, 16) > 0);
  CHECK(soft.at(16, 16) < 255);
  CHECK(soft.at(0, 16) == 0);
  CHECK(soft.at(31, 16) == 255);
}

TEST_CASE("PGM round-trip is byte-exact and rejects malformed headers", "[image]") {
  TempDir dir;
  const Image8 img = testsupport::textured_image(33, 17, 5);
  const auto path = dir.file("img.pgm");
  write_pgm(img, path);
  const Image8 back = read_pgm(path);
  REQUIRE(back.w == img.w);
  REQUIRE(back.h == img.h);
  CHECK(back.px == img.px);

  testsupport::spit(dir.file("bad.pgm"), "P2\n3 3\n255\n");
  CHECK_THROWS_AS(read_pgm(dir.file("bad.pgm")), InputError);
  testsupport::spit(dir.file("short.pgm"), "P5\n4 4\n255\nxy");
  CHECK_THROWS_AS(read_pgm(dir.file("short.pgm")), InputError);
  CHECK_THROWS_AS(read_pgm(dir.file("absent.pgm")), InputError);
}

TEST_CASE("PNG reader recovers an 8-bit grayscale image exactly", "[image]") {
  TempDir dir;
  const Image8 img = testsupport::textured_image(40, 25, 9);
  const auto path = dir.file("img.png");
  write_gray_png(path, img);
  const Image8 back = read_png_gray8(path);
  REQUIRE(back.w == img.w);
  REQUIRE(back.h == img.h);
  CHECK(back.px == img.px);

  // dispatch by extension
  const Image8 dispatched = read_image_gray8(path);
  CHECK(dispatched.px == img.px);

  testsupport::spit(dir.file("junk.png"), "not a png at all");
  CHECK_THROWS_AS(read_png_gray8(dir.file("junk.png")), InputError);
}
