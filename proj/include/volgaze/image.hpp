#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "volgaze/common.hpp"

namespace volgaze {

/// 8-bit grayscale raster, row-major, origin at the top-left pixel.
struct Image8 {
  int w = 0;
  int h = 0;
  std::vector<std::uint8_t> px;

  Image8() = default;
  Image8(int width, int height) : w(width), h(height), px(static_cast<std::size_t>(width) * height, 0) {}

  std::uint8_t at(int x, int y) const { return px[static_cast<std::size_t>(y) * w + x]; }
  std::uint8_t& at(int x, int y) { return px[static_cast<std::size_t>(y) * w + x]; }

  std::uint8_t at_clamped(int x, int y) const {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return at(x, y);
  }
};

/// Min-max normalize float samples to 8-bit. A constant field maps to all zeros.
inline Image8 to_gray8(const std::vector<float>& data, int w, int h) {
  Image8 img(w, h);
  float lo = data.empty() ? 0.f : data[0];
  float hi = lo;
  for (float v : data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi > lo) {
    const float s = 255.0f / (hi - lo);
    for (std::size_t i = 0; i < data.size(); ++i)
      img.px[i] = static_cast<std::uint8_t>(std::lround((data[i] - lo) * s));
  }
  return img;
}

inline Image8 bilinear_resize(const Image8& src, int nw, int nh) {
  Image8 dst(nw, nh);
  if (src.w < 1 || src.h < 1 || nw < 1 || nh < 1) return dst;
  const double sx = static_cast<double>(src.w) / nw;
  const double sy = static_cast<double>(src.h) / nh;
  for (int y = 0; y < nh; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    const int y0 = static_cast<int>(std::floor(fy));
    const double wy = fy - y0;
    for (int x = 0; x < nw; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      const int x0 = static_cast<int>(std::floor(fx));
      const double wx = fx - x0;
      const double v00 = src.at_clamped(x0, y0);
      const double v10 = src.at_clamped(x0 + 1, y0);
      const double v01 = src.at_clamped(x0, y0 + 1);
      const double v11 = src.at_clamped(x0 + 1, y0 + 1);
      const double v = v00 * (1 - wx) * (1 - wy) + v10 * wx * (1 - wy) + v01 * (1 - wx) * wy +
                       v11 * wx * wy;
      dst.at(x, y) = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
    }
  }
  return dst;
}

namespace detail {
inline const std::array<double, 7>& gauss7_kernel() {
  static const std::array<double, 7> k = [] {
    std::array<double, 7> a{};
    double s = 0;
    for (int i = -3; i <= 3; ++i) {
      a[i + 3] = std::exp(-(i * i) / 8.0);  // sigma = 2
      s += a[i + 3];
    }
    for (double& v : a) v /= s;
    return a;
  }();
  return k;
}
}  // namespace detail

/// Separable 7-tap Gaussian, sigma 2, clamped borders.
inline Image8 gaussian_blur7(const Image8& src) {
  const auto& kKernel = detail::gauss7_kernel();
  Image8 tmp(src.w, src.h), dst(src.w, src.h);
  for (int y = 0; y < src.h; ++y)
    for (int x = 0; x < src.w; ++x) {
      double acc = 0;
      for (int i = -3; i <= 3; ++i) acc += kKernel[i + 3] * src.at_clamped(x + i, y);
      tmp.at(x, y) = static_cast<std::uint8_t>(std::lround(acc));
    }
  for (int y = 0; y < src.h; ++y)
    for (int x = 0; x < src.w; ++x) {
      double acc = 0;
      for (int i = -3; i <= 3; ++i) acc += kKernel[i + 3] * tmp.at_clamped(x, y + i);
      dst.at(x, y) = static_cast<std::uint8_t>(std::lround(acc));
    }
  return dst;
}

/// Rotate 90 degrees clockwise: (x, y) -> (h-1-y, x).
inline Image8 rotate90cw(const Image8& src) {
  Image8 dst(src.h, src.w);
  for (int y = 0; y < src.h; ++y)
    for (int x = 0; x < src.w; ++x) dst.at(src.h - 1 - y, x) = src.at(x, y);
  return dst;
}

inline Image8 rotate180(const Image8& src) { return rotate90cw(rotate90cw(src)); }
inline Image8 rotate270cw(const Image8& src) { return rotate90cw(rotate180(src)); }

inline void write_pgm(const Image8& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open PGM for writing: " + path);
  out << "P5\n" << img.w << " " << img.h << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.px.data()), static_cast<std::streamsize>(img.px.size()));
}

inline Image8 read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open PGM file: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw InputError(path + ": not a binary PGM (P5) file");
  auto next_token = [&](const char* what) {
    // skip whitespace and '#' comments
    for (;;) {
      int c = in.peek();
      if (c == '#') {
        std::string junk;
        std::getline(in, junk);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
      if (!in) throw InputError(path + std::string(": truncated PGM header at ") + what);
    }
    long v = 0;
    in >> v;
    if (!in) throw InputError(path + std::string(": bad PGM header field ") + what);
    return v;
  };
  const long w = next_token("width");
  const long h = next_token("height");
  const long maxval = next_token("maxval");
  if (w < 1 || h < 1 || maxval != 255)
    throw InputError(path + ": unsupported PGM geometry or maxval");
  in.get();  // single whitespace after maxval
  Image8 img(static_cast<int>(w), static_cast<int>(h));
  in.read(reinterpret_cast<char*>(img.px.data()), static_cast<std::streamsize>(img.px.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.px.size()))
    throw InputError(path + ": PGM payload shorter than declared size");
  return img;
}

}  // namespace volgaze
