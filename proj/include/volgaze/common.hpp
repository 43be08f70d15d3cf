#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>

namespace volgaze {

/// Bad or missing input data (files, parameters, malformed rows). CLI exit code 1.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Scene-to-image alignment could not be established. CLI exit code 2.
struct AlignmentError : std::runtime_error {
  explicit AlignmentError(const std::string& what) : std::runtime_error(what) {}
};

/// A documented invariant was violated at runtime. CLI exit code 3.
struct InvariantError : std::runtime_error {
  explicit InvariantError(const std::string& what) : std::runtime_error(what) {}
};

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

/// Lossless double-to-text: shortest %.17g form round-trips exactly through strtod.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// All randomness in the library flows through explicitly seeded engines.
using Rng = std::mt19937_64;

/// Derive a stream-specific seed from a master seed (splitmix64 step).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform double in [0,1) from 53 random bits; stable across platforms.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Standard normal via Box-Muller; avoids std::normal_distribution so that
/// streams are bit-stable across standard library implementations.
inline double normal01(Rng& rng) {
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

/// Normal truncated at +-3 sigma by resampling.
inline double truncated_normal(Rng& rng, double sigma) {
  if (sigma <= 0.0) return 0.0;
  for (;;) {
    double z = normal01(rng);
    if (std::abs(z) <= 3.0) return z * sigma;
  }
}

}  // namespace volgaze
