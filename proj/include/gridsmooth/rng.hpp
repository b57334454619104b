#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "gridsmooth/errors.hpp"

namespace gridsmooth::rng {

// Reproducible random number generation. Every stochastic routine in the
// library owns an explicit stream derived from (seed, component indices),
// so parallel fills are independent of thread scheduling and results are
// bit-identical across runs. Distributions are sampled with fixed,
// library-independent algorithms (Box-Muller, inverse CDF, Marsaglia-Tsang)
// rather than <random> distributions, whose output is implementation-defined.

/// SplitMix64 finalizer (Steele, Lea & Flood), used for seeding and for
/// hashing stream coordinates.
inline std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derive a substream key from a master seed and up to three coordinates
/// (e.g. replication, curve, purpose tag).
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a,
                                   std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = mix64(seed + 0x9E3779B97F4A7C15ULL);
  h = mix64(h ^ (a + 0x9E3779B97F4A7C15ULL));
  h = mix64(h ^ (b + 0xBF58476D1CE4E5B9ULL));
  h = mix64(h ^ (c + 0x94D049BB133111EBULL));
  return h;
}

/// xoshiro256++ (Blackman & Vigna). State is seeded through SplitMix64.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) {
      sm += 0x9E3779B97F4A7C15ULL;
      word = mix64(sm);
    }
  }

  static Xoshiro256pp stream(std::uint64_t seed, std::uint64_t a,
                             std::uint64_t b = 0, std::uint64_t c = 0) {
    return Xoshiro256pp(derive_stream(seed, a, b, c));
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1); safe for logarithms.
  double uniform_open() {
    return static_cast<double>(next() >> 12) * 0x1.0p-52 + 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the paired variate is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Laplace with unit variance (scale 1/sqrt(2)).
  double laplace_std() {
    const double u = uniform_open();
    const double raw = (u < 0.5) ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u));
    return raw / std::sqrt(2.0);
  }

  /// Gamma(shape, 1) via Marsaglia-Tsang; requires shape >= 1.
  double gamma(double shape) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  /// Student-t with `dof` degrees of freedom, scaled to unit variance
  /// (requires dof > 2).
  double student_t_std(double dof) {
    if (!(dof > 2.0)) throw invalid_parameter("student_t requires dof > 2");
    const double z = normal();
    const double chi2 = 2.0 * gamma(0.5 * dof);
    const double t = z / std::sqrt(chi2 / dof);
    return t * std::sqrt((dof - 2.0) / dof);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace gridsmooth::rng
