#pragma once

#include <cmath>
#include <cstdint>

#include "slab/vec3.hpp"

namespace slab {

/// Counter-based deterministic RNG.
///
/// A stream is keyed by (seed, node, sample); draws within a stream advance a
/// splitmix64 state sequentially. Because the key fixes the stream completely,
/// any parallel partitioning of nodes reproduces identical numbers: thread
/// count never enters.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t node, std::uint64_t sample) {
    // Fold the three key components through the finalizer so nearby keys
    // (node n vs n+1, sample k vs k+1) land in unrelated stream positions.
    state_ = mix(seed + 0x9e3779b97f4a7c15ull);
    state_ = mix(state_ ^ mix(node + 0xbf58476d1ce4e5b9ull));
    state_ = mix(state_ ^ mix(sample + 0x94d049bb133111ebull));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  /// Uniform in (0,1): 53-bit mantissa, never exactly 0 (offset by half an ulp
  /// of the lattice) so logs are safe.
  double next_double() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the second member of each pair is cached.
  double next_gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  double next_exponential(double mean) { return -mean * std::log(next_double()); }

  /// Gamma(shape, 1) by Marsaglia-Tsang squeeze; shape < 1 handled with the
  /// standard u^(1/shape) boost.
  double next_gamma(double shape) {
    if (shape < 1.0) {
      const double u = next_double();
      return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = next_gaussian();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = next_double();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double next_beta(double a, double b) {
    const double ga = next_gamma(a);
    const double gb = next_gamma(b);
    return ga / (ga + gb);
  }

  /// Uniform direction on the unit sphere.
  Vec3 next_unit_vector() {
    const double c = 2.0 * next_double() - 1.0;
    const double s = std::sqrt(std::fmax(0.0, 1.0 - c * c));
    const double a = 6.283185307179586476925286766559 * next_double();
    return {c, s * std::cos(a), s * std::sin(a)};
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace slab
