#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace locbound::rng {

/// Algorithm identifier written into result metadata so archived outputs can
/// be reproduced. Bump the suffix if any generation rule below changes.
inline constexpr const char* kAlgorithmId = "splitmix64;box-muller;ptrs-poisson;v1";

/// splitmix64 finalizer (Steele, Lea & Flood mixing constants).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Pure stream-seed derivation: derive(s, i) = mix64(s XOR mix64(i)).
/// Chaining calls gives independent streams per (trial, sensor, ...) path,
/// independent of execution order.
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(seed ^ mix64(index));
}

/// Deterministic 64-bit generator. All distributions below are implemented
/// explicitly (no std::*_distribution) so the streams are identical across
/// standard libraries.
class Stream {
public:
  explicit Stream(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (cosine branch; one draw per pair of
  /// uniforms, no cached state).
  double normal() noexcept {
    const double u1 = 1.0 - uniform01();  // (0, 1]; keeps log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Poisson draw. Product method for small means, Hormann's PTRS transformed
  /// rejection for mean >= 30.
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
      const double limit = std::exp(-mean);
      std::uint64_t k = 0;
      double p = uniform01();
      while (p > limit) {
        ++k;
        p *= uniform01();
      }
      return k;
    }
    return poisson_ptrs(mean);
  }

private:
  std::uint64_t poisson_ptrs(double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform01() - 0.5;
      const double v = uniform01();
      const double us = 0.5 - std::fabs(u);
      const double kr = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kr);
      if (kr < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          kr * loglam - mean - std::lgamma(kr + 1.0)) {
        return static_cast<std::uint64_t>(kr);
      }
    }
  }

  std::uint64_t state_;
};

}  // namespace locbound::rng
