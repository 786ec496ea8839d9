#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace gridshed {

// SplitMix64 finalizer. Also used to absorb key material when deriving
// per-scenario stream keys.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream-key derivation: iterated SplitMix64 absorption of
// (base_seed, hazard tag, day, scenario index). Every (hazard, day, k)
// task owns an independent stream, so neither generation order nor thread
// scheduling can change a draw.
inline std::uint64_t derive_stream_key(std::uint64_t base_seed, std::uint32_t hazard_tag,
                                       std::uint32_t day, std::uint32_t k) {
  std::uint64_t h = mix64(base_seed);
  h = mix64(h ^ (static_cast<std::uint64_t>(hazard_tag) + 1));
  h = mix64(h ^ static_cast<std::uint64_t>(day));
  h = mix64(h ^ static_cast<std::uint64_t>(k));
  return h;
}

/// xoshiro256++ with SplitMix64 state expansion. Self-contained so that
/// identical keys give identical draw sequences on any platform.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) {
    std::uint64_t x = key;
    for (auto& word : state_) {
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      word = z ^ (z >> 31);
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1]; safe under log().
  double next_unit_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  /// Standard normal via Box-Muller. The paired variate is discarded so a
  /// draw never leaves hidden state behind.
  double next_normal() {
    double u1 = next_unit_pos();
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Gamma(shape, 1) via Marsaglia-Tsang. Shapes below one use the
  /// boost gamma(a) = gamma(a+1) * U^(1/a).
  double next_gamma(double shape) {
    if (shape <= 0.0) throw std::invalid_argument("gamma shape must be positive");
    if (shape < 1.0) {
      double u = next_unit_pos();
      return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0;
      double v = 0.0;
      do {
        x = next_normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = next_unit_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int n) { return (x << n) | (x >> (64 - n)); }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace gridshed
