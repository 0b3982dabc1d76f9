#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// A draw is a pure function of a 128-bit counter and a 64-bit key, which lets
// every noise value be addressed directly by (seed, stream, mode, step) instead
// of by position in a sequential stream.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace mkv {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter apply(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

  static constexpr Key key_from_seed(std::uint64_t seed) noexcept {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter single_round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Uniform double in the open interval (0, 1) from the top 52 of 64 random
/// bits; with 53 the largest value would round up to 1.
constexpr double uniform_open(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Two independent standard normals addressed by (seed, a, b, c) where a is a
/// 64-bit index (typically the time step) and b, c are 32-bit stream tags.
inline std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t a, std::uint32_t b,
                                             std::uint32_t c) noexcept {
  const auto out = Philox4x32::apply(
      {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), b, c}, Philox4x32::key_from_seed(seed));
  const double u1 = uniform_open((static_cast<std::uint64_t>(out[1]) << 32) | out[0]);
  const double u2 = uniform_open((static_cast<std::uint64_t>(out[3]) << 32) | out[2]);
  // Box-Muller
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace mkv
