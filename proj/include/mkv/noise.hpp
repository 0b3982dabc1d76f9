#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "mkv/philox.hpp"
#include "mkv/spectral_field.hpp"

namespace mkv {

/// Complex standard normals xi_k for k = 0 .. J/2 at one time step. Real and
/// imaginary parts are independent N(0, 1/2), so E|xi_k|^2 = 1; xi_{-k} is
/// conj(xi_k) implicitly. Entries k = 0 and k = J/2 are always zero.
struct NoiseDraw {
  std::vector<Complex> xi;
};

/// Counter-addressed source of NoiseDraws. The value for mode k at step n of
/// trial t is a pure function of (seed, n, k, t): it does not depend on the
/// resolution of the run asking for it, which is what lets runs at different
/// J or dt share one Brownian path.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed, std::uint32_t trial = 0) noexcept : seed_(seed), trial_(trial) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint32_t trial() const noexcept { return trial_; }

  Complex xi(std::uint64_t step, int k) const noexcept {
    const auto [re, im] = normal_pair(seed_, step, static_cast<std::uint32_t>(k), trial_);
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
  }

  /// Fills xi for k = 1 .. J/2-1 into out (size J/2+1).
  void fill(std::uint64_t step, std::span<Complex> out) const noexcept {
    if (out.empty()) return;
    out.front() = {};
    out.back() = {};
    for (std::size_t k = 1; k + 1 < out.size(); ++k) out[k] = xi(step, static_cast<int>(k));
  }

  NoiseDraw draw(std::uint64_t step, std::size_t modes) const {
    NoiseDraw d{std::vector<Complex>(modes / 2 + 1)};
    fill(step, d.xi);
    return d;
  }

 private:
  std::uint64_t seed_;
  std::uint32_t trial_;
};

/// (1 - exp(-x)) / x with its removable singularity at x = 0.
inline double phi1(double x) noexcept {
  if (std::abs(x) < 1e-8) return 1.0 - 0.5 * x + x * x / 6.0;
  return -std::expm1(-x) / x;
}

/// Standard deviation factor of the exact stochastic convolution over one
/// step, lambda * sqrt((1 - exp(-2 sigma k^2 dt)) / (2 sigma k^2)).
inline double ou_increment_scale(double lambda, double sigma, int k, double dt) noexcept {
  const double rate = sigma * static_cast<double>(k) * static_cast<double>(k);
  return lambda * std::sqrt(dt * phi1(2.0 * rate * dt));
}

}  // namespace mkv
