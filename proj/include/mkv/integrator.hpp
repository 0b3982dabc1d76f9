#pragma once

// Spectral Galerkin discretization in space with exponential Euler-Maruyama
// stepping in time. Per mode k and step n:
//
//   u_{k,n+1} = e^{-sigma k^2 dt} u_{k,n}
//             + (1 - e^{-sigma k^2 dt}) / (sigma k^2) * N_k(u_n)
//             + zeta_{k,n+1}
//
// where N_k = ik P_J[ (V' u)^_k + ((F' * u) u)^_k ] is the nonlinear drift and
// zeta is the exact stochastic convolution of the noise over the step,
// lambda_k sqrt((1 - e^{-2 sigma k^2 dt}) / (2 sigma k^2)) xi_{k,n+1}.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mkv/errors.hpp"
#include "mkv/fft.hpp"
#include "mkv/model.hpp"
#include "mkv/noise.hpp"
#include "mkv/observables.hpp"
#include "mkv/spectral_field.hpp"

namespace mkv {

/// Initial datum: a named profile or explicit coefficients (k, u_k).
struct InitialCondition {
  enum class Kind { sin_squared, uniform, coefficients };

  Kind kind = Kind::sin_squared;
  std::vector<std::pair<int, Complex>> coefficients;

  static InitialCondition sin_squared() { return {}; }
  static InitialCondition uniform() { return {Kind::uniform, {}}; }
  static InitialCondition from_coefficients(std::vector<std::pair<int, Complex>> c) {
    return {Kind::coefficients, std::move(c)};
  }

  /// (1/pi) sin^2 x and 1/(2 pi) both carry unit mass.
  SpectralField build(std::size_t modes) const {
    switch (kind) {
      case Kind::sin_squared:
        return from_function([](double x) { return std::sin(x) * std::sin(x) / std::numbers::pi; }, modes);
      case Kind::uniform:
        return from_function([](double) { return 1.0 / kTwoPi; }, modes);
      case Kind::coefficients: {
        SpectralField u(modes);
        for (const auto& [k, c] : coefficients) {
          if (std::abs(k) > u.max_wavenumber()) continue;
          u.set(k, c);
        }
        return u;
      }
    }
    return SpectralField(modes);
  }
};

struct SimConfig {
  double dt = 1e-2;
  double t_max = 3e4;
  std::size_t modes = 64;
  std::uint64_t seed = 1;
  std::uint32_t trial = 0;
  std::size_t snapshot_stride = 100;
  bool store_snapshots = true;
  InitialCondition initial_condition;

  void validate() const {
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!(t_max >= 0.0)) throw ConfigError("t_max must be >= 0");
    if (modes < 2 || modes % 2 != 0) throw ConfigError("J must be even and >= 2");
    if (snapshot_stride == 0) throw ConfigError("snapshot_stride must be >= 1");
  }

  std::size_t step_count() const {
    return static_cast<std::size_t>(std::ceil(t_max / dt * (1.0 - 1e-12)));
  }
};

/// Reusable workspace for the fully discrete update at a fixed (model, dt).
class Stepper {
 public:
  Stepper(const ModelSpec& spec, double dt)
      : spec_(spec),
        dt_(dt),
        grid_(2 * spec.modes()),
        conv_(2 * spec.modes()),
        decay_(spec.modes() / 2 + 1),
        weight_(spec.modes() / 2 + 1),
        noise_scale_(spec.modes() / 2 + 1),
        drift_(spec.modes()),
        increment_(spec.modes() / 2 + 1) {
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    const auto noise = spec.noise();
    for (std::size_t k = 0; k < decay_.size(); ++k) {
      const double rate = spec.sigma() * static_cast<double>(k * k);
      decay_[k] = std::exp(-rate * dt);
      weight_[k] = dt * phi1(rate * dt);
      noise_scale_[k] = ou_increment_scale(noise.lambdas[k], spec.sigma(), static_cast<int>(k), dt);
    }
    noise_scale_.front() = 0.0;
    noise_scale_.back() = 0.0;
  }

  const ModelSpec& model() const noexcept { return spec_; }
  double dt() const noexcept { return dt_; }
  std::span<const double> decay() const noexcept { return decay_; }
  std::span<const double> noise_scale() const noexcept { return noise_scale_; }
  bool noisy() const noexcept { return spec_.gamma() > 0.0; }

  /// N(u) = ik P_J[(V' + F' * u) u]^_k with products on the 2J grid.
  void drift(const SpectralField& u, SpectralField& out) {
    const std::size_t modes = spec_.modes();
    if (u.modes() != modes) throw ShapeError("drift: field mode count does not match the model");
    if (out.modes() != modes) out = SpectralField(modes);

    to_real(u, grid_);

    auto cs = conv_.spectrum();
    std::fill(cs.begin(), cs.end(), Complex{});
    const auto fp = spec_.fprime().half_spectrum();
    const auto uc = u.half_spectrum();
    // sqrt(2pi) from the convolution theorem, 1/sqrt(2pi) from synthesis.
    for (std::size_t k = 0; k < uc.size(); ++k) cs[k] = fp[k] * uc[k];
    conv_.backward();

    auto ur = grid_.real();
    const auto cr = conv_.real();
    const auto vp = spec_.vprime_grid();
    for (std::size_t j = 0; j < ur.size(); ++j) ur[j] *= vp[j] + cr[j];
    grid_.forward();

    const auto gs = grid_.spectrum();
    auto dst = out.half_spectrum();
    const double scale = kSqrtTwoPi / static_cast<double>(grid_.size());
    dst[0] = {};
    for (std::size_t k = 1; k + 1 < dst.size(); ++k) dst[k] = Complex(0.0, static_cast<double>(k)) * gs[k] * scale;
    dst.back() = {};
  }

  /// Scales a draw of xi into the stochastic convolution over one step.
  void noise_increment(std::span<const Complex> xi, std::span<Complex> out) const noexcept {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = noise_scale_[k] * xi[k];
  }

  /// Deterministic part of the update plus a precomputed stochastic
  /// convolution increment (entries k = 0 .. J/2; may be empty for none).
  void advance(SpectralField& u, std::span<const Complex> increment) {
    drift(u, drift_);
    auto c = u.half_spectrum();
    const auto d = drift_.half_spectrum();
    for (std::size_t k = 1; k + 1 < c.size(); ++k) c[k] = decay_[k] * c[k] + weight_[k] * d[k];
    if (!increment.empty())
      for (std::size_t k = 1; k + 1 < c.size(); ++k) c[k] += increment[k];
  }

  /// One step driven by the counter-addressed noise for step index n (the
  /// noise of the step t_n -> t_{n+1}).
  void advance(SpectralField& u, const NoiseStream& stream, std::uint64_t n) {
    if (!noisy()) {
      advance(u, std::span<const Complex>{});
      return;
    }
    stream.fill(n, increment_);
    noise_increment(increment_, increment_);
    advance(u, std::span<const Complex>(increment_));
  }

 private:
  ModelSpec spec_;
  double dt_;
  fft::RealTransform grid_;
  fft::RealTransform conv_;
  std::vector<double> decay_;
  std::vector<double> weight_;
  std::vector<double> noise_scale_;
  SpectralField drift_;
  std::vector<Complex> increment_;
};

/// Nonlinear drift ik P_J[(V' u)^ + ((F' * u) u)^] of the MKV operator (the
/// full spatial operator without the diffusion term).
inline SpectralField mkv_drift(const ModelSpec& spec, const SpectralField& u) {
  Stepper s(spec, 1.0);
  SpectralField out(spec.modes());
  s.drift(u, out);
  return out;
}

/// Full MKV operator drift + sigma u_xx; zero at stationary densities.
inline SpectralField mkv_operator(const ModelSpec& spec, const SpectralField& u) {
  return mkv_drift(spec, u) + spec.sigma() * derivative(derivative(u));
}

/// One fully discrete step driven by the given standard normals.
inline SpectralField step(const ModelSpec& spec, SpectralField u, double dt, const NoiseDraw& noise,
                          std::size_t step_index = 0) {
  Stepper s(spec, dt);
  if (noise.xi.size() != spec.modes() / 2 + 1) throw ShapeError("step: noise draw does not match J");
  std::vector<Complex> inc(noise.xi.size());
  s.noise_increment(noise.xi, inc);
  s.advance(u, inc);
  if (!u.all_finite()) throw DivergenceError("non-finite state", step_index);
  return u;
}

struct Trajectory {
  ObservableSeries series;
  std::vector<SpectralField> snapshots;
  std::size_t steps = 0;
};

/// Divergence that carries the trajectory up to the last finite snapshot.
class SimulationDiverged : public DivergenceError {
 public:
  SimulationDiverged(std::size_t step, Trajectory partial)
      : DivergenceError("simulation produced a non-finite state", step), partial_(std::move(partial)) {}

  const Trajectory& partial() const noexcept { return partial_; }

 private:
  Trajectory partial_;
};

/// Long-time integration. Stores the state at every snapshot_stride-th step
/// (and the final one) together with I1, I2, mass and the fraction of negative
/// samples on the 2J grid.
inline Trajectory simulate(const ModelSpec& spec, const SimConfig& config) {
  config.validate();
  if (config.modes != spec.modes())
    throw ConfigError("simulate: config J = " + std::to_string(config.modes) + " but model J = " +
                      std::to_string(spec.modes()));
  Stepper stepper(spec, config.dt);
  const NoiseStream stream(config.seed, config.trial);
  fft::RealTransform probe(2 * spec.modes());

  Trajectory traj;
  const std::size_t total = config.step_count();
  traj.steps = total;
  SpectralField u = config.initial_condition.build(spec.modes());

  const auto record = [&](std::size_t n) {
    to_real(u, probe);
    traj.series.push(static_cast<double>(n) * config.dt, u, negative_fraction(probe.real()));
    if (config.store_snapshots) traj.snapshots.push_back(u);
  };

  record(0);
  for (std::size_t n = 0; n < total; ++n) {
    stepper.advance(u, stream, n);
    if (!u.all_finite()) throw SimulationDiverged(n + 1, std::move(traj));
    if ((n + 1) % config.snapshot_stride == 0 || n + 1 == total) record(n + 1);
  }
  return traj;
}

inline HeatMap heatmap(const Trajectory& traj, std::size_t m) { return heatmap(traj.snapshots, m); }

/// Euler-Maruyama path of dY = -U'(Y) dt + sqrt(alpha) dB, keeping every
/// record_stride-th state (the initial state included).
inline std::vector<double> simulate_langevin(const std::function<double(double)>& u_prime, double alpha, double dt,
                                             double t_max, std::uint64_t seed, double y0 = 0.0,
                                             std::size_t record_stride = 1) {
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (record_stride == 0) throw ConfigError("record_stride must be >= 1");
  const auto total = static_cast<std::size_t>(std::ceil(t_max / dt * (1.0 - 1e-12)));
  const double amp = std::sqrt(alpha * dt);
  constexpr std::uint32_t kLangevinTag = 0x4c414e47u;  // "LANG"
  std::vector<double> path;
  path.reserve(total / record_stride + 2);
  path.push_back(y0);
  double y = y0;
  std::pair<double, double> pair{};
  for (std::size_t n = 0; n < total; ++n) {
    double xi = 0.0;
    if (amp > 0.0) {
      if (n % 2 == 0) pair = normal_pair(seed, n / 2, kLangevinTag, 0);
      xi = n % 2 == 0 ? pair.first : pair.second;
    }
    y += -u_prime(y) * dt + amp * xi;
    if ((n + 1) % record_stride == 0) path.push_back(y);
  }
  return path;
}

}  // namespace mkv
