#pragma once

// Problem definition for the McKean-Vlasov dynamics on the torus:
//
//   d_t u = d_x [ (V'(x) + (F' * u)(x)) u + sigma d_x u ] + Q^{1/2} dW/dt
//
// with Q diagonal in the Fourier basis, Q e_k = lambda_k^2 e_k.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mkv/errors.hpp"
#include "mkv/spectral_field.hpp"

namespace mkv {

/// One harmonic a cos(kx) + b sin(kx).
struct TrigTerm {
  int k = 1;
  double cos_coef = 0.0;
  double sin_coef = 0.0;
};

/// Real trigonometric polynomial without constant term. Potentials enter the
/// dynamics only through derivatives, so constants are irrelevant.
class TrigSeries {
 public:
  TrigSeries() = default;
  explicit TrigSeries(std::vector<TrigTerm> terms) : terms_(std::move(terms)) {
    for (const auto& t : terms_)
      if (t.k < 1) throw ConfigError("TrigSeries: harmonic index must be >= 1, got " + std::to_string(t.k));
  }

  static TrigSeries cosine(int k, double amplitude) { return TrigSeries({{k, amplitude, 0.0}}); }

  /// Integrates samples of a derivative g = f' (uniform grid, even length)
  /// spectrally. The mean of g must vanish for f to be periodic.
  static TrigSeries from_derivative_samples(std::span<const double> samples, double drop_below = 1e-14) {
    const SpectralField g = to_fourier(samples);
    std::vector<TrigTerm> terms;
    double scale = 0.0;
    for (int k = 1; k <= g.max_wavenumber(); ++k) scale = std::max(scale, std::abs(g(k)) / k);
    for (int k = 1; k <= g.max_wavenumber(); ++k) {
      const Complex fk = g(k) / Complex(0.0, static_cast<double>(k));
      if (std::abs(fk) <= drop_below * scale) continue;
      terms.push_back({k, 2.0 * fk.real() / kSqrtTwoPi, -2.0 * fk.imag() / kSqrtTwoPi});
    }
    return TrigSeries(std::move(terms));
  }

  const std::vector<TrigTerm>& terms() const noexcept { return terms_; }
  bool empty() const noexcept { return terms_.empty(); }

  int max_harmonic() const noexcept {
    int h = 0;
    for (const auto& t : terms_) h = std::max(h, t.k);
    return h;
  }

  double value(double x) const noexcept {
    double v = 0.0;
    for (const auto& t : terms_) v += t.cos_coef * std::cos(t.k * x) + t.sin_coef * std::sin(t.k * x);
    return v;
  }

  double derivative(double x) const noexcept {
    double v = 0.0;
    for (const auto& t : terms_) v += t.k * (t.sin_coef * std::cos(t.k * x) - t.cos_coef * std::sin(t.k * x));
    return v;
  }

  /// Fourier coefficients of the derivative in the e_k basis, J modes.
  SpectralField derivative_coefficients(std::size_t modes) const {
    SpectralField out(modes);
    for (const auto& t : terms_) {
      if (t.k > out.max_wavenumber()) continue;
      // a cos kx + b sin kx = sqrt(2pi)/2 * ((a - ib) e_k + (a + ib) e_{-k})
      const Complex ck = 0.5 * kSqrtTwoPi * Complex(t.cos_coef, -t.sin_coef);
      out.set(t.k, out(t.k) + Complex(0.0, static_cast<double>(t.k)) * ck);
    }
    return out;
  }

 private:
  std::vector<TrigTerm> terms_;
};

/// Per-mode noise amplitudes lambda_k for k = 0 .. J/2, symmetric in k.
struct NoiseSpec {
  std::vector<double> lambdas;

  double lambda(int k) const noexcept {
    const std::size_t a = static_cast<std::size_t>(k < 0 ? -k : k);
    return a < lambdas.size() ? lambdas[a] : 0.0;
  }

  static NoiseSpec power_law(double gamma, double s, std::size_t modes) {
    NoiseSpec n;
    n.lambdas.assign(modes / 2 + 1, 0.0);
    for (std::size_t k = 1; k < n.lambdas.size(); ++k) n.lambdas[k] = gamma / std::pow(static_cast<double>(k), s);
    return n;
  }
};

enum class Preset { double_well, four_well };

inline Preset parse_preset(std::string_view name) {
  if (name == "double_well") return Preset::double_well;
  if (name == "four_well") return Preset::four_well;
  throw ConfigError("unknown model preset '" + std::string(name) + "' (expected double_well or four_well)");
}

inline std::string_view preset_name(Preset p) { return p == Preset::double_well ? "double_well" : "four_well"; }

/// Diffusion, potentials and noise law, together with their discretization at
/// a fixed mode count J (V' sampled on the 2J grid, F' as J coefficients).
class ModelSpec {
 public:
  ModelSpec(double sigma, double gamma, double s, std::size_t modes, TrigSeries v, TrigSeries f)
      : sigma_(sigma), gamma_(gamma), s_(s), modes_(modes), v_(std::move(v)), f_(std::move(f)) {
    if (!(sigma > 0.0)) throw ConfigError("sigma must be > 0, got " + std::to_string(sigma));
    if (!(gamma >= 0.0)) throw ConfigError("gamma must be >= 0, got " + std::to_string(gamma));
    if (!(s > 0.5)) throw ConfigError("s must be > 1/2 for a trace-class noise covariance, got " + std::to_string(s));
    if (modes < 2 || modes % 2 != 0) throw ConfigError("J must be even and >= 2, got " + std::to_string(modes));
    if (s >= 1.0)
      warnings_.push_back("s = " + std::to_string(s) +
                          " >= 1: the noise is too smooth for the strong Feller property; uniqueness of the "
                          "invariant measure is not guaranteed");
    discretize();
  }

  double sigma() const noexcept { return sigma_; }
  double gamma() const noexcept { return gamma_; }
  double s() const noexcept { return s_; }
  std::size_t modes() const noexcept { return modes_; }
  const TrigSeries& V() const noexcept { return v_; }
  const TrigSeries& F() const noexcept { return f_; }

  /// V' on the 2J de-aliasing grid.
  std::span<const double> vprime_grid() const noexcept { return vprime_grid_; }
  /// Coefficients of F' (J modes).
  const SpectralField& fprime() const noexcept { return fprime_; }

  NoiseSpec noise() const { return NoiseSpec::power_law(gamma_, s_, modes_); }

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  ModelSpec with_modes(std::size_t modes) const { return {sigma_, gamma_, s_, modes, v_, f_}; }
  ModelSpec with_sigma(double sigma) const { return {sigma, gamma_, s_, modes_, v_, f_}; }
  ModelSpec with_noise(double gamma, double s) const { return {sigma_, gamma, s, modes_, v_, f_}; }
  ModelSpec with_potentials(TrigSeries v, TrigSeries f) const { return {sigma_, gamma_, s_, modes_, std::move(v), std::move(f)}; }

 private:
  void discretize() {
    const auto x = uniform_grid(2 * modes_);
    vprime_grid_.resize(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) vprime_grid_[j] = v_.derivative(x[j]);
    fprime_ = f_.derivative_coefficients(modes_);
  }

  double sigma_;
  double gamma_;
  double s_;
  std::size_t modes_;
  TrigSeries v_;
  TrigSeries f_;
  std::vector<double> vprime_grid_;
  SpectralField fprime_;
  std::vector<std::string> warnings_;
};

/// Built-in potentials: V = cos 2x (double well) or cos 4x (four wells), with
/// the attractive interaction F = -cos x in both cases.
inline ModelSpec preset(Preset which, double sigma, double gamma, double s, std::size_t modes) {
  const int wells = which == Preset::double_well ? 2 : 4;
  return {sigma, gamma, s, modes, TrigSeries::cosine(wells, 1.0), TrigSeries::cosine(1, -1.0)};
}

/// Periodic convolution with F' under the e_k basis:
/// (F' * u)_k = sqrt(2pi) F'_k u_k.
inline SpectralField convolve_fprime(const ModelSpec& spec, const SpectralField& u) {
  if (u.modes() != spec.modes())
    throw ShapeError("convolve_fprime: field has J = " + std::to_string(u.modes()) + " but the model has J = " +
                     std::to_string(spec.modes()));
  SpectralField out(u.modes());
  auto dst = out.half_spectrum();
  const auto a = spec.fprime().half_spectrum();
  const auto b = u.half_spectrum();
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = kSqrtTwoPi * a[k] * b[k];
  out.canonicalize();
  return out;
}

}  // namespace mkv
