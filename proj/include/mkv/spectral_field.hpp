#pragma once

// Real periodic fields on [0, 2pi) stored as truncated Fourier series.
//
// Basis and normalization conventions used throughout the library:
//
//   e_k(x) = exp(ikx) / sqrt(2 pi)                  (orthonormal in L^2)
//   u(x)   = sum_{k=-J/2+1}^{J/2} u_k e_k(x)
//   u_k    = (sqrt(2 pi) / M) * DFT_k(u(x_0), ..., u(x_{M-1})),   x_j = 2 pi j / M
//   u(x_j) = IDFT_j(u_k) / sqrt(2 pi)                (unnormalized inverse DFT)
//
// With this basis the L^2 norm is the Euclidean norm of the coefficient vector,
// the mean value is u_0 / sqrt(2 pi) and the trapezoid rule on a uniform grid is
// the quadrature everywhere.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "mkv/errors.hpp"
#include "mkv/fft.hpp"

namespace mkv {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline const double kSqrtTwoPi = std::sqrt(kTwoPi);

/// Uniform grid x_j = 2 pi j / M.
inline std::vector<double> uniform_grid(std::size_t m) {
  std::vector<double> x(m);
  for (std::size_t j = 0; j < m; ++j) x[j] = kTwoPi * static_cast<double>(j) / static_cast<double>(m);
  return x;
}

/// Truncated Fourier representation of a real field with J (even) modes.
///
/// Only the coefficients k = 0 .. J/2 are stored; negative modes follow from
/// conjugate symmetry u_{-k} = conj(u_k). The zero mode is kept real and the
/// Nyquist mode k = J/2 is pinned to zero, so every stored field is the
/// spectrum of a real function.
class SpectralField {
 public:
  SpectralField() = default;

  explicit SpectralField(std::size_t modes) : modes_(modes), coeffs_(modes / 2 + 1) {
    if (modes < 2 || modes % 2 != 0)
      throw ShapeError("SpectralField: mode count must be even and >= 2, got " + std::to_string(modes));
  }

  /// Resolved mode count J.
  std::size_t modes() const noexcept { return modes_; }

  /// Largest |k| that may carry a nonzero coefficient (J/2 - 1).
  int max_wavenumber() const noexcept { return static_cast<int>(modes_ / 2) - 1; }

  /// Coefficient u_k for any k in [-J/2+1, J/2]; zero outside the band.
  Complex operator()(int k) const noexcept {
    const int a = k < 0 ? -k : k;
    if (a > max_wavenumber()) return {};
    return k < 0 ? std::conj(coeffs_[a]) : coeffs_[a];
  }

  /// Sets u_k (and u_{-k} implicitly). k = 0 keeps only the real part.
  void set(int k, Complex value) {
    const int a = k < 0 ? -k : k;
    if (a > max_wavenumber())
      throw ShapeError("SpectralField::set: |k| = " + std::to_string(a) + " outside resolved band of J = " +
                       std::to_string(modes_));
    if (k < 0) value = std::conj(value);
    if (a == 0) value = {value.real(), 0.0};
    coeffs_[a] = value;
  }

  /// Stored half spectrum, entries k = 0 .. J/2. Writers must keep entry 0
  /// real and the last entry zero, or call canonicalize() afterwards.
  std::span<Complex> half_spectrum() noexcept { return coeffs_; }
  std::span<const Complex> half_spectrum() const noexcept { return coeffs_; }

  void canonicalize() noexcept {
    if (coeffs_.empty()) return;
    coeffs_.front() = {coeffs_.front().real(), 0.0};
    coeffs_.back() = {};
  }

  bool is_canonical() const noexcept {
    return coeffs_.empty() || (coeffs_.front().imag() == 0.0 && coeffs_.back() == Complex{});
  }

  /// Squared L^2 norm, sum over the full band of |u_k|^2.
  double norm_squared() const noexcept {
    if (coeffs_.empty()) return 0.0;
    double acc = std::norm(coeffs_[0]);
    for (std::size_t k = 1; k + 1 < coeffs_.size(); ++k) acc += 2.0 * std::norm(coeffs_[k]);
    return acc;
  }

  double norm() const noexcept { return std::sqrt(norm_squared()); }

  bool all_finite() const noexcept {
    return std::all_of(coeffs_.begin(), coeffs_.end(),
                       [](const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
  }

  SpectralField& operator+=(const SpectralField& o) {
    require_same_modes(o, "operator+=");
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
    return *this;
  }

  SpectralField& operator-=(const SpectralField& o) {
    require_same_modes(o, "operator-=");
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
    return *this;
  }

  SpectralField& operator*=(double s) noexcept {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(SpectralField a, double s) { return a *= s; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

  friend bool operator==(const SpectralField&, const SpectralField&) = default;

 private:
  void require_same_modes(const SpectralField& o, const char* where) const {
    if (o.modes_ != modes_)
      throw ShapeError(std::string("SpectralField::") + where + ": mode counts differ (" + std::to_string(modes_) +
                       " vs " + std::to_string(o.modes_) + ")");
  }

  std::size_t modes_ = 0;
  std::vector<Complex> coeffs_;
};

/// Real inner product <a, b> in L^2.
inline double inner(const SpectralField& a, const SpectralField& b) {
  if (a.modes() != b.modes()) throw ShapeError("inner: mode counts differ");
  const auto x = a.half_spectrum();
  const auto y = b.half_spectrum();
  double acc = (x[0] * std::conj(y[0])).real();
  for (std::size_t k = 1; k + 1 < x.size(); ++k) acc += 2.0 * (x[k] * std::conj(y[k])).real();
  return acc;
}

/// Evaluates the field into a transform's real buffer (size M >= J).
inline void to_real(const SpectralField& field, fft::RealTransform& work) {
  const std::size_t m = work.size();
  if (m < field.modes())
    throw ResolutionError("to_real: grid of " + std::to_string(m) + " points cannot resolve J = " +
                          std::to_string(field.modes()));
  auto spec = work.spectrum();
  const auto src = field.half_spectrum();
  const double scale = 1.0 / kSqrtTwoPi;
  std::fill(spec.begin(), spec.end(), Complex{});
  for (std::size_t k = 0; k < src.size(); ++k) spec[k] = src[k] * scale;
  work.backward();
}

/// Samples of the field on the uniform grid of M points.
inline std::vector<double> to_real(const SpectralField& field, std::size_t m) {
  fft::RealTransform work(m);
  to_real(field, work);
  return {work.real().begin(), work.real().end()};
}

/// Coefficients of the samples currently in work.real(), truncated to J modes.
inline SpectralField to_fourier(fft::RealTransform& work, std::size_t modes) {
  const std::size_t m = work.size();
  if (modes > m) throw ResolutionError("to_fourier: cannot extract more modes than samples");
  work.forward();
  SpectralField out(modes);
  auto dst = out.half_spectrum();
  const auto spec = work.spectrum();
  const double scale = kSqrtTwoPi / static_cast<double>(m);
  for (std::size_t k = 0; k + 1 < dst.size(); ++k) dst[k] = spec[k] * scale;
  out.canonicalize();
  return out;
}

/// Coefficients of a real sample array on the uniform grid; J = samples.size().
inline SpectralField to_fourier(std::span<const double> samples) {
  const std::size_t m = samples.size();
  if (m < 2 || m % 2 != 0)
    throw ShapeError("to_fourier: sample count must be even and >= 2, got " + std::to_string(m));
  fft::RealTransform work(m);
  std::copy(samples.begin(), samples.end(), work.real().begin());
  return to_fourier(work, m);
}

/// Spectral derivative: u_k -> ik u_k.
inline SpectralField derivative(SpectralField field) {
  auto c = field.half_spectrum();
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= Complex(0.0, static_cast<double>(k));
  field.canonicalize();
  return field;
}

/// Zeroes every mode outside the band of a J_target-mode field (its Nyquist
/// mode included); the mode count of the result is unchanged.
inline SpectralField project(SpectralField field, std::size_t target_modes) {
  if (target_modes % 2 != 0 || target_modes > field.modes())
    throw ConfigError("project: target mode count must be even and <= " + std::to_string(field.modes()) + ", got " +
                      std::to_string(target_modes));
  auto c = field.half_spectrum();
  for (std::size_t k = target_modes / 2; k < c.size(); ++k) c[k] = {};
  return field;
}

/// Same function represented with a different mode count (zero padding or
/// truncation).
inline SpectralField resized(const SpectralField& field, std::size_t modes) {
  SpectralField out(modes);
  auto dst = out.half_spectrum();
  const auto src = field.half_spectrum();
  const std::size_t n = std::min(dst.size(), src.size()) - 1;
  std::copy_n(src.begin(), n, dst.begin());
  out.canonicalize();
  return out;
}

/// Pointwise product evaluated on the 2J grid and projected back to J modes;
/// free of aliasing for products of two J-mode fields.
inline SpectralField dealiased_product(const SpectralField& a, const SpectralField& b) {
  if (a.modes() != b.modes()) throw ShapeError("dealiased_product: mode counts differ");
  const std::size_t m = 2 * a.modes();
  fft::RealTransform wa(m);
  fft::RealTransform wb(m);
  to_real(a, wa);
  to_real(b, wb);
  auto ra = wa.real();
  const auto rb = wb.real();
  for (std::size_t j = 0; j < m; ++j) ra[j] *= rb[j];
  return to_fourier(wa, a.modes());
}

/// Field whose samples on a fine auxiliary grid are f(x); useful for building
/// analytic initial data. The grid has 2J points.
template <class Fn>
SpectralField from_function(Fn&& f, std::size_t modes) {
  const std::size_t m = 2 * modes;
  fft::RealTransform work(m);
  auto r = work.real();
  for (std::size_t j = 0; j < m; ++j) r[j] = f(kTwoPi * static_cast<double>(j) / static_cast<double>(m));
  return to_fourier(work, modes);
}

}  // namespace mkv
