#pragma once

// Linear stability of stationary densities.
//
// Linearizing the MKV operator about rho gives
//
//   L eta = sigma eta'' + d_x [ V' eta + (F' * eta) rho + (F' * rho) eta ],
//
// acting on mean-zero perturbations. Collocation on the uniform J-point grid:
//
//   L = sigma D2 + D ( diag(V'(x) + K rho) + diag(rho) K ),
//
// with D, D2 the periodic spectral differentiation matrices and K the
// trapezoid matrix of eta -> F' * eta, K_ij = F'(x_i - x_j) 2 pi / J.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "mkv/errors.hpp"
#include "mkv/model.hpp"
#include "mkv/spectral_field.hpp"
#include "mkv/stationary.hpp"

namespace mkv {

namespace detail {
inline void require_even_grid(std::size_t n, const char* where) {
  if (n < 2 || n % 2 != 0)
    throw ConfigError(std::string(where) + ": collocation grid size must be even and >= 2, got " + std::to_string(n));
}
}  // namespace detail

/// First-derivative matrix on the even periodic grid (dense Toeplitz).
inline Eigen::MatrixXd differentiation_matrix(std::size_t n) {
  detail::require_even_grid(n, "differentiation_matrix");
  const double h = kTwoPi / static_cast<double>(n);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const long k = static_cast<long>(i) - static_cast<long>(j);
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      d(i, j) = 0.5 * sign / std::tan(0.5 * h * static_cast<double>(k));
    }
  return d;
}

/// Second-derivative matrix on the even periodic grid. Unlike D*D it keeps the
/// Nyquist mode, whose eigenvalue is -(J/2)^2.
inline Eigen::MatrixXd second_derivative_matrix(std::size_t n) {
  detail::require_even_grid(n, "second_derivative_matrix");
  const double h = kTwoPi / static_cast<double>(n);
  const double diag = -std::numbers::pi * std::numbers::pi / (3.0 * h * h) - 1.0 / 6.0;
  Eigen::MatrixXd d2(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        d2(i, j) = diag;
        continue;
      }
      const long k = static_cast<long>(i) - static_cast<long>(j);
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      const double sn = std::sin(0.5 * h * static_cast<double>(k));
      d2(i, j) = -0.5 * sign / (sn * sn);
    }
  return d2;
}

/// Quadrature matrix of eta -> F' * eta on the J-point grid.
inline Eigen::MatrixXd convolution_matrix(const TrigSeries& f, std::size_t n) {
  const auto x = uniform_grid(n);
  const double w = kTwoPi / static_cast<double>(n);
  Eigen::MatrixXd k(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) k(i, j) = f.derivative(x[i] - x[j]) * w;
  return k;
}

/// Collocation matrix of the linearized operator about a stationary state.
/// The density is evaluated from its closed form on the collocation grid.
inline Eigen::MatrixXd build_linearized(const FixedPointResult& rho, const ModelSpec& spec, std::size_t n) {
  detail::require_even_grid(n, "build_linearized");
  if (std::abs(rho.sigma - spec.sigma()) > 1e-12 * std::max(1.0, spec.sigma()))
    throw ConfigError("build_linearized: stationary state computed for sigma = " + std::to_string(rho.sigma) +
                      " but the model has sigma = " + std::to_string(spec.sigma()));
  const SelfConsistency map(spec, std::max<std::size_t>(256, rho.rho_grid.size()));
  if (rho.moments.size() != map.dimension())
    throw ConfigError("build_linearized: stationary state does not match the model's interaction harmonics");
  const auto x = uniform_grid(n);
  const auto samples = map.sample(rho, x);
  const Eigen::Map<const Eigen::VectorXd> r(samples.data(), static_cast<Eigen::Index>(n));

  const Eigen::MatrixXd d = differentiation_matrix(n);
  const Eigen::MatrixXd k = convolution_matrix(spec.F(), n);
  Eigen::VectorXd a = k * r;
  for (std::size_t i = 0; i < n; ++i) a[static_cast<Eigen::Index>(i)] += spec.V().derivative(x[i]);

  Eigen::MatrixXd inner = r.asDiagonal() * k;
  inner.diagonal() += a;
  return spec.sigma() * second_derivative_matrix(n) + d * inner;
}

struct SpectrumOptions {
  double zero_tol = 1e-8;
  double mean_tol = 1e-6;
  double stability_tol = 1e-8;
};

struct SpectrumResult {
  /// Sorted by descending real part, spurious zero modes removed.
  std::vector<Complex> eigenvalues;
  Complex leading;
  Stability label = Stability::unknown;
  std::size_t filtered = 0;
};

namespace detail {

inline SpectrumResult finish_spectrum(std::vector<Complex> ev, std::size_t filtered, const SpectrumOptions& o) {
  std::stable_sort(ev.begin(), ev.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  SpectrumResult out;
  out.eigenvalues = std::move(ev);
  out.filtered = filtered;
  if (out.eigenvalues.empty()) throw NumericalError("spectrum: no eigenvalues left after filtering");
  out.leading = out.eigenvalues.front();
  out.label = out.leading.real() > o.stability_tol ? Stability::unstable : Stability::stable;
  return out;
}

inline std::string condition_report(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  return "norm " + std::to_string(s(0)) + ", condition " + std::to_string(s(0) / s(s.size() - 1));
}

}  // namespace detail

/// Dense nonsymmetric eigendecomposition. Eigenvalues within zero_tol of 0
/// whose eigenvectors carry a mean component (they violate the mean-zero
/// constraint on perturbations) are dropped.
inline SpectrumResult spectrum(const Eigen::MatrixXd& l, const SpectrumOptions& options = {}) {
  if (l.rows() != l.cols() || l.rows() == 0) throw ConfigError("spectrum: matrix must be square and nonempty");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(l, true);
  if (solver.info() != Eigen::Success)
    throw NumericalError("spectrum: eigensolver failed (" + detail::condition_report(l) + ")");
  const auto values = solver.eigenvalues();
  const auto vectors = solver.eigenvectors();
  const double root_n = std::sqrt(static_cast<double>(l.rows()));
  std::vector<Complex> kept;
  std::size_t filtered = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const Complex lambda = values[i];
    if (std::abs(lambda) <= options.zero_tol) {
      const auto v = vectors.col(i);
      const double mean = std::abs(v.sum()) / (root_n * v.norm());
      if (mean > options.mean_tol) {
        ++filtered;
        continue;
      }
    }
    kept.push_back(lambda);
  }
  return detail::finish_spectrum(std::move(kept), filtered, options);
}

/// Orthonormal basis (columns) of mean-zero grid functions: discrete cosines
/// and sines of wavenumbers 1 .. J/2-1 and the Nyquist cosine.
inline Eigen::MatrixXd mean_zero_basis(std::size_t n) {
  detail::require_even_grid(n, "mean_zero_basis");
  const auto x = uniform_grid(n);
  Eigen::MatrixXd q(n, n - 1);
  Eigen::Index col = 0;
  const double s = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t k = 1; k < n / 2; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      q(i, col) = s * std::cos(static_cast<double>(k) * x[i]);
      q(i, col + 1) = s * std::sin(static_cast<double>(k) * x[i]);
    }
    col += 2;
  }
  for (std::size_t i = 0; i < n; ++i) q(i, col) = (i % 2 == 0 ? 1.0 : -1.0) / std::sqrt(static_cast<double>(n));
  return q;
}

/// Spectrum of L restricted to the (invariant) mean-zero subspace.
inline SpectrumResult spectrum_mean_zero(const Eigen::MatrixXd& l, const SpectrumOptions& options = {}) {
  if (l.rows() != l.cols()) throw ConfigError("spectrum_mean_zero: matrix must be square");
  const Eigen::MatrixXd q = mean_zero_basis(static_cast<std::size_t>(l.rows()));
  const Eigen::MatrixXd reduced = q.transpose() * l * q;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(reduced, false);
  if (solver.info() != Eigen::Success)
    throw NumericalError("spectrum_mean_zero: eigensolver failed (" + detail::condition_report(reduced) + ")");
  std::vector<Complex> ev(solver.eigenvalues().begin(), solver.eigenvalues().end());
  return detail::finish_spectrum(std::move(ev), 0, options);
}

/// Builds L at resolution J, computes its spectrum and stores the label on
/// the stationary state.
inline SpectrumResult classify(FixedPointResult& rho, const ModelSpec& spec, std::size_t n = 128,
                               const SpectrumOptions& options = {}) {
  auto result = spectrum(build_linearized(rho, spec, n), options);
  rho.stability = result.label;
  return result;
}

}  // namespace mkv
