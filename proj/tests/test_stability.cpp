#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mkv/integrator.hpp"
#include "mkv/stability.hpp"

using namespace mkv;

TEST(Differentiation, SecondDerivativeSpectrumIncludesNyquist) {
  const std::size_t n = 16;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(second_derivative_matrix(n));
  std::vector<double> got(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::vector<double> expect{0.0, -64.0};
  for (int k = 1; k < 8; ++k) expect.insert(expect.end(), 2, -static_cast<double>(k * k));
  std::sort(got.begin(), got.end());
  std::sort(expect.begin(), expect.end());
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(got[i], expect[i], 1e-10) << i;
}

TEST(Differentiation, FirstDerivativeOfResolvedModes) {
  const std::size_t n = 32;
  const auto x = uniform_grid(n);
  Eigen::VectorXd f(n), df(n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = std::sin(3 * x[i]) + 0.5 * std::cos(7 * x[i]);
    df[i] = 3 * std::cos(3 * x[i]) - 3.5 * std::sin(7 * x[i]);
  }
  EXPECT_LT((differentiation_matrix(n) * f - df).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(differentiation_matrix(7), ConfigError);
}

TEST(Differentiation, ConvolutionMatrixOfCosine) {
  // sin * cos: int sin(x - y) cos y dy = pi sin x.
  const std::size_t n = 24;
  const auto x = uniform_grid(n);
  Eigen::VectorXd eta(n);
  for (std::size_t i = 0; i < n; ++i) eta[i] = std::cos(x[i]);
  const Eigen::VectorXd c = convolution_matrix(TrigSeries::cosine(1, -1.0), n) * eta;
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(c[i], std::numbers::pi * std::sin(x[i]), 1e-13);
}

TEST(Linearization, MatchesDerivativeOfTheSpectralOperator) {
  // The drift is quadratic in u, so a central difference of the full spectral
  // operator is its exact derivative.
  const std::size_t J = 64;
  const auto spec = preset(Preset::double_well, 0.6, 0.0, 0.75, J);
  const SelfConsistency map(spec);
  const auto root = find_fixed_points(spec).roots.back();
  const auto x = uniform_grid(2 * J);
  const auto rho = resized(to_fourier(map.sample(root, x)), J);

  SpectralField eta(J);
  eta.set(1, {0.2, -0.1});
  eta.set(2, {-0.05, 0.3});
  eta.set(5, {0.01, 0.02});
  const double eps = 1e-3;
  auto plus = rho, minus = rho;
  auto step = eta;
  step *= eps;
  plus += step;
  minus -= step;
  auto lin = mkv_operator(spec, plus) - mkv_operator(spec, minus);
  lin *= 1.0 / (2 * eps);

  const auto l = build_linearized(root, spec, J);
  const auto eta_grid = to_real(eta, J);
  const Eigen::VectorXd got = l * Eigen::Map<const Eigen::VectorXd>(eta_grid.data(), J);
  const auto expect = to_real(lin, J);
  for (std::size_t i = 0; i < J; ++i) EXPECT_NEAR(got[i], expect[i], 1e-8) << i;
}

TEST(Spectrum, SignsOfTrivialAndNontrivialStates) {
  for (double sigma : {0.2, 0.6, 1.0}) {
    const auto spec = preset(Preset::double_well, sigma, 0.0, 0.75, 64);
    auto roots = find_fixed_points(spec).roots;
    for (auto& r : roots) {
      const auto s64 = classify(r, spec, 64);
      const auto s128 = classify(r, spec, 128);
      EXPECT_EQ(s64.label, s128.label);
      EXPECT_LE(std::abs(s64.leading.real() - s128.leading.real()), 1e-6);
      EXPECT_EQ(s128.filtered, 1u);
      const bool trivial = std::abs(r.m1()) < 1e-8;
      if (trivial)
        EXPECT_EQ(r.stability, sigma < 0.8 ? Stability::unstable : Stability::stable) << sigma;
      else
        EXPECT_EQ(r.stability, Stability::stable) << sigma;
    }
  }
}

TEST(Spectrum, FilteringAgreesWithMeanZeroProjection) {
  const auto spec = preset(Preset::double_well, 0.2, 0.0, 0.75, 64);
  for (const auto& r : find_fixed_points(spec).roots) {
    const auto l = build_linearized(r, spec, 64);
    const auto a = spectrum(l);
    const auto b = spectrum_mean_zero(l);
    EXPECT_NEAR(a.leading.real(), b.leading.real(), 1e-8);
    EXPECT_EQ(a.eigenvalues.size(), b.eigenvalues.size());
  }
}

TEST(Spectrum, LaplacianOnlyOperator) {
  // V = F = 0 about the uniform state: L = sigma D2 with eigenvalues -sigma k^2.
  const auto spec = ModelSpec(0.5, 0.0, 0.75, 16, TrigSeries{}, TrigSeries{});
  const SelfConsistency map(0.5, TrigSeries{}, TrigSeries{});
  const auto uniform = map.density(std::vector<double>{0.0, 0.0});
  const auto s = spectrum(build_linearized(uniform, spec, 16));
  EXPECT_EQ(s.filtered, 1u);
  EXPECT_NEAR(s.leading.real(), -0.5, 1e-10);
  EXPECT_NEAR(s.eigenvalues.back().real(), -0.5 * 64, 1e-9);
}

TEST(Spectrum, RejectsMismatchedInput) {
  const auto spec = preset(Preset::double_well, 0.2, 0.0, 0.75, 64);
  const auto r = find_fixed_points(0.6).roots.front();
  EXPECT_THROW(build_linearized(r, spec, 64), ConfigError);
  const auto q = find_fixed_points(0.2).roots.front();
  EXPECT_THROW(build_linearized(q, spec, 63), ConfigError);
  EXPECT_THROW(spectrum(Eigen::MatrixXd(3, 4)), ConfigError);
}
