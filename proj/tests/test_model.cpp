#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mkv/model.hpp"

using namespace mkv;

TEST(ModelSpec, RejectsInvalidParameters) {
  const auto v = TrigSeries::cosine(2, 1.0);
  const auto f = TrigSeries::cosine(1, -1.0);
  EXPECT_THROW(ModelSpec(0.0, 0.01, 0.75, 64, v, f), ConfigError);
  EXPECT_THROW(ModelSpec(-1.0, 0.01, 0.75, 64, v, f), ConfigError);
  EXPECT_THROW(ModelSpec(0.2, -0.01, 0.75, 64, v, f), ConfigError);
  EXPECT_THROW(ModelSpec(0.2, 0.01, 0.5, 64, v, f), ConfigError);
  EXPECT_THROW(ModelSpec(0.2, 0.01, 0.75, 63, v, f), ConfigError);
  EXPECT_THROW(ModelSpec(0.2, 0.01, 0.75, 0, v, f), ConfigError);
  EXPECT_THROW(TrigSeries({{0, 1.0, 0.0}}), ConfigError);
}

TEST(ModelSpec, SmoothNoiseIsAcceptedWithWarning) {
  const auto rough = preset(Preset::double_well, 0.2, 0.01, 0.75, 64);
  EXPECT_TRUE(rough.warnings().empty());
  const auto smooth = preset(Preset::double_well, 0.1, 0.1, 1.0, 64);
  ASSERT_EQ(smooth.warnings().size(), 1u);
}

TEST(ModelSpec, PresetsAndNames) {
  const auto d = preset(Preset::double_well, 0.2, 0.01, 0.75, 32);
  EXPECT_NEAR(d.V().value(0.3), std::cos(0.6), 1e-15);
  EXPECT_NEAR(d.F().value(0.3), -std::cos(0.3), 1e-15);
  const auto q = preset(Preset::four_well, 0.4, 0.01, 0.75, 32);
  EXPECT_NEAR(q.V().value(0.3), std::cos(1.2), 1e-15);
  EXPECT_EQ(parse_preset("four_well"), Preset::four_well);
  EXPECT_EQ(preset_name(Preset::double_well), "double_well");
  EXPECT_THROW(parse_preset("three_well"), ConfigError);
}

TEST(NoiseSpec, PowerLaw) {
  const auto n = NoiseSpec::power_law(0.01, 0.75, 64);
  ASSERT_EQ(n.lambdas.size(), 33u);
  EXPECT_EQ(n.lambda(0), 0.0);
  EXPECT_DOUBLE_EQ(n.lambda(1), 0.01);
  EXPECT_NEAR(n.lambda(16), 0.01 / std::pow(16.0, 0.75), 1e-18);
  EXPECT_EQ(n.lambda(-3), n.lambda(3));
  EXPECT_EQ(n.lambda(100), 0.0);
}

TEST(TrigSeries, DerivativeMatchesFiniteDifference) {
  const TrigSeries s({{1, 0.3, -0.7}, {3, 1.1, 0.4}});
  for (double x : {0.0, 0.4, 2.0, 5.5}) {
    const double h = 1e-6;
    EXPECT_NEAR(s.derivative(x), (s.value(x + h) - s.value(x - h)) / (2 * h), 1e-8);
  }
  EXPECT_EQ(s.max_harmonic(), 3);
}

TEST(TrigSeries, DerivativeCoefficientsMatchSampledDerivative) {
  const TrigSeries s({{1, 0.3, -0.7}, {3, 1.1, 0.4}});
  const auto c = s.derivative_coefficients(16);
  const auto sampled = from_function([&](double x) { return s.derivative(x); }, 16);
  for (int k = 0; k < 8; ++k) EXPECT_NEAR(std::abs(c(k) - sampled(k)), 0.0, 1e-14) << k;
}

TEST(TrigSeries, RecoveredFromDerivativeSamples) {
  const TrigSeries s({{2, 0.5, 0.25}, {5, -1.0, 0.0}});
  std::vector<double> g(64);
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = s.derivative(kTwoPi * j / 64.0);
  const auto r = TrigSeries::from_derivative_samples(g);
  ASSERT_EQ(r.terms().size(), 2u);
  for (double x : {0.1, 1.0, 4.0}) EXPECT_NEAR(r.value(x), s.value(x), 1e-13);
}

TEST(Convolution, MatchesQuadratureOfTheIntegral) {
  const auto spec = preset(Preset::double_well, 0.2, 0.0, 0.75, 32);
  std::mt19937 rng(11);
  std::normal_distribution<double> n;
  SpectralField u(32);
  u.set(0, {n(rng), 0.0});
  for (int k = 1; k < 16; ++k) u.set(k, {n(rng), n(rng)});

  const auto conv = to_real(convolve_fprime(spec, u), 64);
  const auto us = to_real(u, 256);
  for (std::size_t i = 0; i < 64; ++i) {
    const double x = kTwoPi * i / 64.0;
    double q = 0.0;
    for (std::size_t j = 0; j < 256; ++j) q += spec.F().derivative(x - kTwoPi * j / 256.0) * us[j];
    q *= kTwoPi / 256.0;
    EXPECT_NEAR(conv[i], q, 1e-12) << i;
  }
}

TEST(Convolution, OfUniformDensityVanishes) {
  const auto spec = preset(Preset::double_well, 0.2, 0.0, 0.75, 16);
  SpectralField u(16);
  u.set(0, {1.0 / kSqrtTwoPi, 0.0});
  const auto c = convolve_fprime(spec, u);
  EXPECT_EQ(c.norm(), 0.0);
}

TEST(ModelSpec, CopiesWithChangedParameters) {
  const auto m = preset(Preset::double_well, 0.2, 0.01, 0.75, 32);
  EXPECT_EQ(m.with_modes(64).modes(), 64u);
  EXPECT_EQ(m.with_modes(64).vprime_grid().size(), 128u);
  EXPECT_EQ(m.with_sigma(0.6).sigma(), 0.6);
  EXPECT_EQ(m.with_noise(0.0, 2.0).gamma(), 0.0);
  EXPECT_TRUE(m.with_potentials({}, {}).V().empty());
}
