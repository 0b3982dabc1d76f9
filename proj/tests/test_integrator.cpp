#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "mkv/integrator.hpp"

using namespace mkv;

namespace {

ModelSpec free_model(double sigma, double gamma, double s, std::size_t J) {
  return ModelSpec(sigma, gamma, s, J, TrigSeries{}, TrigSeries{});
}

}  // namespace

TEST(Stepper, NoiseFreeFreeModelIsTheHeatSemigroup) {
  const auto spec = free_model(0.3, 0.0, 0.75, 32);
  SpectralField u(32);
  for (int k = 0; k < 16; ++k) u.set(k, {1.0 / (1 + k), 0.5 / (1 + k)});
  const auto v = step(spec, u, 0.1, NoiseDraw{std::vector<Complex>(17)});
  for (int k = 0; k < 16; ++k)
    EXPECT_NEAR(std::abs(v(k) - std::exp(-0.3 * k * k * 0.1) * u(k)), 0.0, 1e-15) << k;
}

TEST(Stepper, IncrementScaleIsTheExactOrnsteinUhlenbeckVariance) {
  const auto spec = free_model(0.2, 0.01, 0.75, 64);
  Stepper s(spec, 0.01);
  const auto scale = s.noise_scale();
  EXPECT_EQ(scale[0], 0.0);
  EXPECT_EQ(scale[32], 0.0);
  for (int k : {1, 2, 8, 31}) {
    const double lam = 0.01 / std::pow(k, 0.75);
    const double var = lam * lam * (1 - std::exp(-2 * 0.2 * k * k * 0.01)) / (2 * 0.2 * k * k);
    EXPECT_NEAR(scale[k] * scale[k], var, 1e-14 * var) << k;
  }
}

TEST(Stepper, StationaryVarianceOfFreeModel) {
  const double sigma = 0.5, gamma = 0.2, dt = 0.05;
  const auto spec = free_model(sigma, gamma, 0.75, 16);
  Stepper st(spec, dt);
  const NoiseStream stream(5);
  SpectralField u(16);
  std::vector<double> acc(8, 0.0);
  const std::size_t burn = 2000, n = 400000;
  for (std::size_t i = 0; i < burn + n; ++i) {
    st.advance(u, stream, i);
    if (i >= burn)
      for (int k = 1; k < 8; ++k) acc[k] += std::norm(u(k));
  }
  for (int k : {2, 4}) {
    const double lam = gamma / std::pow(k, 0.75);
    const double expect = lam * lam / (2 * sigma * k * k);
    EXPECT_NEAR(acc[k] / n, expect, 0.05 * expect) << k;
  }
}

TEST(Simulate, MassIsConservedExactly) {
  const auto spec = preset(Preset::double_well, 0.2, 0.01, 0.75, 32);
  SimConfig c;
  c.dt = 0.01;
  c.t_max = 50;
  c.modes = 32;
  c.snapshot_stride = 10;
  c.store_snapshots = false;
  const auto traj = simulate(spec, c);
  const double m0 = traj.series.mass.front();
  EXPECT_NEAR(m0, 1.0, 1e-14);
  for (double m : traj.series.mass) EXPECT_EQ(m, m0);
}

TEST(Simulate, RecordsInitialStrideAndFinalSteps) {
  const auto spec = preset(Preset::double_well, 0.2, 0.01, 0.75, 16);
  SimConfig c;
  c.dt = 0.1;
  c.t_max = 1.1;
  c.modes = 16;
  c.snapshot_stride = 5;
  const auto traj = simulate(spec, c);
  EXPECT_EQ(traj.steps, 11u);
  ASSERT_EQ(traj.series.size(), 4u);
  EXPECT_EQ(traj.snapshots.size(), 4u);
  EXPECT_NEAR(traj.series.times[3], 1.1, 1e-12);

  c.t_max = 0.0;
  const auto zero = simulate(spec, c);
  EXPECT_EQ(zero.steps, 0u);
  EXPECT_EQ(zero.series.size(), 1u);
}

TEST(Simulate, DeterministicGivenSeed) {
  const auto spec = preset(Preset::double_well, 0.2, 0.01, 0.75, 32);
  SimConfig c;
  c.t_max = 20;
  c.modes = 32;
  c.snapshot_stride = 50;
  const auto a = simulate(spec, c);
  const auto b = simulate(spec, c);
  EXPECT_EQ(a.series.I1, b.series.I1);
  EXPECT_EQ(a.snapshots.back(), b.snapshots.back());
  c.seed = 2;
  const auto d = simulate(spec, c);
  EXPECT_NE(a.series.I1.back(), d.series.I1.back());
}

TEST(Simulate, RejectsInconsistentConfiguration) {
  const auto spec = preset(Preset::double_well, 0.2, 0.01, 0.75, 32);
  SimConfig c;
  c.modes = 64;
  EXPECT_THROW(simulate(spec, c), ConfigError);
  c.modes = 32;
  c.dt = 0.0;
  EXPECT_THROW(simulate(spec, c), ConfigError);
  c.dt = 0.01;
  c.t_max = -1;
  EXPECT_THROW(simulate(spec, c), ConfigError);
  c.t_max = 1;
  c.snapshot_stride = 0;
  EXPECT_THROW(simulate(spec, c), ConfigError);
  EXPECT_THROW(step(spec, SpectralField(32), 0.01, NoiseDraw{std::vector<Complex>(5)}), ShapeError);
}

TEST(Simulate, DivergenceCarriesStepAndPartialTrajectory) {
  // Explicit drift at dt = 0.1 is unstable for the intermediate modes at J = 128.
  const auto spec = preset(Preset::double_well, 0.1, 0.1, 1.0, 128);
  SimConfig c;
  c.dt = 0.1;
  c.t_max = 100;
  c.modes = 128;
  c.snapshot_stride = 1;
  try {
    simulate(spec, c);
    FAIL() << "expected divergence";
  } catch (const SimulationDiverged& e) {
    EXPECT_GT(e.step(), 1u);
    EXPECT_EQ(e.partial().series.size(), e.step());
  }
}

TEST(Operator, StationaryUniformStateOfFreeModel) {
  const auto spec = free_model(0.4, 0.0, 0.75, 16);
  const auto u = InitialCondition::uniform().build(16);
  EXPECT_EQ(mkv_operator(spec, u).norm(), 0.0);
  EXPECT_NEAR(mass(u), 1.0, 1e-15);
  EXPECT_NEAR(mass(InitialCondition::sin_squared().build(16)), 1.0, 1e-15);
}

TEST(Operator, DriftOfSingleModeAgainstHandComputation) {
  // V = cos 2x, F = 0, u = cos x: drift = d/dx(-2 sin 2x cos x).
  const auto spec = ModelSpec(1.0, 0.0, 0.75, 16, TrigSeries::cosine(2, 1.0), TrigSeries{});
  const auto u = from_function([](double x) { return std::cos(x); }, 16);
  const auto d = mkv_drift(spec, u);
  const auto expect = from_function(
      [](double x) { return -2 * (2 * std::cos(2 * x) * std::cos(x) - std::sin(2 * x) * std::sin(x)); }, 16);
  for (int k = 0; k < 8; ++k) EXPECT_NEAR(std::abs(d(k) - expect(k)), 0.0, 1e-13) << k;
}

TEST(Langevin, OrnsteinUhlenbeckVariance) {
  const auto path = simulate_langevin([](double y) { return y; }, 0.5, 0.01, 20000, 3);
  double m = 0, q = 0;
  for (double y : path) m += y, q += y * y;
  m /= path.size();
  q = q / path.size() - m * m;
  EXPECT_NEAR(q, 0.25, 0.0125);
}

TEST(Langevin, NoiseFreeDescentAndStride) {
  const auto path = simulate_langevin([](double y) { return y * y * y - y; }, 0.0, 0.01, 50, 1, 0.3, 100);
  EXPECT_EQ(path.size(), 51u);
  EXPECT_NEAR(path.back(), 1.0, 1e-6);
  EXPECT_THROW(simulate_langevin([](double y) { return y; }, -1.0, 0.01, 1, 1), ConfigError);
}
