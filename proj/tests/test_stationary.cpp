#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mkv/integrator.hpp"
#include "mkv/stationary.hpp"

using namespace mkv;

namespace {

// Frozen from tests/oracles/fixed_point_oracle.py (adaptive quadrature plus
// damped iteration, independent of this library).
constexpr double kMStar02 = 0.9783814651145489;
constexpr double kMStar04 = 0.9276251036973;
constexpr double kMStar06 = 0.73528665004;
constexpr double kFourWellCorner = 0.4803031;
constexpr double kFourWellSaddle = 0.5201413;

SpectralField density_field(const SelfConsistency& map, const FixedPointResult& r, std::size_t J) {
  const auto x = uniform_grid(2 * J);
  const auto samples = map.sample(r, x);
  return resized(to_fourier(samples), J);
}

}  // namespace

TEST(FixedPoints, SubcriticalDoubleWellHasThreeRoots) {
  const auto found = find_fixed_points(0.2);
  ASSERT_EQ(found.roots.size(), 3u);
  EXPECT_NEAR(found.roots[0].m1(), 0.0, 1e-10);
  EXPECT_NEAR(found.roots[0].m2(), 0.0, 1e-10);
  EXPECT_NEAR(found.roots[1].m1(), -kMStar02, 1e-9);
  EXPECT_NEAR(found.roots[2].m1(), kMStar02, 1e-9);
  EXPECT_NEAR(found.roots[2].m2(), 0.0, 1e-10);
  EXPECT_GE(kMStar02, 0.7);
  EXPECT_LE(kMStar02, 1.0);
}

TEST(FixedPoints, NontrivialBranchAgainstOracle) {
  const auto at04 = find_fixed_points(0.4);
  ASSERT_EQ(at04.roots.size(), 3u);
  EXPECT_NEAR(at04.roots[2].m1(), kMStar04, 1e-9);
  const auto at06 = find_fixed_points(0.6);
  ASSERT_EQ(at06.roots.size(), 3u);
  EXPECT_NEAR(at06.roots[2].m1(), kMStar06, 1e-9);
}

TEST(FixedPoints, SupercriticalDoubleWellHasOneRoot) {
  const auto found = find_fixed_points(1.0);
  ASSERT_EQ(found.roots.size(), 1u);
  EXPECT_NEAR(found.roots[0].m1(), 0.0, 1e-10);
  EXPECT_NEAR(found.roots[0].m2(), 0.0, 1e-10);
}

TEST(FixedPoints, FourWellRootsAgainstOracle) {
  const auto spec = preset(Preset::four_well, 0.4, 0.01, 0.75, 64);
  const auto found = find_fixed_points(spec);
  ASSERT_EQ(found.roots.size(), 9u);
  int corners = 0, saddles = 0;
  for (const auto& r : found.roots) {
    const double a = std::abs(r.m1()), b = std::abs(r.m2());
    if (std::abs(a - kFourWellCorner) < 1e-6 && std::abs(b - kFourWellCorner) < 1e-6) ++corners;
    if ((std::abs(a - kFourWellSaddle) < 1e-6 && b < 1e-8) || (a < 1e-8 && std::abs(b - kFourWellSaddle) < 1e-6))
      ++saddles;
  }
  EXPECT_EQ(corners, 4);
  EXPECT_EQ(saddles, 4);
}

TEST(FixedPoints, RootsAreFixedPointsOfTheMap) {
  for (double sigma : {0.2, 0.6, 1.0})
    for (const auto& r : find_fixed_points(sigma).roots) {
      EXPECT_LT(r.residual, 1e-10);
      const auto m = self_map(r.m1(), r.m2(), sigma);
      EXPECT_NEAR(m[0], r.m1(), 1e-10);
      EXPECT_NEAR(m[1], r.m2(), 1e-10);
    }
}

TEST(Density, NormalizedNonnegativeGibbsForm) {
  const auto r = rho_from_m(0.5, -0.2, 0.3);
  double total = 0.0;
  for (double v : r.rho_grid) {
    EXPECT_GE(v, 0.0);
    total += v;
  }
  EXPECT_NEAR(total * kTwoPi / r.rho_grid.size(), 1.0, 1e-13);

  // The symmetric state is exp(-cos 2x / sigma) / Z.
  const auto s = rho_from_m(0.0, 0.0, 0.3);
  const double ratio = s.rho_grid[0] / s.rho_grid[1024];
  EXPECT_NEAR(std::log(ratio), (-std::cos(0.0) + std::cos(kTwoPi * 1024 / 4096 * 2)) / 0.3, 1e-12);
}

TEST(Density, StationaryUnderTheSpectralOperator) {
  for (double sigma : {0.2, 0.6, 1.0}) {
    const auto spec = preset(Preset::double_well, sigma, 0.0, 0.75, 128);
    const SelfConsistency map(spec);
    for (const auto& r : find_fixed_points(spec).roots) {
      const auto rho = density_field(map, r, 128);
      EXPECT_NEAR(mass(rho), 1.0, 1e-12);
      EXPECT_LT(mkv_operator(spec, rho).norm(), 1e-6) << "sigma " << sigma;
    }
  }
}

TEST(SelfConsistency, RejectsBadInput) {
  EXPECT_THROW(SelfConsistency(0.0, TrigSeries::cosine(2, 1), TrigSeries::cosine(1, -1)), ConfigError);
  EXPECT_THROW(SelfConsistency(0.2, TrigSeries::cosine(2, 1), TrigSeries::cosine(1, -1), 100), ConfigError);
  const SelfConsistency map(0.2, TrigSeries::cosine(2, 1), TrigSeries::cosine(1, -1));
  EXPECT_EQ(map.dimension(), 2u);
  const std::vector<double> three{0, 0, 0};
  EXPECT_THROW(map.density(three), ConfigError);
  FixedPointOptions o;
  o.tol = 0.0;
  EXPECT_THROW(find_fixed_points(0.2, o), ConfigError);
}
