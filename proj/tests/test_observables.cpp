#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "mkv/observables.hpp"

using namespace mkv;

namespace {

ObservableSeries series_from(const std::vector<std::array<double, 2>>& pts) {
  ObservableSeries s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    s.times.push_back(static_cast<double>(i));
    s.I1.push_back(pts[i][0]);
    s.I2.push_back(pts[i][1]);
    s.mass.push_back(1.0);
    s.neg_fraction.push_back(0.0);
  }
  return s;
}

}  // namespace

TEST(Observables, MomentsOfKnownFunctions) {
  const auto u = from_function([](double x) { return (1 + 0.5 * std::sin(x) + 0.25 * std::cos(x)) / kTwoPi; }, 16);
  EXPECT_NEAR(mass(u), 1.0, 1e-14);
  EXPECT_NEAR(I1(u), 0.25, 1e-14);
  EXPECT_NEAR(I2(u), 0.125, 1e-14);
  const std::vector<double> s{1.0, -1.0, 0.0, -1e-20, 2.0};
  EXPECT_DOUBLE_EQ(negative_fraction(s), 0.2);
  EXPECT_EQ(negative_fraction(std::vector<double>{}), 0.0);
}

TEST(HeatMap, OneRowPerSnapshot) {
  std::vector<SpectralField> snaps;
  for (int i = 0; i < 3; ++i) snaps.push_back(from_function([i](double x) { return i + std::cos(x); }, 8));
  const auto h = heatmap(snaps, 20);
  EXPECT_EQ(h.rows, 3u);
  EXPECT_EQ(h.cols, 20u);
  EXPECT_NEAR(h(2, 0), 3.0, 1e-14);
  EXPECT_NEAR(h(1, 10), 0.0, 1e-14);
  EXPECT_THROW(heatmap(std::vector<SpectralField>{}, 8), ConfigError);
}

TEST(CountModes, AlternatingBlocks) {
  std::mt19937 rng(1);
  std::normal_distribution<double> n(0.0, 0.03);
  std::vector<std::array<double, 2>> pts;
  const int blocks = 6;
  for (int b = 0; b < blocks; ++b)
    for (int i = 0; i < 500; ++i) pts.push_back({(b % 2 ? -0.9 : 0.9) + n(rng), n(rng)});
  const auto r = count_modes(series_from(pts), 0.0);
  EXPECT_EQ(r.n_modes, 2u);
  EXPECT_EQ(r.hop_count, static_cast<std::size_t>(blocks - 1));
  double occ = 0.0;
  for (const auto& c : r.clusters) {
    occ += c.occupancy;
    EXPECT_NEAR(std::abs(c.centroid[0]), 0.9, 0.02);
    EXPECT_NEAR(c.centroid[1], 0.0, 0.02);
  }
  EXPECT_NEAR(occ, 1.0, 1e-9);
}

TEST(CountModes, GaussianBlobIsOneMode) {
  std::mt19937 rng(2);
  std::normal_distribution<double> n(0.0, 0.1);
  std::vector<std::array<double, 2>> pts;
  for (int i = 0; i < 20000; ++i) pts.push_back({n(rng), n(rng)});
  const auto r = count_modes(series_from(pts), 0.1);
  EXPECT_EQ(r.n_modes, 1u);
  EXPECT_EQ(r.hop_count, 0u);
  EXPECT_NEAR(r.clusters.front().centroid[0], 0.0, 0.02);
}

TEST(CountModes, FourCornersMatchFixedPoints) {
  std::mt19937 rng(3);
  std::normal_distribution<double> n(0.0, 0.04);
  const std::array<std::array<double, 2>, 4> corners{{{0.5, 0.5}, {-0.5, 0.5}, {-0.5, -0.5}, {0.5, -0.5}}};
  std::vector<std::array<double, 2>> pts;
  for (int b = 0; b < 8; ++b)
    for (int i = 0; i < 400; ++i) pts.push_back({corners[b % 4][0] + n(rng), corners[b % 4][1] + n(rng)});
  const auto r = count_modes(series_from(pts), 0.0, corners);
  EXPECT_EQ(r.n_modes, 4u);
  EXPECT_EQ(r.hop_count, 7u);
  for (const auto& c : r.clusters) {
    ASSERT_TRUE(c.fixed_point.has_value());
    const auto& f = corners[*c.fixed_point];
    EXPECT_LT(std::hypot(c.centroid[0] - f[0], c.centroid[1] - f[1]), 0.05);
  }
}

TEST(CountModes, ChatterAtTheBoundaryIsNotAHop) {
  std::vector<std::array<double, 2>> pts;
  // Brief excursions that cross the midline but never reach the other ball.
  for (int i = 0; i < 400; ++i) pts.push_back({1.0, 0.0});
  for (int i = 0; i < 20; ++i) pts.push_back({i % 2 ? 0.6 : -0.4, 0.0});
  for (int i = 0; i < 400; ++i) pts.push_back({1.0, 0.0});
  for (int i = 0; i < 400; ++i) pts.push_back({-1.0, 0.0});
  const auto r = count_modes(series_from(pts), 0.0);
  EXPECT_EQ(r.hop_count, 1u);
}

TEST(CountModes, DegenerateAndShortSeries) {
  std::vector<std::array<double, 2>> same(200, {0.3, -0.2});
  const auto r = count_modes(series_from(same), 0.0);
  EXPECT_EQ(r.n_modes, 1u);
  EXPECT_NEAR(r.clusters.front().centroid[0], 0.3, 1e-12);
  std::vector<std::array<double, 2>> few(150, {0.0, 0.0});
  EXPECT_THROW(count_modes(series_from(few), 0.5), ConfigError);
  EXPECT_THROW(count_modes(series_from(same), 1.0), ConfigError);
}
