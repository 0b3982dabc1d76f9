#pragma once

// Scalar diagnostics of solutions and metastable-mode detection.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mkv/errors.hpp"
#include "mkv/spectral_field.hpp"

namespace mkv {

/// I1(u) = int u(x) sin x dx
inline double I1(const SpectralField& u) { return -kSqrtTwoPi * u(1).imag(); }

/// I2(u) = int u(x) cos x dx
inline double I2(const SpectralField& u) { return kSqrtTwoPi * u(1).real(); }

/// int u(x) dx
inline double mass(const SpectralField& u) { return kSqrtTwoPi * u(0).real(); }

/// Fraction of the samples that are negative beyond roundoff (1e-12 of the
/// largest magnitude).
inline double negative_fraction(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  double scale = 0.0;
  for (double v : samples) scale = std::max(scale, std::abs(v));
  const double cut = -1e-12 * scale;
  const auto n = std::count_if(samples.begin(), samples.end(), [cut](double v) { return v < cut; });
  return static_cast<double>(n) / static_cast<double>(samples.size());
}

struct ObservableSeries {
  std::vector<double> times;
  std::vector<double> I1;
  std::vector<double> I2;
  std::vector<double> mass;
  std::vector<double> neg_fraction;

  std::size_t size() const noexcept { return times.size(); }

  void push(double t, const SpectralField& u, double neg) {
    times.push_back(t);
    I1.push_back(mkv::I1(u));
    I2.push_back(mkv::I2(u));
    mass.push_back(mkv::mass(u));
    neg_fraction.push_back(neg);
  }
};

/// Row-major matrix of real samples.
struct HeatMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// One row per snapshot: the field sampled on a uniform grid of M points.
inline HeatMap heatmap(std::span<const SpectralField> snapshots, std::size_t m) {
  if (snapshots.empty()) throw ConfigError("heatmap: trajectory has no snapshots");
  HeatMap h{snapshots.size(), m, {}};
  h.values.reserve(h.rows * h.cols);
  fft::RealTransform work(m);
  for (const auto& s : snapshots) {
    to_real(s, work);
    h.values.insert(h.values.end(), work.real().begin(), work.real().end());
  }
  return h;
}

// ---------------------------------------------------------------------------
// Mode detection
// ---------------------------------------------------------------------------

struct ModeDetectionOptions {
  std::size_t bins = 64;
  double smoothing_bins = 2.0;
  /// Local maxima below this fraction of the global maximum are ignored.
  double peak_fraction = 0.05;
  /// Two maxima are merged when the smoothed density along the segment
  /// joining them never drops below this fraction of the lower one.
  double merge_ratio = 0.9;
  /// Clusters holding a smaller share of the points do not count as modes.
  double min_occupancy = 0.01;
  /// Hop hysteresis radius as a fraction of the smallest centroid distance.
  double hysteresis = 0.25;
  double match_tolerance = 0.15;
  std::size_t min_points = 100;
};

struct Cluster {
  std::array<double, 2> centroid{};
  double occupancy = 0.0;
  std::size_t points = 0;
  std::optional<std::size_t> fixed_point;
};

struct ModeReport {
  std::vector<Cluster> clusters;
  std::size_t n_modes = 0;
  std::size_t hop_count = 0;
};

namespace detail {

inline std::vector<double> gaussian_kernel(double width) {
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * width)));
  std::vector<double> k(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i / width) * (i / width));
    total += k[i + radius];
  }
  for (auto& v : k) v /= total;
  return k;
}

/// Separable Gaussian blur of an n x n grid with zero padding.
inline std::vector<double> smooth(const std::vector<double>& grid, std::size_t n, double width) {
  if (width <= 0.0) return grid;
  const auto kernel = gaussian_kernel(width);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int size = static_cast<int>(n);
  std::vector<double> tmp(grid.size(), 0.0);
  std::vector<double> out(grid.size(), 0.0);
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) {
      double acc = 0.0;
      for (int d = -radius; d <= radius; ++d)
        if (const int cc = c + d; cc >= 0 && cc < size) acc += kernel[d + radius] * grid[r * size + cc];
      tmp[r * size + c] = acc;
    }
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) {
      double acc = 0.0;
      for (int d = -radius; d <= radius; ++d)
        if (const int rr = r + d; rr >= 0 && rr < size) acc += kernel[d + radius] * tmp[rr * size + c];
      out[r * size + c] = acc;
    }
  return out;
}

struct Peak {
  int row;
  int col;
  double height;
};

inline double valley_between(const std::vector<double>& grid, std::size_t n, const Peak& a, const Peak& b) {
  const int steps = std::max(std::abs(a.row - b.row), std::abs(a.col - b.col));
  double lowest = std::min(a.height, b.height);
  for (int i = 1; i < steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    const auto r = static_cast<std::size_t>(std::lround(a.row + t * (b.row - a.row)));
    const auto c = static_cast<std::size_t>(std::lround(a.col + t * (b.col - a.col)));
    lowest = std::min(lowest, grid[r * n + c]);
  }
  return lowest;
}

}  // namespace detail

/// Detects metastable modes in the (I1, I2) plane of the post-burn-in part of
/// a series: Gaussian-smoothed 2-D histogram, thresholded local maxima,
/// nearest-peak assignment, and hop counting with hysteresis. When fixed
/// points (m1, m2) are given, each cluster is matched to the nearest one within
/// options.match_tolerance.
inline ModeReport count_modes(const ObservableSeries& series, double burn_in,
                              std::span<const std::array<double, 2>> fixed_points = {},
                              const ModeDetectionOptions& options = {}) {
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw ConfigError("count_modes: burn-in fraction must lie in [0, 1)");
  const std::size_t first = static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(series.size())));
  const std::size_t count = series.size() - first;
  if (count < options.min_points)
    throw ConfigError("count_modes: " + std::to_string(count) + " points after burn-in, need at least " +
                      std::to_string(options.min_points));
  const std::span<const double> xs(series.I1.data() + first, count);
  const std::span<const double> ys(series.I2.data() + first, count);

  auto [xmin_it, xmax_it] = std::minmax_element(xs.begin(), xs.end());
  auto [ymin_it, ymax_it] = std::minmax_element(ys.begin(), ys.end());
  double xlo = *xmin_it, xhi = *xmax_it, ylo = *ymin_it, yhi = *ymax_it;

  ModeReport report;
  if (xhi == xlo && yhi == ylo) {
    Cluster c{{xlo, ylo}, 1.0, count, std::nullopt};
    report.clusters.push_back(c);
  } else {
    const auto widen = [](double& lo, double& hi) {
      if (hi - lo < 1e-12) {
        const double pad = 1e-6 * (1.0 + std::abs(lo));
        lo -= pad;
        hi += pad;
      }
    };
    widen(xlo, xhi);
    widen(ylo, yhi);

    const std::size_t n = options.bins;
    const auto bin_of = [n](double v, double lo, double hi) {
      const auto b = static_cast<long>(std::floor((v - lo) / (hi - lo) * static_cast<double>(n)));
      return static_cast<std::size_t>(std::clamp<long>(b, 0, static_cast<long>(n) - 1));
    };
    std::vector<double> hist(n * n, 0.0);
    for (std::size_t i = 0; i < count; ++i) hist[bin_of(xs[i], xlo, xhi) * n + bin_of(ys[i], ylo, yhi)] += 1.0;
    const auto dens = detail::smooth(hist, n, options.smoothing_bins);
    const double top = *std::max_element(dens.begin(), dens.end());

    // Local maxima: >= later neighbours, > earlier ones (breaks plateau ties).
    std::vector<detail::Peak> peaks;
    const int size = static_cast<int>(n);
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c) {
        const double v = dens[r * size + c];
        if (v < options.peak_fraction * top || v <= 0.0) continue;
        bool is_max = true;
        for (int dr = -1; dr <= 1 && is_max; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            const int rr = r + dr, cc = c + dc;
            if (rr < 0 || rr >= size || cc < 0 || cc >= size) continue;
            const double w = dens[rr * size + cc];
            const bool earlier = dr < 0 || (dr == 0 && dc < 0);
            if (w > v || (earlier && w == v)) {
              is_max = false;
              break;
            }
          }
        if (is_max) peaks.push_back({r, c, v});
      }
    std::sort(peaks.begin(), peaks.end(), [](const auto& a, const auto& b) { return a.height > b.height; });

    std::vector<detail::Peak> kept;
    for (const auto& p : peaks) {
      const bool shallow = std::any_of(kept.begin(), kept.end(), [&](const detail::Peak& q) {
        return detail::valley_between(dens, n, p, q) >= options.merge_ratio * std::min(p.height, q.height);
      });
      if (!shallow) kept.push_back(p);
    }

    const double dx = (xhi - xlo) / static_cast<double>(n);
    const double dy = (yhi - ylo) / static_cast<double>(n);
    std::vector<std::array<double, 2>> centers;
    for (const auto& p : kept) centers.push_back({xlo + (p.row + 0.5) * dx, ylo + (p.col + 0.5) * dy});

    // Centroids average the members inside a core ball around each peak so
    // that barrier-crossing excursions do not drag them toward each other.
    double core = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < centers.size(); ++a)
      for (std::size_t b = a + 1; b < centers.size(); ++b)
        core = std::min(core, options.hysteresis *
                                  std::hypot(centers[a][0] - centers[b][0], centers[a][1] - centers[b][1]));

    std::vector<std::array<double, 2>> sums(centers.size(), {0.0, 0.0});
    std::vector<std::array<double, 2>> core_sums(centers.size(), {0.0, 0.0});
    std::vector<std::size_t> members(centers.size(), 0);
    std::vector<std::size_t> core_members(centers.size(), 0);
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < centers.size(); ++c) {
        const double d = std::hypot(xs[i] - centers[c][0], ys[i] - centers[c][1]);
        if (d < best_d) best_d = d, best = c;
      }
      sums[best][0] += xs[i];
      sums[best][1] += ys[i];
      ++members[best];
      if (best_d <= core) {
        core_sums[best][0] += xs[i];
        core_sums[best][1] += ys[i];
        ++core_members[best];
      }
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (members[c] == 0) continue;
      const double m = static_cast<double>(members[c]);
      std::array<double, 2> centroid{sums[c][0] / m, sums[c][1] / m};
      if (core_members[c] > 0) {
        const double k = static_cast<double>(core_members[c]);
        centroid = {core_sums[c][0] / k, core_sums[c][1] / k};
      }
      report.clusters.push_back({centroid, m / static_cast<double>(count), members[c], std::nullopt});
    }
  }

  std::vector<std::size_t> significant;
  for (std::size_t c = 0; c < report.clusters.size(); ++c)
    if (report.clusters[c].occupancy >= options.min_occupancy) significant.push_back(c);
  report.n_modes = significant.size();

  if (significant.size() > 1) {
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < significant.size(); ++a)
      for (std::size_t b = a + 1; b < significant.size(); ++b) {
        const auto& p = report.clusters[significant[a]].centroid;
        const auto& q = report.clusters[significant[b]].centroid;
        dmin = std::min(dmin, std::hypot(p[0] - q[0], p[1] - q[1]));
      }
    const double radius = options.hysteresis * dmin;
    const auto dist = [&](std::size_t i, std::size_t c) {
      const auto& p = report.clusters[significant[c]].centroid;
      return std::hypot(xs[i] - p[0], ys[i] - p[1]);
    };
    std::size_t state = 0;
    for (std::size_t c = 1; c < significant.size(); ++c)
      if (dist(0, c) < dist(0, state)) state = c;
    for (std::size_t i = 1; i < count; ++i)
      for (std::size_t c = 0; c < significant.size(); ++c)
        if (c != state && dist(i, c) < radius) {
          ++report.hop_count;
          state = c;
          break;
        }
  }

  for (auto& cl : report.clusters) {
    double best = options.match_tolerance;
    for (std::size_t f = 0; f < fixed_points.size(); ++f) {
      const double d = std::hypot(cl.centroid[0] - fixed_points[f][0], cl.centroid[1] - fixed_points[f][1]);
      if (d <= best) best = d, cl.fixed_point = f;
    }
  }
  return report;
}

}  // namespace mkv
