#pragma once

// Strong convergence studies: mean squared error of the discrete solution at
// t_max against a reference run driven by the same Brownian path.
//
// In dt the coarse stochastic-convolution increment over a coarse step is
// assembled from the fine ones by exact semigroup composition,
//
//   zeta_coarse = sum_j exp(-sigma k^2 (t_{n+1} - t_{j+1})) zeta_fine_j,
//
// evaluated by Horner's rule while the reference path is being advanced. In J
// every run reads the same counter-addressed per-mode normals.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mkv/errors.hpp"
#include "mkv/integrator.hpp"
#include "mkv/model.hpp"
#include "mkv/noise.hpp"
#include "mkv/spectral_field.hpp"

namespace mkv {

struct ConvergencePoint {
  double value = 0.0;
  double mse = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct ConvergenceReport {
  enum class Axis { J, dt };

  Axis axis = Axis::dt;
  std::vector<ConvergencePoint> points;
  double fitted_slope = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_trials = 0;
  /// Points that entered the slope fit.
  std::size_t fitted_points = 0;
};

inline const char* to_string(ConvergenceReport::Axis a) { return a == ConvergenceReport::Axis::J ? "J" : "dt"; }

struct ConvergenceOptions {
  /// 0 picks std::thread::hardware_concurrency().
  std::size_t threads = 0;
  std::uint64_t ci_seed = 20240607;
  double level = 0.95;
  std::size_t resamples = 2000;
  /// MSE at or below 10x this value is treated as coupling noise and kept
  /// out of the slope fit.
  double coupling_floor = 1e-24;
};

namespace detail {

inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Runs work(i) for i in [0, n) on a pool; the first exception is rethrown.
template <class Work>
void parallel_for(std::size_t n, std::size_t threads, Work&& work) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          work(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// Least-squares slope of log(mse) against log(value).
inline std::pair<double, std::size_t> loglog_slope(std::span<const ConvergencePoint> points, double floor) {
  std::vector<std::pair<double, double>> xy;
  for (const auto& p : points)
    if (p.value > 0.0 && p.mse > 10.0 * floor) xy.emplace_back(std::log(p.value), std::log(p.mse));
  if (xy.size() < 2) return {std::numeric_limits<double>::quiet_NaN(), xy.size()};
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : xy) mx += x, my += y;
  mx /= static_cast<double>(xy.size());
  my /= static_cast<double>(xy.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : xy) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
  return {sxy / sxx, xy.size()};
}

inline std::size_t checked_ratio(double coarse, double fine, const char* what) {
  const double r = coarse / fine;
  const double n = std::round(r);
  if (n < 1.0 || std::abs(r - n) > 1e-9 * n)
    throw ConfigError(std::string(what) + ": " + std::to_string(coarse) + " is not an integer multiple of " +
                      std::to_string(fine));
  return static_cast<std::size_t>(n);
}

}  // namespace detail

/// Percentile bootstrap interval for the mean.
inline std::pair<double, double> bootstrap_ci(std::span<const double> samples, double level = 0.95,
                                              std::size_t resamples = 2000, std::uint64_t seed = 20240607) {
  if (samples.empty()) throw ConfigError("bootstrap_ci: no samples");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("bootstrap_ci: level must lie in (0, 1)");
  if (resamples == 0) throw ConfigError("bootstrap_ci: need at least one resample");
  const std::size_t n = samples.size();
  const double mean = detail::pairwise_sum(samples) / static_cast<double>(n);
  // Resample deviations so that constant data gives exactly its value back.
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = samples[i] - mean;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> means(resamples), draw(n);
  for (auto& m : means) {
    for (auto& d : draw) d = dev[pick(rng)];
    m = mean + detail::pairwise_sum(draw) / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(resamples - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const std::size_t j = std::min(i + 1, resamples - 1);
    return means[i] + (pos - static_cast<double>(i)) * (means[j] - means[i]);
  };
  const double alpha = 0.5 * (1.0 - level);
  return {std::min(quantile(alpha), mean), std::max(quantile(1.0 - alpha), mean)};
}

namespace detail {

inline ConvergenceReport finish_report(ConvergenceReport::Axis axis, std::span<const double> values,
                                       const std::vector<std::vector<double>>& errors, std::size_t n_trials,
                                       const ConvergenceOptions& options) {
  ConvergenceReport report;
  report.axis = axis;
  report.n_trials = n_trials;
  for (std::size_t p = 0; p < values.size(); ++p) {
    ConvergencePoint pt;
    pt.value = values[p];
    pt.mse = pairwise_sum(errors[p]) / static_cast<double>(n_trials);
    std::tie(pt.lo, pt.hi) = bootstrap_ci(errors[p], options.level, options.resamples, options.ci_seed + p);
    report.points.push_back(pt);
  }
  std::sort(report.points.begin(), report.points.end(),
            [](const ConvergencePoint& a, const ConvergencePoint& b) { return a.value < b.value; });
  std::tie(report.fitted_slope, report.fitted_points) = loglog_slope(report.points, options.coupling_floor);
  return report;
}

inline void check_finite(const SpectralField& u, std::size_t step) {
  if (!u.all_finite()) throw DivergenceError("convergence run produced a non-finite state", step);
}

}  // namespace detail

/// MSE at t_max against a dt_ref reference for each dt in dt_list. Trial i
/// uses NoiseStream(seed, base.trial + i).
inline ConvergenceReport mse_study_dt(const ModelSpec& spec, const SimConfig& base, std::span<const double> dt_list,
                                      double dt_ref, std::size_t n_trials, const ConvergenceOptions& options = {}) {
  if (dt_list.empty()) throw ConfigError("mse_study_dt: empty dt list");
  if (n_trials == 0) throw ConfigError("mse_study_dt: n_trials must be >= 1");
  if (!(dt_ref > 0.0)) throw ConfigError("mse_study_dt: dt_ref must be > 0");
  if (base.modes != spec.modes()) throw ConfigError("mse_study_dt: config J does not match the model");

  std::vector<std::size_t> ratio;
  for (double dt : dt_list) ratio.push_back(detail::checked_ratio(dt, dt_ref, "mse_study_dt: dt"));
  const std::size_t fine_steps = detail::checked_ratio(base.t_max, dt_ref, "mse_study_dt: t_max");
  for (std::size_t p = 0; p < dt_list.size(); ++p)
    if (fine_steps % ratio[p] != 0)
      throw ConfigError("mse_study_dt: t_max is not a whole number of steps of dt = " + std::to_string(dt_list[p]));

  const std::size_t half = spec.modes() / 2 + 1;
  std::vector<std::vector<double>> errors(dt_list.size(), std::vector<double>(n_trials));
  const SpectralField u0 = base.initial_condition.build(spec.modes());

  detail::parallel_for(n_trials, options.threads, [&](std::size_t trial) {
    const NoiseStream stream(base.seed, base.trial + static_cast<std::uint32_t>(trial));
    Stepper fine(spec, dt_ref);
    std::vector<Stepper> coarse;
    for (double dt : dt_list) coarse.emplace_back(spec, dt);
    std::vector<SpectralField> state(dt_list.size(), u0);
    std::vector<std::vector<Complex>> acc(dt_list.size(), std::vector<Complex>(half));
    std::vector<Complex> zeta(half);
    SpectralField ref = u0;
    const auto decay = fine.decay();

    for (std::size_t j = 0; j < fine_steps; ++j) {
      if (fine.noisy()) {
        stream.fill(j, zeta);
        fine.noise_increment(zeta, zeta);
      }
      for (std::size_t p = 0; p < dt_list.size(); ++p) {
        auto& a = acc[p];
        if (fine.noisy())
          for (std::size_t k = 0; k < half; ++k) a[k] = decay[k] * a[k] + zeta[k];
        if ((j + 1) % ratio[p] == 0) {
          coarse[p].advance(state[p], fine.noisy() ? std::span<const Complex>(a) : std::span<const Complex>{});
          detail::check_finite(state[p], (j + 1) / ratio[p]);
          std::fill(a.begin(), a.end(), Complex{});
        }
      }
      fine.advance(ref, fine.noisy() ? std::span<const Complex>(zeta) : std::span<const Complex>{});
      detail::check_finite(ref, j + 1);
    }
    for (std::size_t p = 0; p < dt_list.size(); ++p) {
      state[p] -= ref;
      errors[p][trial] = state[p].norm_squared();
    }
  });

  return detail::finish_report(ConvergenceReport::Axis::dt, dt_list, errors, n_trials, options);
}

/// MSE at t_max against a J_ref reference for each J in J_list, the coarse
/// fields zero-padded to J_ref for the norm.
inline ConvergenceReport mse_study_J(const ModelSpec& spec, const SimConfig& base, std::span<const std::size_t> J_list,
                                     std::size_t J_ref, std::size_t n_trials, const ConvergenceOptions& options = {}) {
  if (J_list.empty()) throw ConfigError("mse_study_J: empty J list");
  if (n_trials == 0) throw ConfigError("mse_study_J: n_trials must be >= 1");
  if (J_ref < 2 || J_ref % 2 != 0) throw ResolutionError("mse_study_J: J_ref must be even and >= 2");
  for (std::size_t j : J_list) {
    if (j < 2 || j % 2 != 0) throw ResolutionError("mse_study_J: J = " + std::to_string(j) + " is not even");
    if (j > J_ref)
      throw ResolutionError("mse_study_J: J = " + std::to_string(j) + " exceeds J_ref = " + std::to_string(J_ref));
  }
  if (!(base.dt > 0.0)) throw ConfigError("mse_study_J: dt must be > 0");
  const std::size_t steps = base.step_count();

  const ModelSpec ref_spec = spec.with_modes(J_ref);
  std::vector<ModelSpec> specs;
  for (std::size_t j : J_list) specs.push_back(spec.with_modes(j));
  std::vector<std::vector<double>> errors(J_list.size(), std::vector<double>(n_trials));

  detail::parallel_for(n_trials, options.threads, [&](std::size_t trial) {
    const NoiseStream stream(base.seed, base.trial + static_cast<std::uint32_t>(trial));
    const auto run = [&](const ModelSpec& s) {
      Stepper stepper(s, base.dt);
      SpectralField u = base.initial_condition.build(s.modes());
      for (std::size_t n = 0; n < steps; ++n) {
        stepper.advance(u, stream, n);
        detail::check_finite(u, n + 1);
      }
      return u;
    };
    const SpectralField ref = run(ref_spec);
    for (std::size_t p = 0; p < J_list.size(); ++p) {
      SpectralField diff = resized(run(specs[p]), J_ref);
      diff -= ref;
      errors[p][trial] = diff.norm_squared();
    }
  });

  std::vector<double> values(J_list.begin(), J_list.end());
  return detail::finish_report(ConvergenceReport::Axis::J, values, errors, n_trials, options);
}

}  // namespace mkv
