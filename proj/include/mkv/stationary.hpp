#pragma once

// Stationary densities of the deterministic McKean-Vlasov equation.
//
// Every stationary density is a Gibbs state of its own mean field,
//
//   rho(x) = exp(-(V(x) + (F * rho)(x)) / sigma) / Z,
//
// and when F is a trigonometric polynomial F * rho only depends on the
// moments (S_h, C_h) = (int rho sin hx, int rho cos hx) for the harmonics h of
// F. The problem therefore reduces to a fixed point of the finite map
// T : (S_h, C_h)_h -> moments of the Gibbs state. For V = cos 2x and
// F = -cos x this is the two-parameter map (m1, m2) -> (int rho sin, int rho cos).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mkv/errors.hpp"
#include "mkv/model.hpp"
#include "mkv/spectral_field.hpp"

namespace mkv {

enum class Stability { unknown, stable, unstable };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    default: return "unknown";
  }
}

struct FixedPointResult {
  double sigma = 0.0;
  /// Harmonics h of F; moments holds (S_h, C_h) for each, in this order.
  std::vector<int> harmonics;
  std::vector<double> moments;
  double log_Z = 0.0;
  double Z_sigma = 0.0;
  /// Density on the quadrature grid x_j = 2 pi j / N_q.
  std::vector<double> rho_grid;
  double residual = 0.0;
  Stability stability = Stability::unknown;

  double m1() const { return moments.at(0); }
  double m2() const { return moments.at(1); }
};

/// The reduced self-consistency map for a model's potentials.
class SelfConsistency {
 public:
  SelfConsistency(double sigma, TrigSeries v, TrigSeries f, std::size_t quadrature_points = 4096)
      : sigma_(sigma), v_(std::move(v)), f_(std::move(f)), nq_(quadrature_points) {
    if (!(sigma > 0.0)) throw ConfigError("sigma must be > 0, got " + std::to_string(sigma));
    if (nq_ < 256) throw ConfigError("quadrature needs at least 256 points, got " + std::to_string(nq_));
    for (const auto& t : f_.terms())
      if (t.cos_coef != 0.0 || t.sin_coef != 0.0) harmonics_.push_back(t.k);
    std::sort(harmonics_.begin(), harmonics_.end());
    harmonics_.erase(std::unique(harmonics_.begin(), harmonics_.end()), harmonics_.end());
    if (harmonics_.empty()) harmonics_.push_back(1);

    x_ = uniform_grid(nq_);
    v_grid_.resize(nq_);
    for (std::size_t j = 0; j < nq_; ++j) v_grid_[j] = v_.value(x_[j]);
    sin_.assign(harmonics_.size(), std::vector<double>(nq_));
    cos_.assign(harmonics_.size(), std::vector<double>(nq_));
    for (std::size_t h = 0; h < harmonics_.size(); ++h)
      for (std::size_t j = 0; j < nq_; ++j) {
        sin_[h][j] = std::sin(harmonics_[h] * x_[j]);
        cos_[h][j] = std::cos(harmonics_[h] * x_[j]);
      }
    for (int h : harmonics_) {
      double a = 0.0, b = 0.0;
      for (const auto& t : f_.terms())
        if (t.k == h) a += t.cos_coef, b += t.sin_coef;
      fa_.push_back(a);
      fb_.push_back(b);
    }
  }

  explicit SelfConsistency(const ModelSpec& spec, std::size_t quadrature_points = 4096)
      : SelfConsistency(spec.sigma(), spec.V(), spec.F(), quadrature_points) {}

  double sigma() const noexcept { return sigma_; }
  std::size_t dimension() const noexcept { return 2 * harmonics_.size(); }
  const std::vector<int>& harmonics() const noexcept { return harmonics_; }
  std::size_t quadrature_points() const noexcept { return nq_; }

  /// Exponent -(V(x) + (F * rho)(x)) / sigma for moments (S_h, C_h).
  double exponent(std::span<const double> moments, double x) const {
    double phi = v_.value(x);
    for (std::size_t h = 0; h < harmonics_.size(); ++h) {
      const double s = moments[2 * h], c = moments[2 * h + 1];
      const double sx = std::sin(harmonics_[h] * x), cx = std::cos(harmonics_[h] * x);
      phi += fa_[h] * (cx * c + sx * s) + fb_[h] * (sx * c - cx * s);
    }
    return -phi / sigma_;
  }

  /// Gibbs state for the given moments, normalized by trapezoid quadrature.
  /// The residual is left at zero; find_fixed_points() fills it in.
  FixedPointResult density(std::span<const double> moments) const {
    require_dimension(moments);
    FixedPointResult r;
    r.sigma = sigma_;
    r.harmonics = harmonics_;
    r.moments.assign(moments.begin(), moments.end());
    r.rho_grid.resize(nq_);
    for (std::size_t j = 0; j < nq_; ++j) {
      double phi = v_grid_[j];
      for (std::size_t h = 0; h < harmonics_.size(); ++h) {
        const double s = moments[2 * h], c = moments[2 * h + 1];
        phi += fa_[h] * (cos_[h][j] * c + sin_[h][j] * s) + fb_[h] * (sin_[h][j] * c - cos_[h][j] * s);
      }
      r.rho_grid[j] = -phi / sigma_;
    }
    const double top = *std::max_element(r.rho_grid.begin(), r.rho_grid.end());
    double total = 0.0;
    for (auto& e : r.rho_grid) {
      e = std::exp(e - top);
      total += e;
    }
    const double h = kTwoPi / static_cast<double>(nq_);
    total *= h;
    for (auto& e : r.rho_grid) e /= total;
    r.log_Z = top + std::log(total);
    r.Z_sigma = std::exp(r.log_Z);
    return r;
  }

  /// Moments (S_h, C_h) of a density sampled on the quadrature grid.
  std::vector<double> moments_of(std::span<const double> rho) const {
    std::vector<double> out(dimension(), 0.0);
    const double h = kTwoPi / static_cast<double>(nq_);
    for (std::size_t k = 0; k < harmonics_.size(); ++k) {
      double s = 0.0, c = 0.0;
      for (std::size_t j = 0; j < nq_; ++j) {
        s += rho[j] * sin_[k][j];
        c += rho[j] * cos_[k][j];
      }
      out[2 * k] = s * h;
      out[2 * k + 1] = c * h;
    }
    return out;
  }

  std::vector<double> map(std::span<const double> moments) const { return moments_of(density(moments).rho_grid); }

  /// Density at arbitrary points, normalized with the result's log Z.
  std::vector<double> sample(const FixedPointResult& r, std::span<const double> points) const {
    std::vector<double> out(points.size());
    for (std::size_t j = 0; j < points.size(); ++j) out[j] = std::exp(exponent(r.moments, points[j]) - r.log_Z);
    return out;
  }

 private:
  void require_dimension(std::span<const double> m) const {
    if (m.size() != dimension())
      throw ConfigError("self-consistency map expects " + std::to_string(dimension()) + " moments, got " +
                        std::to_string(m.size()));
  }

  double sigma_;
  TrigSeries v_;
  TrigSeries f_;
  std::size_t nq_;
  std::vector<int> harmonics_;
  std::vector<double> fa_, fb_;
  std::vector<double> x_;
  std::vector<double> v_grid_;
  std::vector<std::vector<double>> sin_, cos_;
};

namespace detail {
inline SelfConsistency double_well_map(double sigma, std::size_t nq) {
  return {sigma, TrigSeries::cosine(2, 1.0), TrigSeries::cosine(1, -1.0), nq};
}
}  // namespace detail

/// Gibbs state of the double-well model for given (m1, m2).
inline FixedPointResult rho_from_m(double m1, double m2, double sigma, std::size_t nq = 4096) {
  const double m[2] = {m1, m2};
  return detail::double_well_map(sigma, nq).density(m);
}

/// (int rho sin x, int rho cos x) for rho = rho_from_m(m1, m2, sigma).
inline std::array<double, 2> self_map(double m1, double m2, double sigma, std::size_t nq = 4096) {
  const double m[2] = {m1, m2};
  const auto out = detail::double_well_map(sigma, nq).map(m);
  return {out[0], out[1]};
}

struct FixedPointOptions {
  std::size_t grid_per_axis = 9;
  double box = 2.0;
  double tol = 1e-10;
  std::size_t quadrature_points = 4096;
  double damping = 0.5;
  std::size_t damped_iterations = 200;
  std::size_t newton_iterations = 50;
  /// Upper bound on the number of starts for many-harmonic interactions.
  std::size_t max_starts = 4096;
};

struct FixedPointSearch {
  std::vector<FixedPointResult> roots;
  std::size_t starts = 0;
  std::size_t dropped = 0;
};

namespace detail {

inline double euclid(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

/// Damped iteration followed by a Newton polish with a central-difference
/// Jacobian. Returns false if the iterate does not settle within tol.
inline bool solve_from(const SelfConsistency& map, std::vector<double>& m, const FixedPointOptions& o) {
  const std::size_t d = m.size();
  auto residual = [&](const std::vector<double>& x) {
    auto t = map.map(x);
    for (std::size_t i = 0; i < d; ++i) t[i] -= x[i];
    return t;
  };
  for (std::size_t it = 0; it < o.damped_iterations; ++it) {
    const auto t = map.map(m);
    const double step = euclid(t, m);
    for (std::size_t i = 0; i < d; ++i) m[i] = (1.0 - o.damping) * m[i] + o.damping * t[i];
    if (step <= o.tol) break;
  }
  const double h = 1e-6;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < o.newton_iterations; ++it) {
    const auto g = residual(m);
    const double gnorm = std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
    if (!std::isfinite(gnorm)) return false;
    // Polish well below tol; stop once Newton stagnates at round-off level.
    if (gnorm <= 1e-3 * o.tol || (gnorm <= o.tol && gnorm >= 0.5 * previous)) return true;
    previous = gnorm;
    Eigen::MatrixXd jac(d, d);
    for (std::size_t c = 0; c < d; ++c) {
      auto xp = m, xm = m;
      xp[c] += h;
      xm[c] -= h;
      const auto gp = residual(xp), gm = residual(xm);
      for (std::size_t r = 0; r < d; ++r) jac(r, c) = (gp[r] - gm[r]) / (2.0 * h);
    }
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(d));
    const Eigen::VectorXd delta = jac.fullPivLu().solve(rhs);
    if (!delta.allFinite()) return false;
    for (std::size_t i = 0; i < d; ++i) m[i] += delta[static_cast<Eigen::Index>(i)];
    if (std::any_of(m.begin(), m.end(), [&](double v) { return std::abs(v) > 10.0 * o.box + 10.0; })) return false;
  }
  const auto g = residual(m);
  return std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0)) <= o.tol;
}

inline std::vector<std::vector<double>> start_points(std::size_t dim, const FixedPointOptions& o) {
  std::size_t per_axis = std::max<std::size_t>(o.grid_per_axis, 2);
  while (per_axis > 2 && std::pow(static_cast<double>(per_axis), static_cast<double>(dim)) > o.max_starts) --per_axis;
  std::size_t total = 1;
  for (std::size_t i = 0; i < dim; ++i) total *= per_axis;
  std::vector<std::vector<double>> starts;
  starts.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::vector<double> p(dim);
    std::size_t rest = idx;
    for (std::size_t a = 0; a < dim; ++a) {
      const std::size_t i = rest % per_axis;
      rest /= per_axis;
      p[a] = -o.box + 2.0 * o.box * static_cast<double>(i) / static_cast<double>(per_axis - 1);
    }
    starts.push_back(std::move(p));
  }
  return starts;
}

}  // namespace detail

/// Multi-start search for all fixed points of the reduced map. Converged
/// roots are deduplicated within 10 tol and returned nearest-to-origin first
/// (the symmetric state leads), ties broken lexicographically.
inline FixedPointSearch find_fixed_points(const SelfConsistency& map, const FixedPointOptions& options = {}) {
  if (!(options.tol > 0.0)) throw ConfigError("fixed-point tolerance must be > 0");
  FixedPointSearch out;
  const auto starts = detail::start_points(map.dimension(), options);
  out.starts = starts.size();
  std::vector<std::vector<double>> found;
  for (auto m : starts) {
    if (!detail::solve_from(map, m, options)) {
      ++out.dropped;
      continue;
    }
    const bool seen = std::any_of(found.begin(), found.end(),
                                  [&](const auto& f) { return detail::euclid(f, m) <= 10.0 * options.tol; });
    if (!seen) found.push_back(m);
  }
  const auto radius = [](const std::vector<double>& m) {
    double s = 0.0;
    for (double x : m) s += x * x;
    return std::sqrt(s);
  };
  std::sort(found.begin(), found.end(), [&](const auto& a, const auto& b) {
    const double ra = radius(a), rb = radius(b);
    if (std::abs(ra - rb) > 1e-6) return ra < rb;
    return a < b;
  });
  for (const auto& m : found) {
    auto r = map.density(m);
    const auto t = map.moments_of(r.rho_grid);
    r.residual = detail::euclid(t, m);
    out.roots.push_back(std::move(r));
  }
  return out;
}

inline FixedPointSearch find_fixed_points(const ModelSpec& spec, const FixedPointOptions& options = {}) {
  return find_fixed_points(SelfConsistency(spec, options.quadrature_points), options);
}

/// Double-well model at diffusion sigma.
inline FixedPointSearch find_fixed_points(double sigma, const FixedPointOptions& options = {}) {
  return find_fixed_points(detail::double_well_map(sigma, options.quadrature_points), options);
}

}  // namespace mkv
