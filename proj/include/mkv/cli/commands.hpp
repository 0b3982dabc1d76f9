#pragma once

// Subcommands of the mkvcount tool. Each takes a validated RunConfig, writes
// its files under config.directory and returns what it wrote.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mkv/convergence.hpp"
#include "mkv/errors.hpp"
#include "mkv/integrator.hpp"
#include "mkv/io/config.hpp"
#include "mkv/io/formats.hpp"
#include "mkv/observables.hpp"
#include "mkv/stability.hpp"
#include "mkv/stationary.hpp"

namespace mkv::cli {

namespace fs = std::filesystem;

inline FixedPointOptions fixed_point_options(const io::RunConfig& c) {
  FixedPointOptions o;
  o.grid_per_axis = c.grid;
  o.box = c.box;
  o.tol = c.tol;
  o.quadrature_points = c.quadrature_points;
  return o;
}

/// Roots of the self-consistency map at the model's sigma, each labelled by
/// the spectrum of its linearization.
struct ClassifiedRoots {
  std::vector<FixedPointResult> roots;
  std::vector<SpectrumResult> spectra;

  std::vector<std::array<double, 2>> stable_points() const {
    std::vector<std::array<double, 2>> out;
    for (const auto& r : roots)
      if (r.stability == Stability::stable) out.push_back({r.m1(), r.m2()});
    return out;
  }
};

inline ClassifiedRoots classified_roots(const ModelSpec& spec, const FixedPointOptions& options,
                                        std::size_t stability_J) {
  ClassifiedRoots out;
  out.roots = find_fixed_points(spec, options).roots;
  for (auto& r : out.roots) out.spectra.push_back(classify(r, spec, stability_J));
  return out;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateResult {
  Trajectory trajectory;
  std::optional<ModeReport> modes;
  std::vector<std::array<double, 2>> stable_points;
  std::vector<fs::path> files;
};

inline void write_series(const fs::path& path, const std::string& hash, const ObservableSeries& s) {
  io::CsvWriter csv(path, hash, {"t", "I1", "I2", "mass", "neg_fraction"});
  for (std::size_t i = 0; i < s.size(); ++i) csv.row(s.times[i], s.I1[i], s.I2[i], s.mass[i], s.neg_fraction[i]);
}

inline SimulateResult cmd_simulate(const io::RunConfig& config) {
  config.validate();
  const ModelSpec spec = config.model();
  SimConfig sim = config.simulation();
  sim.store_snapshots = config.wants("bin") || config.wants("ppm");
  const fs::path dir = config.directory;
  const std::string hash = config.hash();

  SimulateResult out;
  try {
    out.trajectory = simulate(spec, sim);
  } catch (const SimulationDiverged& e) {
    if (config.wants("csv")) write_series(dir / "series.csv", hash, e.partial().series);
    throw;
  }
  const auto& traj = out.trajectory;

  if (config.wants("csv")) {
    write_series(dir / "series.csv", hash, traj.series);
    out.files.push_back(dir / "series.csv");
  }
  if (sim.store_snapshots) {
    const HeatMap map = heatmap(traj, config.heatmap_width);
    if (config.wants("bin")) {
      io::write_heatmap(dir / "heatmap.bin", map);
      out.files.push_back(dir / "heatmap.bin");
    }
    if (config.wants("ppm")) {
      io::write_ppm(dir / "heatmap.ppm", map);
      out.files.push_back(dir / "heatmap.ppm");
    }
  }

  nlohmann::json summary;
  summary["config_hash"] = hash;
  summary["steps"] = traj.steps;
  summary["records"] = traj.series.size();
  summary["final_mass"] = traj.series.mass.back();
  summary["warnings"] = spec.warnings();

  const auto post = traj.series.size() -
                    static_cast<std::size_t>(std::floor(config.burn_in * static_cast<double>(traj.series.size())));
  if (post >= config.detection.min_points) {
    const auto roots = classified_roots(spec, fixed_point_options(config), config.stability_J);
    out.stable_points = roots.stable_points();
    out.modes = count_modes(traj.series, config.burn_in, out.stable_points, config.detection);
    summary["n_modes"] = out.modes->n_modes;
    summary["hop_count"] = out.modes->hop_count;
    auto& clusters = summary["clusters"] = nlohmann::json::array();
    for (const auto& c : out.modes->clusters) {
      nlohmann::json j{{"centroid", c.centroid}, {"occupancy", c.occupancy}, {"points", c.points}};
      j["fixed_point"] = c.fixed_point ? nlohmann::json(*c.fixed_point) : nlohmann::json(nullptr);
      clusters.push_back(j);
    }
    summary["stable_fixed_points"] = out.stable_points;
  } else {
    summary["n_modes"] = nullptr;
    summary["note"] = "too few records after burn-in for mode detection";
  }
  auto f = io::open_output(dir / "summary.json");
  f << summary.dump(2) << '\n';
  if (!f) throw IoError("write failed", (dir / "summary.json").string());
  out.files.push_back(dir / "summary.json");
  return out;
}

// ---------------------------------------------------------------------------
// fixed-points
// ---------------------------------------------------------------------------

struct FixedPointsResult {
  /// One entry per sigma, in the order of the sweep.
  std::vector<std::pair<double, ClassifiedRoots>> sweep;
  fs::path file;
};

inline std::vector<std::string> moment_columns(const std::vector<int>& harmonics) {
  std::vector<std::string> cols;
  for (int h : harmonics) {
    cols.push_back("S" + std::to_string(h));
    cols.push_back("C" + std::to_string(h));
  }
  return cols;
}

inline FixedPointsResult cmd_fixed_points(const io::RunConfig& config) {
  config.validate();
  const ModelSpec base = config.model();
  const auto sigmas = config.sigmas.empty() ? std::vector<double>{config.sigma} : config.sigmas;
  FixedPointsResult out;
  for (double sigma : sigmas)
    out.sweep.emplace_back(sigma, classified_roots(base.with_sigma(sigma), fixed_point_options(config),
                                                   config.stability_J));

  const auto harmonics = SelfConsistency(base, config.quadrature_points).harmonics();
  std::vector<std::string> cols{"sigma", "root"};
  for (auto& c : moment_columns(harmonics)) cols.push_back(c);
  for (const char* c : {"log_Z", "residual", "leading_re", "leading_im", "stability"}) cols.emplace_back(c);

  out.file = fs::path(config.directory) / "roots.csv";
  io::CsvWriter csv(out.file, config.hash(), cols);
  for (const auto& [sigma, found] : out.sweep)
    for (std::size_t i = 0; i < found.roots.size(); ++i) {
      const auto& r = found.roots[i];
      std::vector<std::string> row{io::format_double(sigma), std::to_string(i)};
      for (double m : r.moments) row.push_back(io::format_double(m));
      row.push_back(io::format_double(r.log_Z));
      row.push_back(io::format_double(r.residual));
      row.push_back(io::format_double(found.spectra[i].leading.real()));
      row.push_back(io::format_double(found.spectra[i].leading.imag()));
      row.push_back(to_string(r.stability));
      csv.row(row);
    }
  return out;
}

// ---------------------------------------------------------------------------
// stability
// ---------------------------------------------------------------------------

struct StabilityResult {
  std::vector<FixedPointResult> roots;
  std::vector<SpectrumResult> spectra;
  fs::path file;
};

/// Reads a roots.csv written by fixed-points and writes the full spectrum of
/// every root to eigs.csv.
inline StabilityResult cmd_stability(const io::RunConfig& config, const fs::path& roots_file) {
  config.validate();
  const auto table = io::read_csv(roots_file);
  const ModelSpec base = config.model();
  const auto harmonics = SelfConsistency(base, config.quadrature_points).harmonics();
  const auto names = moment_columns(harmonics);
  const auto malformed = [&](const std::string& what) {
    return ConfigError("malformed roots file " + roots_file.string() + ": " + what);
  };

  std::size_t sigma_col = 0;
  std::vector<std::size_t> moment_cols;
  try {
    sigma_col = table.column("sigma");
    for (const auto& n : names) moment_cols.push_back(table.column(n));
  } catch (const ConfigError& e) {
    throw malformed(e.what());
  }

  StabilityResult out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto cell = [&](std::size_t c) {
      try {
        return io::detail::parse_double(table.header[c], row[c]);
      } catch (const ConfigError& e) {
        throw malformed("row " + std::to_string(r + 1) + ": " + e.what());
      }
    };
    const double sigma = cell(sigma_col);
    if (!(sigma > 0.0)) throw malformed("row " + std::to_string(r + 1) + ": sigma must be > 0");
    std::vector<double> m;
    for (std::size_t c : moment_cols) m.push_back(cell(c));
    const ModelSpec spec = base.with_sigma(sigma);
    auto rho = SelfConsistency(spec, config.quadrature_points).density(m);
    out.spectra.push_back(classify(rho, spec, config.stability_J));
    out.roots.push_back(std::move(rho));
  }

  out.file = fs::path(config.directory) / "eigs.csv";
  io::CsvWriter csv(out.file, config.hash(), {"root", "sigma", "index", "re", "im", "stability"});
  for (std::size_t r = 0; r < out.roots.size(); ++r)
    for (std::size_t i = 0; i < out.spectra[r].eigenvalues.size(); ++i) {
      const auto& ev = out.spectra[r].eigenvalues[i];
      csv.row(r, out.roots[r].sigma, i, ev.real(), ev.imag(), std::string(to_string(out.roots[r].stability)));
    }
  return out;
}

// ---------------------------------------------------------------------------
// converge
// ---------------------------------------------------------------------------

struct ConvergeResult {
  ConvergenceReport report;
  fs::path file;
};

inline ConvergeResult cmd_converge(const io::RunConfig& config) {
  config.validate();
  const ModelSpec spec = config.model();
  const SimConfig base = config.simulation();
  ConvergenceOptions options;
  options.ci_seed = config.ci_seed;
  options.threads = config.threads;

  ConvergeResult out;
  out.report = config.axis == "dt" ? mse_study_dt(spec, base, config.dt_list, config.dt_ref, config.trials, options)
                                   : mse_study_J(spec, base, config.J_list, config.J_ref, config.trials, options);
  out.file = fs::path(config.directory) / "convergence.csv";
  io::CsvWriter csv(out.file, config.hash(), {"axis", "value", "mse", "ci_low", "ci_high", "n_trials"});
  for (const auto& p : out.report.points)
    csv.row(std::string(to_string(out.report.axis)), p.value, p.mse, p.lo, p.hi, out.report.n_trials);

  auto fit = io::open_output(fs::path(config.directory) / "convergence_fit.csv");
  fit << "# config_hash=" << config.hash() << "\naxis,fitted_slope,fitted_points\n"
      << to_string(out.report.axis) << ',' << io::format_double(out.report.fitted_slope) << ','
      << out.report.fitted_points << '\n';
  if (!fit) throw IoError("write failed", (fs::path(config.directory) / "convergence_fit.csv").string());
  return out;
}

// ---------------------------------------------------------------------------
// langevin
// ---------------------------------------------------------------------------

/// U(y) = y^4/4 - y^2/2, wells at +-1.
inline double double_well_U(double y) { return 0.25 * y * y * y * y - 0.5 * y * y; }
inline double double_well_U_prime(double y) { return y * y * y - y; }

struct LangevinHistogram {
  std::vector<double> edges;
  std::vector<double> empirical;  // probability per bin
  std::vector<double> reference;  // probability per bin under e^{-2U/alpha}/Z
  double tv = 0.0;
};

/// Histogram of the samples on [lo, hi] against the Maxwellian e^{-2U/alpha}.
/// Samples outside the range form one extra bin on both sides of the
/// comparison, so the total variation distance is over the whole line.
inline LangevinHistogram maxwellian_histogram(std::span<const double> samples, double alpha, std::size_t bins,
                                              double lo, double hi) {
  if (samples.empty()) throw ConfigError("maxwellian_histogram: no samples");
  if (!(alpha > 0.0)) throw ConfigError("maxwellian_histogram: alpha must be > 0");
  if (bins < 1 || !(hi > lo)) throw ConfigError("maxwellian_histogram: need bins >= 1 and hi > lo");
  LangevinHistogram h;
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(lo + width * static_cast<double>(i));
  h.empirical.assign(bins, 0.0);
  double outside = 0.0;
  for (double y : samples) {
    const double pos = (y - lo) / width;
    if (pos < 0.0 || pos >= static_cast<double>(bins))
      outside += 1.0;
    else
      h.empirical[static_cast<std::size_t>(pos)] += 1.0;
  }
  const double n = static_cast<double>(samples.size());
  for (auto& v : h.empirical) v /= n;
  outside /= n;

  // Simpson on a fine grid wide enough to hold all of the reference mass.
  const double reach = std::max({std::abs(lo), std::abs(hi), 1.0}) + 4.0;
  const std::size_t fine = 200000;
  const double dx = 2.0 * reach / static_cast<double>(fine);
  const auto density = [&](double y) { return std::exp(-2.0 * (double_well_U(y) + 0.25) / alpha); };
  double total = 0.0;
  h.reference.assign(bins, 0.0);
  for (std::size_t i = 0; i < fine; ++i) {
    const double a = -reach + dx * static_cast<double>(i);
    const double m = a + 0.5 * dx;
    const double w = dx / 6.0 * (density(a) + 4.0 * density(m) + density(a + dx));
    total += w;
    const double pos = (m - lo) / width;
    if (pos >= 0.0 && pos < static_cast<double>(bins)) h.reference[static_cast<std::size_t>(pos)] += w;
  }
  double inside = 0.0;
  for (auto& v : h.reference) inside += (v /= total);
  for (std::size_t i = 0; i < bins; ++i) h.tv += std::abs(h.empirical[i] - h.reference[i]);
  h.tv = 0.5 * (h.tv + std::abs(outside - (1.0 - inside)));
  return h;
}

struct LangevinResult {
  std::vector<double> path;
  LangevinHistogram histogram;
  std::vector<fs::path> files;
};

inline LangevinResult cmd_langevin(const io::RunConfig& config) {
  config.validate();
  LangevinResult out;
  out.path = simulate_langevin(double_well_U_prime, config.alpha, config.dt, config.t_max, config.seed, config.y0,
                               config.record_stride);
  if (config.alpha > 0.0) out.histogram = maxwellian_histogram(out.path, config.alpha, config.langevin_bins, -2.5, 2.5);

  const fs::path dir = config.directory;
  const std::string hash = config.hash();
  {
    io::CsvWriter csv(dir / "path.csv", hash, {"t", "y"});
    const double step = config.dt * static_cast<double>(config.record_stride);
    for (std::size_t i = 0; i < out.path.size(); ++i) csv.row(step * static_cast<double>(i), out.path[i]);
    out.files.push_back(dir / "path.csv");
  }
  if (config.alpha > 0.0) {
    io::CsvWriter csv(dir / "histogram.csv", hash, {"lo", "hi", "empirical", "reference"});
    const auto& h = out.histogram;
    for (std::size_t i = 0; i < h.empirical.size(); ++i) csv.row(h.edges[i], h.edges[i + 1], h.empirical[i], h.reference[i]);
    out.files.push_back(dir / "histogram.csv");
  }
  return out;
}

}  // namespace mkv::cli
