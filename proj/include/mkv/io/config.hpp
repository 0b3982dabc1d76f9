#pragma once

// Run configuration: INI-style sections of key = value pairs, overridable
// key by key (command-line flags are applied through the same setters).
//
//   [model]       preset, V, F, sigma, gamma, s
//   [simulation]  J, dt, t_max, seed, snapshot_stride, initial_condition
//   [analysis]    burn_in, bins, smoothing_bins, peak_fraction, merge_ratio,
//                 min_occupancy, hysteresis, match_tolerance
//   [output]      directory, formats, heatmap_width
//   [fixed_points] sigmas, grid, box, tol, quadrature_points, stability_J
//   [converge]    axis, dt_list, dt_ref, J_list, J_ref, trials, ci_seed, threads
//   [langevin]    potential, alpha, y0, record_stride, bins
//
// Custom potentials are comma-separated terms "k:a:b" for a cos kx + b sin kx.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mkv/errors.hpp"
#include "mkv/integrator.hpp"
#include "mkv/io/formats.hpp"
#include "mkv/model.hpp"
#include "mkv/observables.hpp"

namespace mkv::io {

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss{std::string(s)};
  while (std::getline(ss, cur, sep)) {
    auto t = trim(cur);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

inline double parse_double(std::string_view key, std::string_view text) {
  const auto t = trim(text);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || p != t.data() + t.size() || t.empty())
    throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(text) + "'");
  return v;
}

inline std::uint64_t parse_u64(std::string_view key, std::string_view text) {
  const auto t = trim(text);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || p != t.data() + t.size() || t.empty())
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + std::string(text) + "'");
  return v;
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

inline std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

}  // namespace detail

/// Parses "k:a:b, k:a:b" into a trigonometric series; b may be omitted.
inline TrigSeries parse_trig_series(std::string_view key, std::string_view text) {
  std::vector<TrigTerm> terms;
  for (const auto& term : detail::split(text, ',')) {
    const auto parts = detail::split(term, ':');
    if (parts.size() < 2 || parts.size() > 3)
      throw ConfigError(std::string(key) + ": term '" + term + "' is not of the form k:a[:b]");
    const auto k = detail::parse_u64(key, parts[0]);
    if (k == 0) throw ConfigError(std::string(key) + ": wavenumber must be >= 1 in term '" + term + "'");
    terms.push_back({static_cast<int>(k), detail::parse_double(key, parts[1]),
                     parts.size() == 3 ? detail::parse_double(key, parts[2]) : 0.0});
  }
  if (terms.empty()) throw ConfigError(std::string(key) + ": no terms");
  return TrigSeries(std::move(terms));
}

inline std::string format_trig_series(const TrigSeries& s) {
  std::string out;
  for (const auto& t : s.terms())
    out += (out.empty() ? "" : ",") + std::to_string(t.k) + ":" + format_double(t.cos_coef) + ":" +
           format_double(t.sin_coef);
  return out;
}

struct RunConfig {
  // [model]
  std::string preset = "double_well";
  std::string V;  // empty: take the preset's
  std::string F;
  double sigma = 0.2;
  double gamma = 1e-2;
  double s = 0.75;
  // [simulation]
  std::size_t J = 64;
  double dt = 1e-2;
  double t_max = 3e4;
  std::uint64_t seed = 1;
  std::size_t snapshot_stride = 100;
  std::string initial_condition = "sin_squared";
  // [analysis]
  double burn_in = 0.1;
  ModeDetectionOptions detection;
  // [output]
  std::string directory = "out";
  std::string formats = "csv,bin,ppm";
  std::size_t heatmap_width = 256;
  // [fixed_points]
  std::vector<double> sigmas;  // empty: model sigma only
  std::size_t grid = 9;
  double box = 2.0;
  double tol = 1e-10;
  std::size_t quadrature_points = 4096;
  std::size_t stability_J = 128;
  // [converge]
  std::string axis = "dt";
  std::vector<double> dt_list{1e-2, 5e-3, 2e-3, 1e-3, 5e-4};
  double dt_ref = 1e-4;
  std::vector<std::size_t> J_list{16, 32, 64};
  std::size_t J_ref = 512;
  std::size_t trials = 256;
  std::uint64_t ci_seed = 20240607;
  std::size_t threads = 0;
  // [langevin]
  std::string potential = "double_well";
  double alpha = 0.5;
  double y0 = 0.0;
  std::size_t record_stride = 10;
  std::size_t langevin_bins = 50;

  /// Sets one key ("section.key"); throws ConfigError naming unknown keys and
  /// unparsable values.
  void set(std::string_view name, std::string_view value);

  /// All keys with their current values, sorted by key.
  std::map<std::string, std::string> entries() const;

  /// Stable text form and its FNV-1a hash (hex). Where the output goes is
  /// not part of it.
  std::string canonical() const {
    std::string out;
    for (const auto& [k, v] : entries())
      if (k != "output.directory") out += k + "=" + v + "\n";
    return out;
  }
  std::string hash() const { return hex64(fnv1a(canonical())); }

  bool wants(std::string_view format) const {
    const auto f = detail::split(formats, ',');
    return std::find(f.begin(), f.end(), format) != f.end();
  }

  ModelSpec model() const {
    const auto p = parse_preset(preset);
    ModelSpec m = mkv::preset(p, sigma, gamma, s, J);
    if (!V.empty() || !F.empty())
      m = m.with_potentials(V.empty() ? m.V() : parse_trig_series("model.V", V),
                            F.empty() ? m.F() : parse_trig_series("model.F", F));
    return m;
  }

  SimConfig simulation() const {
    SimConfig c;
    c.dt = dt;
    c.t_max = t_max;
    c.modes = J;
    c.seed = seed;
    c.snapshot_stride = snapshot_stride;
    if (initial_condition == "sin_squared")
      c.initial_condition = InitialCondition::sin_squared();
    else if (initial_condition == "uniform")
      c.initial_condition = InitialCondition::uniform();
    else
      throw ConfigError("simulation.initial_condition: expected sin_squared or uniform, got '" + initial_condition +
                        "'");
    return c;
  }

  /// Checks every constraint the downstream modules impose.
  void validate() const;
};

namespace detail {

struct Key {
  std::function<void(RunConfig&, std::string_view, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Key scalar(T RunConfig::*field) {
  Key k;
  k.set = [field](RunConfig& c, std::string_view name, std::string_view v) {
    if constexpr (std::is_same_v<T, double>)
      c.*field = parse_double(name, v);
    else if constexpr (std::is_same_v<T, std::string>)
      c.*field = trim(v);
    else
      c.*field = static_cast<T>(parse_u64(name, v));
  };
  k.get = [field](const RunConfig& c) {
    if constexpr (std::is_same_v<T, double>)
      return format_double(c.*field);
    else if constexpr (std::is_same_v<T, std::string>)
      return c.*field;
    else
      return std::to_string(c.*field);
  };
  return k;
}

template <class T>
Key detection(T ModeDetectionOptions::*field) {
  Key k;
  k.set = [field](RunConfig& c, std::string_view name, std::string_view v) {
    if constexpr (std::is_same_v<T, double>)
      c.detection.*field = parse_double(name, v);
    else
      c.detection.*field = static_cast<T>(parse_u64(name, v));
  };
  k.get = [field](const RunConfig& c) {
    if constexpr (std::is_same_v<T, double>)
      return format_double(c.detection.*field);
    else
      return std::to_string(c.detection.*field);
  };
  return k;
}

inline const std::map<std::string, Key, std::less<>>& keys() {
  static const std::map<std::string, Key, std::less<>> table = [] {
    std::map<std::string, Key, std::less<>> t;
    t["model.preset"] = scalar(&RunConfig::preset);
    t["model.V"] = scalar(&RunConfig::V);
    t["model.F"] = scalar(&RunConfig::F);
    t["model.sigma"] = scalar(&RunConfig::sigma);
    t["model.gamma"] = scalar(&RunConfig::gamma);
    t["model.s"] = scalar(&RunConfig::s);
    t["simulation.J"] = scalar(&RunConfig::J);
    t["simulation.dt"] = scalar(&RunConfig::dt);
    t["simulation.t_max"] = scalar(&RunConfig::t_max);
    t["simulation.seed"] = scalar(&RunConfig::seed);
    t["simulation.snapshot_stride"] = scalar(&RunConfig::snapshot_stride);
    t["simulation.initial_condition"] = scalar(&RunConfig::initial_condition);
    t["analysis.burn_in"] = scalar(&RunConfig::burn_in);
    t["analysis.bins"] = detection(&ModeDetectionOptions::bins);
    t["analysis.smoothing_bins"] = detection(&ModeDetectionOptions::smoothing_bins);
    t["analysis.peak_fraction"] = detection(&ModeDetectionOptions::peak_fraction);
    t["analysis.merge_ratio"] = detection(&ModeDetectionOptions::merge_ratio);
    t["analysis.min_occupancy"] = detection(&ModeDetectionOptions::min_occupancy);
    t["analysis.hysteresis"] = detection(&ModeDetectionOptions::hysteresis);
    t["analysis.match_tolerance"] = detection(&ModeDetectionOptions::match_tolerance);
    t["output.directory"] = scalar(&RunConfig::directory);
    t["output.formats"] = scalar(&RunConfig::formats);
    t["output.heatmap_width"] = scalar(&RunConfig::heatmap_width);
    t["fixed_points.sigmas"] = {
        [](RunConfig& c, std::string_view name, std::string_view v) {
          c.sigmas.clear();
          for (const auto& x : split(v, ',')) c.sigmas.push_back(parse_double(name, x));
        },
        [](const RunConfig& c) { return join(c.sigmas); }};
    t["fixed_points.grid"] = scalar(&RunConfig::grid);
    t["fixed_points.box"] = scalar(&RunConfig::box);
    t["fixed_points.tol"] = scalar(&RunConfig::tol);
    t["fixed_points.quadrature_points"] = scalar(&RunConfig::quadrature_points);
    t["fixed_points.stability_J"] = scalar(&RunConfig::stability_J);
    t["converge.axis"] = scalar(&RunConfig::axis);
    t["converge.dt_list"] = {
        [](RunConfig& c, std::string_view name, std::string_view v) {
          c.dt_list.clear();
          for (const auto& x : split(v, ',')) c.dt_list.push_back(parse_double(name, x));
        },
        [](const RunConfig& c) { return join(c.dt_list); }};
    t["converge.dt_ref"] = scalar(&RunConfig::dt_ref);
    t["converge.J_list"] = {
        [](RunConfig& c, std::string_view name, std::string_view v) {
          c.J_list.clear();
          for (const auto& x : split(v, ',')) c.J_list.push_back(parse_u64(name, x));
        },
        [](const RunConfig& c) { return join(c.J_list); }};
    t["converge.J_ref"] = scalar(&RunConfig::J_ref);
    t["converge.trials"] = scalar(&RunConfig::trials);
    t["converge.ci_seed"] = scalar(&RunConfig::ci_seed);
    t["converge.threads"] = scalar(&RunConfig::threads);
    t["langevin.potential"] = scalar(&RunConfig::potential);
    t["langevin.alpha"] = scalar(&RunConfig::alpha);
    t["langevin.y0"] = scalar(&RunConfig::y0);
    t["langevin.record_stride"] = scalar(&RunConfig::record_stride);
    t["langevin.bins"] = scalar(&RunConfig::langevin_bins);
    return t;
  }();
  return table;
}

}  // namespace detail

inline void RunConfig::set(std::string_view name, std::string_view value) {
  const auto& table = detail::keys();
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown configuration key '" + std::string(name) + "'");
  it->second.set(*this, name, value);
}

inline std::map<std::string, std::string> RunConfig::entries() const {
  std::map<std::string, std::string> out;
  for (const auto& [k, key] : detail::keys()) out[k] = key.get(*this);
  return out;
}

inline void RunConfig::validate() const {
  const auto need = [](bool ok, const char* key, const std::string& what) {
    if (!ok) throw ConfigError(std::string(key) + ": " + what);
  };
  need(sigma > 0.0, "model.sigma", "must be > 0");
  need(gamma >= 0.0, "model.gamma", "must be >= 0");
  need(s > 0.5, "model.s", "must be > 1/2 for trace-class noise");
  need(J >= 2 && J % 2 == 0, "simulation.J", "must be even and >= 2");
  need(dt > 0.0, "simulation.dt", "must be > 0");
  need(t_max >= 0.0, "simulation.t_max", "must be >= 0");
  need(snapshot_stride >= 1, "simulation.snapshot_stride", "must be >= 1");
  need(burn_in >= 0.0 && burn_in < 1.0, "analysis.burn_in", "must lie in [0, 1)");
  need(detection.bins >= 4, "analysis.bins", "must be >= 4");
  need(detection.smoothing_bins >= 0.0, "analysis.smoothing_bins", "must be >= 0");
  need(detection.peak_fraction >= 0.0 && detection.peak_fraction < 1.0, "analysis.peak_fraction",
       "must lie in [0, 1)");
  need(detection.merge_ratio > 0.0, "analysis.merge_ratio", "must be > 0");
  need(detection.min_occupancy >= 0.0 && detection.min_occupancy < 1.0, "analysis.min_occupancy",
       "must lie in [0, 1)");
  need(detection.hysteresis > 0.0 && detection.hysteresis <= 0.5, "analysis.hysteresis", "must lie in (0, 0.5]");
  need(detection.match_tolerance >= 0.0, "analysis.match_tolerance", "must be >= 0");
  need(!directory.empty(), "output.directory", "must not be empty");
  for (const auto& f : detail::split(formats, ','))
    need(f == "csv" || f == "bin" || f == "ppm", "output.formats", "unknown format '" + f + "'");
  need(heatmap_width >= 1, "output.heatmap_width", "must be >= 1");
  for (double x : sigmas) need(x > 0.0, "fixed_points.sigmas", "every sigma must be > 0");
  need(grid >= 1, "fixed_points.grid", "must be >= 1");
  need(box > 0.0, "fixed_points.box", "must be > 0");
  need(tol > 0.0, "fixed_points.tol", "must be > 0");
  need(quadrature_points >= 256, "fixed_points.quadrature_points", "must be >= 256");
  need(stability_J >= 2 && stability_J % 2 == 0, "fixed_points.stability_J", "must be even and >= 2");
  need(axis == "dt" || axis == "J", "converge.axis", "must be dt or J");
  need(!dt_list.empty(), "converge.dt_list", "must not be empty");
  for (double x : dt_list) need(x > 0.0, "converge.dt_list", "every dt must be > 0");
  need(dt_ref > 0.0, "converge.dt_ref", "must be > 0");
  need(!J_list.empty(), "converge.J_list", "must not be empty");
  for (std::size_t j : J_list) need(j >= 2 && j % 2 == 0 && j <= J_ref, "converge.J_list", "every J must be even and <= J_ref");
  need(J_ref >= 2 && J_ref % 2 == 0, "converge.J_ref", "must be even and >= 2");
  need(trials >= 1, "converge.trials", "must be >= 1");
  need(potential == "double_well", "langevin.potential", "only double_well is available");
  need(alpha >= 0.0, "langevin.alpha", "must be >= 0");
  need(record_stride >= 1, "langevin.record_stride", "must be >= 1");
  need(langevin_bins >= 2, "langevin.bins", "must be >= 2");
  (void)model();
  (void)simulation();
}

/// Applies the keys of an INI file on top of the current values.
inline void load_ini(RunConfig& config, const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("configuration file not found", path.string());
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(path.string() + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(path.string() + ": key '" + section + "' outside of a section");
    for (const auto& [key, value] : body) config.set(section + "." + key, value.data());
  }
}

inline RunConfig load_config(const std::filesystem::path& path) {
  RunConfig c;
  load_ini(c, path);
  c.validate();
  return c;
}

}  // namespace mkv::io
