// mkvcount: simulate the noisy McKean-Vlasov equation on the circle, find and
// classify its stationary states, and run convergence studies.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "mkv/cli/commands.hpp"

namespace {

// Flags that map one-to-one onto configuration keys.
struct Overrides {
  std::map<std::string, std::string> values;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }
};

void add_common(CLI::App* app, Overrides& o) {
  o.add(app, "--seed", "simulation.seed", "Master seed (u64)");
  o.add(app, "--sigma", "model.sigma", "Diffusion coefficient");
  o.add(app, "--gamma", "model.gamma", "Noise amplitude");
  o.add(app, "--s", "model.s", "Noise decay exponent, lambda_k = gamma / k^s");
  o.add(app, "--J", "simulation.J", "Number of Fourier modes (even)");
  o.add(app, "--dt", "simulation.dt", "Time step");
  o.add(app, "--t-max", "simulation.t_max", "Final time");
  o.add(app, "--out", "output.directory", "Output directory");
  o.add(app, "--preset", "model.preset", "double_well or four_well");
  o.add(app, "--trials", "converge.trials", "Monte Carlo trials for converge");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counting stationary states of the McKean-Vlasov equation through a noisy SPDE"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.fallthrough();

  Overrides o;
  add_common(&app, o);

  auto* simulate = app.add_subcommand("simulate", "Integrate the SPDE; write series, heat map and mode summary");
  auto* fixed = app.add_subcommand("fixed-points", "Solve the self-consistency equation and classify roots");
  o.add(fixed, "--sigmas", "fixed_points.sigmas", "Comma-separated sigma sweep");
  auto* stability = app.add_subcommand("stability", "Spectra of the linearized operator at stored roots");
  std::string roots_file;
  stability->add_option("--roots", roots_file, "roots.csv written by fixed-points")->required();
  auto* converge = app.add_subcommand("converge", "Strong convergence study in dt or J");
  o.add(converge, "--axis", "converge.axis", "dt or J");
  std::string sweep_list, sweep_ref;
  converge->add_option("--list", sweep_list, "Comma-separated dt or J values");
  converge->add_option("--ref", sweep_ref, "Reference dt or J");
  auto* langevin = app.add_subcommand("langevin", "Scalar double-well Langevin demo");
  o.add(langevin, "--alpha", "langevin.alpha", "Noise strength alpha");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    mkv::io::RunConfig config;
    if (!config_path.empty()) mkv::io::load_ini(config, config_path);
    for (const auto& [key, value] : o.values) config.set(key, value);
    // --list and --ref depend on the axis, so they are applied last.
    const bool dt_axis = config.axis == "dt";
    if (!sweep_list.empty()) config.set(dt_axis ? "converge.dt_list" : "converge.J_list", sweep_list);
    if (!sweep_ref.empty()) config.set(dt_axis ? "converge.dt_ref" : "converge.J_ref", sweep_ref);
    config.validate();
    for (const auto& w : config.model().warnings()) std::cerr << "warning: " << w << '\n';

    if (*simulate) {
      const auto r = mkv::cli::cmd_simulate(config);
      std::printf("steps %zu, records %zu\n", r.trajectory.steps, r.trajectory.series.size());
      if (r.modes) {
        std::printf("n_modes %zu, hop_count %zu\n", r.modes->n_modes, r.modes->hop_count);
        for (const auto& c : r.modes->clusters)
          std::printf("  centroid (%+.4f, %+.4f)  occupancy %.3f\n", c.centroid[0], c.centroid[1], c.occupancy);
      }
    } else if (*fixed) {
      const auto r = mkv::cli::cmd_fixed_points(config);
      for (const auto& [sigma, found] : r.sweep) {
        std::printf("sigma %g: %zu roots\n", sigma, found.roots.size());
        for (std::size_t i = 0; i < found.roots.size(); ++i)
          std::printf("  (%+.10f, %+.10f)  leading %+.6e  %s\n", found.roots[i].m1(), found.roots[i].m2(),
                      found.spectra[i].leading.real(), mkv::to_string(found.roots[i].stability));
      }
    } else if (*stability) {
      const auto r = mkv::cli::cmd_stability(config, roots_file);
      for (std::size_t i = 0; i < r.roots.size(); ++i)
        std::printf("root %zu (sigma %g): leading %+.6e%+.6ei  %s\n", i, r.roots[i].sigma,
                    r.spectra[i].leading.real(), r.spectra[i].leading.imag(),
                    mkv::to_string(r.roots[i].stability));
    } else if (*converge) {
      const auto r = mkv::cli::cmd_converge(config);
      for (const auto& p : r.report.points)
        std::printf("%s = %-10g mse %.4e  [%.4e, %.4e]\n", mkv::to_string(r.report.axis), p.value, p.mse, p.lo, p.hi);
      std::printf("fitted slope %.4f over %zu points\n", r.report.fitted_slope, r.report.fitted_points);
    } else if (*langevin) {
      const auto r = mkv::cli::cmd_langevin(config);
      std::printf("samples %zu, total variation vs e^{-2U/alpha}: %.4f\n", r.path.size(), r.histogram.tv);
    }
  } catch (const mkv::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const mkv::DivergenceError& e) {
    std::cerr << "numerical divergence: " << e.what() << '\n';
    return 3;
  } catch (const mkv::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
