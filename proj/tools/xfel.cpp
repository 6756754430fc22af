// Command-line front end over the C API.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "xfel/xfel.h"

namespace {

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kBreakdown = 3, kBlowup = 4 };

int exit_code(xfel_status s) {
  switch (s) {
    case XFEL_OK: return kOk;
    case XFEL_ERR_CONFIG:
    case XFEL_ERR_DOMAIN:
    case XFEL_ERR_UNSUPPORTED:
    case XFEL_ERR_INVALID_ARGUMENT: return kConfig;
    case XFEL_ERR_BREAKDOWN: return kBreakdown;
    default: return kOther;
  }
}

int report(xfel_status s) {
  if (s != XFEL_OK) std::fprintf(stderr, "error (%s): %s\n", xfel_status_name(s), xfel_last_error());
  return exit_code(s);
}

struct Scenario {
  xfel_scenario* handle = nullptr;
  ~Scenario() { xfel_scenario_free(handle); }
};

std::vector<double> sweep_list(xfel_scenario* sc, const char* which) {
  size_t n = 0;
  xfel_scenario_sweep_values(sc, which, nullptr, 0, &n);
  std::vector<double> v(n);
  xfel_scenario_sweep_values(sc, which, v.data(), n, &n);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral solver for the oscillating-Coulomb NLS model and its time average"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the verb
  int threads = 0;
  std::string output, log_level = "warn";
  app.add_option("--threads", threads, "worker threads (default: runtime choice)");
  app.add_option("--output", output, "output directory (overrides the config)");
  app.add_option("--log-level", log_level, "debug, info, warn, error or off");

  std::string config_path;
  auto add_verb = [&](const char* name, const char* help) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("config", config_path, "scenario JSON file")->required()->check(CLI::ExistingFile);
    return cmd;
  };
  auto* run = add_verb("run", "run the configured model(s)");
  auto* sweep_omega = add_verb("sweep-omega", "fast vs averaged errors over a frequency sweep");
  std::vector<double> omegas;
  sweep_omega->add_option("--omegas", omegas, "frequencies (default: config sweep list)");
  auto* sweep_sigma = add_verb("sweep-sigma", "blow-up suite over nonlinearity exponents");
  std::vector<double> sigmas;
  bool no_fast = false;
  sweep_sigma->add_option("--sigmas", sigmas, "exponents (default: config sweep list)");
  sweep_sigma->add_flag("--no-fast", no_fast, "skip the fast-model runs");
  auto* sweep_eta = add_verb("sweep-eta", "stability sweep over the mollification width");
  std::vector<double> etas;
  sweep_eta->add_option("--etas", etas, "absolute eta values (default: config factors times h^2)");
  auto* trap = add_verb("trap", "harmonic-trap scenario");
  auto* td = add_verb("td", "time-dependent polarisation scenario with frozen-e ablation");
  auto* lattice = add_verb("lattice", "periodic-lattice scenario in Bloch mode");
  auto* ground = add_verb("ground-state", "imaginary-time ground state of the averaged model");
  std::string save_stem;
  ground->add_option("--save", save_stem, "write the field to <stem>.bin/.hdr");
  auto* compare = app.add_subcommand("compare", "compare two run directories");
  std::string dir_a, dir_b;
  double window = 0.0;
  compare->add_option("dir_a", dir_a)->required()->check(CLI::ExistingDirectory);
  compare->add_option("dir_b", dir_b)->required()->check(CLI::ExistingDirectory);
  compare->add_option("--window", window, "energy window applied to dir_a (0 = none)");

  CLI11_PARSE(app, argc, argv);

  if (auto s = xfel_set_log_level(log_level.c_str()); s != XFEL_OK) return report(s);
  if (threads > 0)
    if (auto s = xfel_set_threads(threads); s != XFEL_OK) return report(s);

  if (compare->parsed()) {
    xfel_dir_comparison c{};
    if (auto s = xfel_compare(dir_a.c_str(), dir_b.c_str(), window, &c); s != XFEL_OK) return report(s);
    std::printf("frames %zu\nenergy_l1 %.10g\nslice_l2_final %.10g\nslice_l2_sup %.10g\n", c.frames,
                c.energy_l1, c.slice_l2_final, c.slice_l2_sup);
    return kOk;
  }

  Scenario sc;
  if (auto s = xfel_scenario_load(config_path.c_str(), &sc.handle); s != XFEL_OK) return report(s);
  if (!output.empty())
    if (auto s = xfel_scenario_set_output(sc.handle, output.c_str()); s != XFEL_OK) return report(s);

  if (run->parsed()) {
    xfel_run_summary sum{};
    if (auto s = xfel_run(sc.handle, &sum); s != XFEL_OK) return report(s);
    if (sum.has_distance)
      std::printf("l2_final %.10g\nl2_sup %.10g\nenergy_l1 %.10g\n", sum.l2_final, sum.l2_sup,
                  sum.energy_l1);
    if (sum.unexpected_blowup) {
      std::fprintf(stderr, "run terminated by blow-up\n");
      return kBlowup;
    }
    return kOk;
  }
  if (sweep_omega->parsed()) {
    if (omegas.empty()) omegas = sweep_list(sc.handle, "omegas");
    std::vector<xfel_comparison_row> rows(omegas.size());
    int monotone = 0;
    if (auto s = xfel_sweep_omega(sc.handle, omegas.data(), omegas.size(), rows.data(), &monotone);
        s != XFEL_OK)
      return report(s);
    std::printf("%8s %14s %14s %14s %8s %8s\n", "omega", "l2_final", "l2_sup", "energy_l1", "rate",
                "e_rate");
    for (const auto& r : rows)
      std::printf("%8g %14.6e %14.6e %14.6e %8.3f %8.3f\n", r.omega, r.l2_final, r.l2_sup,
                  r.energy_l1, r.rate, r.energy_rate);
    std::printf("monotone %s\n", monotone ? "yes" : "no");
    return kOk;
  }
  if (sweep_sigma->parsed()) {
    if (sigmas.empty()) sigmas = sweep_list(sc.handle, "sigmas");
    std::vector<xfel_blowup_row> rows(sigmas.size());
    int ok = 0;
    if (auto s = xfel_sweep_sigma(sc.handle, sigmas.data(), sigmas.size(), !no_fast, rows.data(), &ok);
        s != XFEL_OK)
      return report(s);
    for (const auto& r : rows) {
      std::printf("sigma %g averaged ", r.sigma);
      r.averaged_blew_up ? std::printf("%.6g", r.averaged_time) : std::printf("none");
      if (!no_fast) {
        std::printf(" fast ");
        r.fast_blew_up ? std::printf("%.6g", r.fast_time) : std::printf("none");
        std::printf(" h1_gap %.4f", r.h1_gap);
      }
      std::printf("\n");
    }
    std::printf("ordering %s\n", ok ? "ok" : "violated");
    return kOk;
  }
  if (sweep_eta->parsed()) {
    if (etas.empty()) etas = sweep_list(sc.handle, "etas");
    const size_t m = etas.empty() ? 0 : etas.size() - 1;
    std::vector<double> dist(m), vsup(m);
    int monotone = 0;
    if (auto s = xfel_sweep_eta(sc.handle, etas.data(), etas.size(), dist.data(), vsup.data(), &monotone);
        s != XFEL_OK)
      return report(s);
    for (size_t i = 0; i < m; ++i)
      std::printf("eta %.6g -> %.6g  solution_l2 %.6e  potential_sup %.6e\n", etas[i], etas[i + 1],
                  dist[i], vsup[i]);
    std::printf("monotone %s\n", monotone ? "yes" : "no");
    return kOk;
  }
  if (trap->parsed()) {
    double d = 0.0;
    if (auto s = xfel_trap(sc.handle, &d); s != XFEL_OK) return report(s);
    std::printf("max_centroid_displacement %.10g\n", d);
    return kOk;
  }
  if (td->parsed()) {
    double d = 0.0;
    if (auto s = xfel_td(sc.handle, &d); s != XFEL_OK) return report(s);
    std::printf("frozen_e_ablation_l2 %.10g\n", d);
    return kOk;
  }
  if (lattice->parsed()) {
    double plain = 0.0, bloch = 0.0;
    if (auto s = xfel_lattice(sc.handle, &plain, &bloch); s != XFEL_OK) return report(s);
    std::printf("coarse_plain_error %.10g\ncoarse_bloch_error %.10g\n", plain, bloch);
    return kOk;
  }
  if (ground->parsed()) {
    xfel_ground_state_info info{};
    if (auto s = xfel_ground_state(sc.handle, save_stem.empty() ? nullptr : save_stem.c_str(), &info);
        s != XFEL_OK)
      return report(s);
    std::printf("energy %.12g\nchemical_potential %.12g\nresidual %.3e\niterations %ld\n", info.energy,
                info.chemical_potential, info.residual, info.iterations);
    return kOk;
  }
  return kOther;
}
