#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xfel/groundstate.hpp"
#include "xfel/propagator.hpp"

namespace xfel {

enum class ModelKind { fast, averaged, both };
const char* to_string(ModelKind m) noexcept;
ModelKind parse_model_kind(const std::string& name);

/// Normalization of the Hartree kernel: `coulomb` solves -Lap V = 4 pi rho
/// (kernel 1/|x|), `poisson` solves -Lap V = rho (kernel 1/(4 pi |x|)).
enum class HartreeKernel { coulomb, poisson };
const char* to_string(HartreeKernel k) noexcept;

struct GridConfig {
  int dim = 3;
  Vec3 lengths{16.0, 16.0, 16.0};
  Index3 counts{128, 128, 128};
  double epsilon = 1.0;

  Grid make() const;
  bool operator==(const GridConfig&) const = default;
};

enum class DatumKind { gaussian, ground_state, file, zero };

/// u0 = amplitude exp(-alpha |x - center|^2 + i k.x), a ground state of the
/// averaged model, or a field file.
struct InitialDatum {
  DatumKind kind = DatumKind::gaussian;
  Vec3 center{0.0, 0.0, 0.0};
  double alpha = 4.0;
  Vec3 wavevector{0.0, 0.0, 0.0};
  double amplitude = 1.0;
  // ground_state
  double target_mass = 1.0;
  double prep_sigma = 2.0 / 3.0;
  double tau = 1e-3;
  double tol = 1e-10;
  long max_iterations = 100000;
  // file
  std::string path;

  bool operator==(const InitialDatum&) const = default;
};

struct SweepConfig {
  std::vector<double> omegas{5.0, 10.0, 20.0, 40.0};
  std::vector<double> sigmas{2.0, 1.5, 1.0, 0.75};
  std::vector<double> eta_factors{4.0, 1.0, 0.25};  ///< multiples of h_max^2
  double blowup_omega = 1e4;    ///< fast-model frequency in the blow-up suite
  std::vector<double> lattice_omegas{80.0, 160.0};
  int fine_factor = 4;          ///< fine/coarse point ratio for the lattice comparison
  bool operator==(const SweepConfig&) const = default;
};

struct OutputConfig {
  std::string directory = "out";
  int slice_stride = 100;  ///< steps between slice frames
  bool full_volume = false;
  bool operator==(const OutputConfig&) const = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  GridConfig grid;
  ModelKind model = ModelKind::averaged;
  PotentialSpec potential;
  double a = 0.0;
  double sigma = 2.0 / 3.0;
  double C1 = 0.0;
  HartreeKernel hartree_kernel = HartreeKernel::coulomb;
  InitialDatum initial;
  double dt = 1e-3;
  double t_end = 1.0;
  Splitting splitting = Splitting::strang;
  StepMode step_mode = StepMode::plain_spectral;
  int n_sub = 4;
  int snapshot_stride = 1;
  int n_bands = 0;
  int bloch_substeps = 1;
  double window = 0.1;  ///< energy averaging window for fast runs
  bool literal_c_squared = false;
  BlowupSettings blowup;
  std::optional<SweepConfig> sweep;
  OutputConfig output;

  bool operator==(const ScenarioConfig&) const = default;

  /// Evolution settings for one model; `fast` keeps the oscillating
  /// potential, otherwise its period average is used.
  EvolutionConfig evolution(bool fast) const;
  /// Hartree coupling in the 4 pi / |k|^2 normalization used by the solver.
  double hartree_coupling() const noexcept;
};

void validate(const ScenarioConfig& config);

ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const ScenarioConfig& config);

std::string serialize_potential(const PotentialSpec& spec);
PotentialSpec parse_potential(const std::string& json_text);

/// Sets the oscillation frequency on every leaf.
PotentialSpec with_omega(const PotentialSpec& spec, double omega);
/// Sets eta on every Coulomb leaf.
PotentialSpec with_eta(const PotentialSpec& spec, double eta);

}  // namespace xfel
