#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xfel/config.hpp"
#include "xfel/diagnostics.hpp"
#include "xfel/field_io.hpp"

namespace xfel {

/// Builds u0 for the scenario (runs the ground-state flow when asked).
ComplexField make_initial(const ScenarioConfig& config);

struct ModelRun {
  std::string label;  ///< "fast", "averaged", ...
  RunRecord record;   ///< samples only; fields are not retained
  std::optional<ComplexField> final_field;
};

struct ScenarioResult {
  std::filesystem::path directory;
  std::vector<ModelRun> runs;
  std::optional<RunDistance> distance;  ///< fast vs averaged for model "both"
  bool unexpected_blowup = false;
};

/// Runs the configured model(s) and writes, per model, diagnostics.csv,
/// slices.bin and slices.hdr under <dir>/<model>/, plus run_metadata.json
/// (and comparison.csv for "both"). Set `write` false to skip all files.
ScenarioResult run_scenario(const ScenarioConfig& config, bool write = true);

struct ConvergenceReport {
  std::vector<ComparisonRow> rows;
  bool l2_monotone = false;
  bool energy_monotone = false;
  std::vector<std::string> failures;  ///< empty when both columns decrease
};

/// Averaged run once, fast runs at each omega, all advanced in lockstep.
ConvergenceReport run_convergence_suite(const ScenarioConfig& base, std::span<const double> omegas,
                                        bool write = true);

struct BlowupCase {
  double sigma = 0.0;
  std::optional<double> averaged_time;
  std::optional<double> fast_time;
  Series averaged_h1;
  Series fast_h1;
  /// max relative h1 gap between the models while averaged h1 < 10x initial.
  double h1_gap = 0.0;
};

struct BlowupSuiteReport {
  double ground_state_energy = 0.0;
  std::vector<BlowupCase> cases;
  bool ordering_ok = false;  ///< blow-up times strictly decrease with sigma where detected
  std::vector<std::string> notes;
};

BlowupSuiteReport run_blowup_suite(const ScenarioConfig& base, std::span<const double> sigmas,
                                   bool include_fast = true, bool write = true);

struct TrapReport {
  ScenarioResult result;
  Series centroid_x, centroid_y, centroid_z;
  double max_displacement = 0.0;  ///< max |centroid(t) - centroid(0)|
};
TrapReport run_trap_scenario(const ScenarioConfig& config, bool write = true);

struct TdReport {
  ScenarioResult result;
  double ablation_l2 = 0.0;  ///< final fast field vs the run with e frozen at its maximum
};
TdReport run_td_scenario(const ScenarioConfig& config, bool write = true);

struct LatticeReport {
  std::vector<ModelRun> runs;  ///< bloch fast runs per omega and the averaged run
  double coarse_plain_error = 0.0;  ///< vs the fine plain reference, final time
  double coarse_bloch_error = 0.0;
  double fine_dt = 0.0;
};
LatticeReport run_lattice_scenario(const ScenarioConfig& config, bool write = true);

struct StabilityReport {
  std::vector<double> etas;
  std::vector<double> solution_distance;   ///< final L2 between runs i and i+1
  std::vector<double> potential_sup_diff;  ///< sup |V_i - V_{i+1}| at t = 0
  std::vector<double> potential_l2_diff;
  bool monotone = false;
};
StabilityReport run_stability_sweep(const ScenarioConfig& config, std::span<const double> etas,
                                    bool write = true);

/// Default mollification sweep for a config: factors times h_max^2.
std::vector<double> eta_sweep_values(const ScenarioConfig& config);

struct DirectoryComparison {
  double energy_l1 = 0.0;
  double slice_l2_final = 0.0;
  double slice_l2_sup = 0.0;
  std::size_t frames = 0;
};
/// Compares two run directories from their diagnostics.csv and slices.
DirectoryComparison compare_directories(const std::filesystem::path& a,
                                        const std::filesystem::path& b, double window);

}  // namespace xfel
