#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xfel/grid.hpp"

namespace xfel {

/// Observables at one time. `total` is the sum of the four energy components.
struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double kinetic = 0.0;    ///< eps^2 int |grad u|^2
  double hartree = 0.0;    ///< (C1/2) int rho V_H
  double potential = 0.0;  ///< int V |u|^2
  double nonlinear = 0.0;  ///< -(2a/(sigma+2)) int |u|^(sigma+2)
  double total = 0.0;
  double h1 = 0.0;  ///< ||grad u||_L2
  double max_density = 0.0;
};

struct EnergyParams {
  double a = 0.0;
  double sigma = 2.0 / 3.0;
  double C1 = 0.0;
};

double mass(const ComplexField& u);
double h1_seminorm(const ComplexField& u);

/// Evaluates all energy components of u given the external potential sampled
/// at the same time (`potential` may be null for V = 0).
DiagnosticsRecord compute_diagnostics(const ComplexField& u, const RealField* potential,
                                      const EnergyParams& params, double t);

struct SeriesPoint {
  double t = 0.0;
  double value = 0.0;
};
using Series = std::vector<SeriesPoint>;

/// For each sample t with t + window <= t_end, the mean of the piecewise
/// linear interpolant over [t, t + window].
Series window_average(const Series& series, double window);

struct Snapshot {
  double t = 0.0;
  ComplexField u;
};

struct BlowupReport {
  double blowup_time = 0.0;  ///< interpolated threshold crossing
  double last_time = 0.0;
  double threshold = 0.0;
  std::string reason;
  Series h1_history;
};

/// Everything a finished (or blow-up truncated) evolution leaves behind.
struct RunRecord {
  std::vector<DiagnosticsRecord> samples;  ///< at snapshot times, t = 0 included
  std::vector<Snapshot> snapshots;         ///< only when fields were retained
  std::optional<BlowupReport> blowup;
  double t_final = 0.0;

  bool blew_up() const noexcept { return blowup.has_value(); }
  Series series(double DiagnosticsRecord::*member) const;
};

struct RunDistance {
  double l2_final = 0.0;
  double l2_sup = 0.0;
  double energy_l1 = 0.0;  ///< NaN if the window is longer than the run
  Series relative_distance;  ///< ||u_a - u_b|| / ||u_b||
};

/// Streaming form of `run_distance` for runs advanced in lockstep.
class DistanceAccumulator {
 public:
  void add(double t, const ComplexField& ua, const ComplexField& ub, double energy_a,
           double energy_b);
  /// `window` <= 0 compares raw energies.
  RunDistance finish(double window) const;

 private:
  Series energy_a_, energy_b_;
  RunDistance partial_;
};

/// Distances between run_a (energy window-averaged) and run_b. Both runs must
/// carry snapshots at the same times.
RunDistance run_distance(const RunRecord& run_a, const RunRecord& run_b, double window);

/// rate_i = log(err_{i-1}/err_i) / log(omega_i/omega_{i-1}); log2 for doubling.
std::vector<double> convergence_rates(std::span<const double> errors,
                                      std::span<const double> omegas);

struct BlowupSettings {
  bool enabled = false;
  double h1_factor = 50.0;  ///< threshold relative to the first observed h1
  double h1_absolute = 0.0;  ///< used instead when > 0
  bool expected = false;
  bool operator==(const BlowupSettings&) const = default;
};

/// Watches a record stream and reports the first h1 threshold crossing or
/// non-finite value.
class BlowupDetector {
 public:
  explicit BlowupDetector(BlowupSettings settings);
  std::optional<BlowupReport> observe(const DiagnosticsRecord& record);
  const Series& history() const noexcept { return history_; }

 private:
  BlowupSettings settings_;
  double threshold_ = 0.0;
  Series history_;
};

}  // namespace xfel
