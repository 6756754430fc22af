#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "xfel/bloch.hpp"
#include "xfel/diagnostics.hpp"
#include "xfel/error.hpp"
#include "xfel/grid.hpp"
#include "xfel/potentials.hpp"

namespace xfel {

enum class Splitting { lie, strang };
enum class StepMode { plain_spectral, bloch };

const char* to_string(Splitting s) noexcept;
const char* to_string(StepMode m) noexcept;
Splitting parse_splitting(const std::string& name);
StepMode parse_step_mode(const std::string& name);

/// Time stepping and model constants. epsilon lives on the grid.
struct EvolutionConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  Splitting splitting = Splitting::strang;
  double a = 0.0;
  double sigma = 2.0 / 3.0;
  double C1 = 0.0;
  PotentialSpec potential;
  StepMode step_mode = StepMode::plain_spectral;
  int n_sub = 4;            ///< Gauss nodes per step for time-dependent potentials
  int snapshot_stride = 1;  ///< steps between recorded samples
  int n_bands = 0;          ///< 0 keeps every band
  int bloch_substeps = 1;   ///< frozen-shift pieces per bloch linear step
  BlowupSettings blowup;
  bool keep_fields = false;  ///< store field snapshots in the run record
  bool literal_c_squared = false;  ///< energy uses c V instead of V for Coulomb leaves

  EnergyParams energy_params() const { return {a, sigma, C1}; }
};

void validate(const EvolutionConfig& config);

struct EvolutionState {
  double t = 0.0;
  ComplexField u;
  RealField hartree;  ///< last Hartree potential used by a phase step
  long step_index = 0;

  explicit EvolutionState(ComplexField field)
      : u(std::move(field)), hartree(u.grid()) {}
};

/// Non-finite values appeared in the field; carries the last finite state.
class BreakdownError : public Error {
 public:
  BreakdownError(const std::string& message, double last_good_time, ComplexField last_good)
      : Error(ErrorKind::numerical_breakdown, message),
        last_good_time_(last_good_time),
        last_good_(std::move(last_good)) {}
  double last_good_time() const noexcept { return last_good_time_; }
  const ComplexField& last_good() const noexcept { return last_good_; }

 private:
  double last_good_time_;
  ComplexField last_good_;
};

/// Splitting steps for one model on one grid.
class Propagator {
 public:
  Propagator(const Grid& grid, EvolutionConfig config);
  ~Propagator();
  Propagator(Propagator&&) noexcept;
  Propagator& operator=(Propagator&&) noexcept;

  const Grid& grid() const noexcept { return grid_; }
  const EvolutionConfig& config() const noexcept { return config_; }

  /// Linear substep over [t, t + dt]: free kinetic flow, or the exact
  /// kinetic + lattice flow in bloch mode.
  void linear_step(ComplexField& u, double t, double dt);
  /// Exact phase for Hartree, external potential and local term with the
  /// density frozen; recomputes state.hartree from |u|^2 first.
  void potential_phase_step(EvolutionState& state, double dt);
  void lie_step(EvolutionState& state, double dt);
  void strang_step(EvolutionState& state, double dt);
  /// One step per the configured splitting; advances state.t and step_index.
  void step(EvolutionState& state, double dt);

  /// Imaginary-time Strang step of length tau (no renormalisation). Requires
  /// a time-independent potential and plain spectral mode.
  void imaginary_step(ComplexField& u, double tau);

  /// Diagnostics at time t with V sampled at t (fast) or the averaged field.
  DiagnosticsRecord diagnostics(const ComplexField& u, double t);
  /// V(t, .) as used by the energy.
  RealField potential_at(double t);

 private:
  struct BlochPart;

  void apply_phase(ComplexField& u, const RealField& integral, const RealField& hartree, double dt,
                   bool imaginary) const;
  BlochBandTable& bloch_table(double t);

  Grid grid_;
  EvolutionConfig config_;
  PotentialEvaluator phase_potential_;
  PotentialEvaluator energy_potential_;
  std::unique_ptr<BlochPart> bloch_;
};

/// Per-step callback; called once at t = 0 and after every step.
using Observer = std::function<void(const EvolutionState&, const DiagnosticsRecord&)>;

/// Step-at-a-time driver so several runs can be advanced in lockstep.
class Evolution {
 public:
  Evolution(ComplexField initial, EvolutionConfig config);

  bool done() const noexcept { return finished_; }
  long total_steps() const noexcept { return n_steps_; }
  /// Advances one step (the last one is shortened to land on t_end).
  void advance();
  /// True when the step just taken landed on a sample time.
  bool sampled() const noexcept { return sampled_; }

  const EvolutionState& state() const noexcept { return state_; }
  const DiagnosticsRecord& last_record() const noexcept { return last_; }
  const RunRecord& record() const noexcept { return record_; }
  RunRecord take_record() { return std::move(record_); }
  Propagator& propagator() noexcept { return propagator_; }
  void add_observer(Observer observer);

 private:
  void observe();

  Propagator propagator_;
  EvolutionState state_;
  BlowupDetector detector_;
  RunRecord record_;
  DiagnosticsRecord last_;
  std::vector<Observer> observers_;
  long n_steps_ = 0;
  bool finished_ = false;
  bool sampled_ = true;
};

RunRecord evolve(const ComplexField& initial, const EvolutionConfig& config,
                 const std::vector<Observer>& observers = {});

/// Energy components of u for the configured model at time t.
DiagnosticsRecord energy(const ComplexField& u, const EvolutionConfig& config, double t);

}  // namespace xfel
