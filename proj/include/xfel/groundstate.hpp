#pragma once

#include <optional>
#include <vector>

#include "xfel/propagator.hpp"

namespace xfel {

struct GroundStateOptions {
  double target_mass = 1.0;
  double tol = 1e-10;  ///< relative energy change that stops the flow
  double tau = 1e-3;   ///< imaginary time step
  long max_iterations = 100000;
};

struct GroundStateResult {
  ComplexField u;
  double energy = 0.0;
  double chemical_potential = 0.0;
  double residual = 0.0;  ///< ||H[u]u - mu u|| / ||u||
  long iterations = 0;
  long monotonicity_violations = 0;  ///< steps where E rose by more than 1e-12 relative
  std::vector<double> energy_history;
};

/// Normalised imaginary-time flow on the energy of `config` (static
/// potentials only), started from `initial` or a unit Gaussian.
GroundStateResult imaginary_time_ground_state(const Grid& grid, const EvolutionConfig& config,
                                              const GroundStateOptions& options = {},
                                              const std::optional<ComplexField>& initial = {});

/// H[u]u for the mean-field Hamiltonian of `config` at time 0.
ComplexField apply_hamiltonian(const ComplexField& u, const EvolutionConfig& config);

}  // namespace xfel
