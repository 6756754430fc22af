#include "xfel/groundstate.hpp"

#include <cmath>
#include <sstream>

#include "xfel/fft.hpp"
#include "xfel/log.hpp"
#include "xfel/spectral.hpp"

namespace xfel {
namespace {

void normalise(ComplexField& u, double target_mass) {
  const double m = mass(u);
  if (!(m > 0.0) || !std::isfinite(m)) fail(ErrorKind::diverging_flow, "flow lost all mass");
  const double s = std::sqrt(target_mass / m);
  for (auto& v : u.values()) v *= s;
}

}  // namespace

ComplexField apply_hamiltonian(const ComplexField& u, const EvolutionConfig& config) {
  const Grid& g = u.grid();
  const auto ctx = SpectralContext::get(g);
  ComplexField out = u;
  ctx->forward(out.values());
  const auto k2 = ctx->k_squared();
  const double scale = g.epsilon() * g.epsilon() / static_cast<double>(g.size());
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= scale * k2[i];
  ctx->backward(out.values());

  PotentialEvaluator ev(g, config.potential);
  const RealField v = ev.empty() ? RealField(g) : ev.sample(0.0);
  const RealField rho = density(u);
  const RealField vh = config.C1 != 0.0 ? hartree_potential(rho) : RealField(g);
  for (std::size_t i = 0; i < o.size(); ++i) {
    const double local = rho[i] > 0.0 ? std::pow(rho[i], 0.5 * config.sigma) : 0.0;
    o[i] += (v[i] + config.C1 * vh[i] - config.a * local) * u[i];
  }
  return out;
}

GroundStateResult imaginary_time_ground_state(const Grid& grid, const EvolutionConfig& config,
                                              const GroundStateOptions& options,
                                              const std::optional<ComplexField>& initial) {
  if (!(options.tol > 0.0)) fail(ErrorKind::config, "ground-state tol must be positive");
  if (!(options.tau > 0.0)) fail(ErrorKind::config, "ground-state tau must be positive");
  if (!(options.target_mass > 0.0)) fail(ErrorKind::config, "target_mass must be positive");
  if (config.a > 0.0 && config.sigma >= 4.0 / 3.0)
    fail(ErrorKind::diverging_flow,
         "attractive local term with sigma >= 4/3 has no constrained minimiser");

  EvolutionConfig cfg = config;
  cfg.step_mode = StepMode::plain_spectral;
  Propagator prop(grid, cfg);

  GroundStateResult r{initial ? *initial : gaussian_packet(grid, {0.0, 0.0, 0.0}, 1.0), 0.0, 0.0, 0.0, 0, 0, {}};
  if (!r.u.grid().same_mesh(grid)) fail(ErrorKind::config, "initial guess grid mismatch");
  normalise(r.u, options.target_mass);
  double e_prev = prop.diagnostics(r.u, 0.0).total;
  const double h1_start = h1_seminorm(r.u);
  r.energy_history.push_back(e_prev);

  bool converged = false;
  for (long it = 1; it <= options.max_iterations; ++it) {
    prop.imaginary_step(r.u, options.tau);
    normalise(r.u, options.target_mass);
    const auto d = prop.diagnostics(r.u, 0.0);
    const double e = d.total;
    r.iterations = it;
    r.energy_history.push_back(e);
    if (!std::isfinite(e) || d.h1 > 1e3 * std::max(h1_start, 1e-300))
      fail(ErrorKind::diverging_flow, "energy unbounded below along the flow");
    if (e - e_prev > 1e-12 * std::abs(e_prev)) ++r.monotonicity_violations;
    const double change = std::abs(e - e_prev) / std::max(std::abs(e_prev), 1e-300);
    e_prev = e;
    if (change < options.tol) {
      converged = true;
      break;
    }
  }

  // Fix the global phase and return |u|.
  for (auto& v : r.u.values()) v = std::abs(v);
  r.energy = prop.diagnostics(r.u, 0.0).total;
  const ComplexField hu = apply_hamiltonian(r.u, cfg);
  const double m = mass(r.u);
  r.chemical_potential = inner_product(r.u, hu).real() / m;
  ComplexField res = hu;
  for (std::size_t i = 0; i < res.size(); ++i) res[i] -= r.chemical_potential * r.u[i];
  r.residual = l2_norm(res) / std::sqrt(m);
  if (r.monotonicity_violations > 0)
    log::warn("ground state: energy rose on ", r.monotonicity_violations, " steps");
  if (!converged) {
    std::ostringstream msg;
    msg << "ground state did not converge in " << options.max_iterations
        << " iterations (residual " << r.residual << ", energy " << r.energy << ")";
    fail(ErrorKind::convergence, msg.str());
  }
  log::info("ground state: E=", r.energy, " mu=", r.chemical_potential, " residual=", r.residual,
            " after ", r.iterations, " steps");
  return r;
}

}  // namespace xfel
