#include "xfel/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "xfel/fft.hpp"
#include "xfel/log.hpp"
#include "xfel/spectral.hpp"

namespace xfel {
namespace {

constexpr double kPi = std::numbers::pi;

PotentialSpec without_lattice(const PotentialSpec& spec) {
  PotentialSpec out;
  out.kind = PotentialKind::composite;
  for (auto& leaf : leaves(spec))
    if (!is_lattice(leaf.kind)) out.children.push_back(std::move(leaf));
  return out;
}

// Coulomb leaves scaled by c once more: the literal "c V" reading of the energy.
PotentialSpec squared_strength(const PotentialSpec& spec) {
  PotentialSpec out;
  out.kind = PotentialKind::composite;
  for (auto leaf : leaves(spec)) {
    if (leaf.kind == PotentialKind::fast_coulomb || leaf.kind == PotentialKind::averaged_coulomb)
      leaf.c *= leaf.c;
    out.children.push_back(std::move(leaf));
  }
  return out;
}

bool finite_field(const ComplexField& u) {
  for (const auto& v : u.values())
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

}  // namespace

const char* to_string(Splitting s) noexcept { return s == Splitting::lie ? "lie" : "strang"; }
const char* to_string(StepMode m) noexcept {
  return m == StepMode::bloch ? "bloch" : "plain_spectral";
}

Splitting parse_splitting(const std::string& name) {
  if (name == "lie") return Splitting::lie;
  if (name == "strang") return Splitting::strang;
  fail(ErrorKind::config, "unknown splitting '" + name + "'");
}

StepMode parse_step_mode(const std::string& name) {
  if (name == "plain_spectral" || name == "plain") return StepMode::plain_spectral;
  if (name == "bloch") return StepMode::bloch;
  fail(ErrorKind::config, "unknown step mode '" + name + "'");
}

void validate(const EvolutionConfig& c) {
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) fail(ErrorKind::config, "dt must be positive");
  if (!(c.t_end >= 0.0) || !std::isfinite(c.t_end)) fail(ErrorKind::config, "t_end must be >= 0");
  if (!(c.sigma > 0.0)) fail(ErrorKind::config, "sigma must be positive");
  if (!std::isfinite(c.a) || !std::isfinite(c.C1)) fail(ErrorKind::config, "a and C1 must be finite");
  if (c.snapshot_stride < 1) fail(ErrorKind::config, "snapshot_stride must be >= 1");
  if (c.n_sub < 1) fail(ErrorKind::config, "n_sub must be >= 1");
  if (c.n_bands < 0) fail(ErrorKind::config, "n_bands must be >= 0");
  if (c.bloch_substeps < 1) fail(ErrorKind::config, "bloch_substeps must be >= 1");
  validate(c.potential);
  if (c.step_mode == StepMode::bloch) {
    const auto ls = leaves(c.potential);
    const auto n = std::count_if(ls.begin(), ls.end(),
                                 [](const PotentialSpec& p) { return is_lattice(p.kind); });
    if (n == 0) fail(ErrorKind::config, "bloch step mode needs a lattice potential");
    if (n > 1) fail(ErrorKind::unsupported, "bloch step mode supports one lattice term");
  }
}

// ---------------------------------------------------------------------------

struct Propagator::BlochPart {
  PotentialSpec lattice;
  std::optional<BlochBandTable> table;
  Vec3 table_e{0.0, 0.0, 0.0};
  int rebuilds = 0;
};

Propagator::Propagator(const Grid& grid, EvolutionConfig config)
    : grid_(grid),
      config_(std::move(config)),
      phase_potential_(grid, config_.step_mode == StepMode::bloch
                                 ? without_lattice(config_.potential)
                                 : config_.potential),
      energy_potential_(grid, config_.literal_c_squared ? squared_strength(config_.potential)
                                                        : config_.potential) {
  validate(config_);
  if (config_.C1 != 0.0 && grid.dim() != 3)
    fail(ErrorKind::unsupported, "the Hartree term needs a three-dimensional grid");
  if (config_.step_mode == StepMode::bloch) {
    bloch_ = std::make_unique<BlochPart>();
    for (auto& leaf : leaves(config_.potential))
      if (is_lattice(leaf.kind)) bloch_->lattice = leaf;
  }
}

Propagator::~Propagator() = default;
Propagator::Propagator(Propagator&&) noexcept = default;
Propagator& Propagator::operator=(Propagator&&) noexcept = default;

BlochBandTable& Propagator::bloch_table(double t) {
  auto& b = *bloch_;
  const auto& s = b.lattice;
  if (s.kind == PotentialKind::lattice) {
    if (!b.table) b.table = build_band_table(s.lattice_freqs, grid_, config_.n_bands, s.lattice_depth);
    return *b.table;
  }
  const Vec3 e = s.shift.e_at(t);
  if (b.table) {
    if (!s.shift.time_dependent_e()) return *b.table;
    const Vec3 d{e[0] - b.table_e[0], e[1] - b.table_e[1], e[2] - b.table_e[2]};
    if (std::sqrt(squared_norm(d)) <= 1e-3 * s.shift.max_amplitude()) return *b.table;
  }
  auto profiles = averaged_lattice_profiles(grid_, s.lattice_freqs, e, s.n_quad);
  Index3 cells{1, 1, 1};
  for (int a = 0; a < grid_.dim(); ++a) {
    if (s.lattice_freqs[a] == 0.0) {
      cells[a] = grid_.count(a);
      profiles[a].clear();
      continue;
    }
    cells[a] = static_cast<int>(std::lround(s.lattice_freqs[a] * grid_.length(a) / kPi));
    for (auto& v : profiles[a]) v *= s.lattice_depth;
  }
  b.table = build_band_table(grid_, profiles, cells, config_.n_bands);
  b.table_e = e;
  ++b.rebuilds;
  return *b.table;
}

void Propagator::linear_step(ComplexField& u, double t, double dt) {
  if (!bloch_) {
    kinetic_propagate_inplace(u, dt);
    return;
  }
  const auto& s = bloch_->lattice;
  if (s.kind != PotentialKind::lattice) {
    bloch_step_inplace(u, dt, bloch_table(t + 0.5 * dt), Vec3{0.0, 0.0, 0.0});
    return;
  }
  // A moving lattice is frozen at the midpoint of each piece.
  const int pieces = config_.bloch_substeps;
  const double h = dt / pieces;
  for (int j = 0; j < pieces; ++j) {
    const double mid = t + (j + 0.5) * h;
    bloch_step_inplace(u, h, bloch_table(mid), b_of_t(s.shift, mid));
  }
}

void Propagator::apply_phase(ComplexField& u, const RealField& integral, const RealField& hartree,
                             double dt, bool imaginary) const {
  const double inv_eps = 1.0 / grid_.epsilon();
  const double a = config_.a, C1 = config_.C1, half_sigma = 0.5 * config_.sigma;
  const bool cube_root = std::abs(config_.sigma - 2.0 / 3.0) < 1e-15;
  auto vals = u.values();
  const auto vint = integral.values();
  const auto vh = hartree.values();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(vals.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double theta = vint[i];
    if (C1 != 0.0) theta += C1 * vh[i] * dt;
    if (a != 0.0) {
      const double rho = std::norm(vals[i]);
      const double local = rho > 0.0 ? (cube_root ? std::cbrt(rho) : std::pow(rho, half_sigma)) : 0.0;
      theta -= a * local * dt;
    }
    if (imaginary)
      vals[i] *= std::exp(-theta * inv_eps);
    else
      vals[i] *= std::polar(1.0, -theta * inv_eps);
  }
}

void Propagator::potential_phase_step(EvolutionState& state, double dt) {
  if (config_.C1 != 0.0) state.hartree = hartree_potential(density(state.u));
  RealField integral(grid_);
  if (!phase_potential_.empty() && dt != 0.0) {
    // A reversed step integrates over [t + dt, t] and flips the sign.
    if (dt > 0.0) {
      phase_potential_.accumulate_step_integral(integral, state.t, dt, config_.n_sub);
    } else {
      phase_potential_.accumulate_step_integral(integral, state.t + dt, -dt, config_.n_sub);
      integral *= -1.0;
    }
  }
  apply_phase(state.u, integral, state.hartree, dt, false);
}

void Propagator::lie_step(EvolutionState& state, double dt) {
  linear_step(state.u, state.t, dt);
  potential_phase_step(state, dt);
}

void Propagator::strang_step(EvolutionState& state, double dt) {
  const double h = 0.5 * dt;
  linear_step(state.u, state.t, h);
  potential_phase_step(state, dt);
  linear_step(state.u, state.t + h, h);
}

void Propagator::step(EvolutionState& state, double dt) {
  if (config_.splitting == Splitting::lie)
    lie_step(state, dt);
  else
    strang_step(state, dt);
  state.t += dt;
  ++state.step_index;
}

void Propagator::imaginary_step(ComplexField& u, double tau) {
  if (bloch_) fail(ErrorKind::unsupported, "imaginary time runs in plain spectral mode");
  if (phase_potential_.time_dependent())
    fail(ErrorKind::config, "imaginary time needs a time-independent potential");
  // exp(-eps tau |k|^2) is the kinetic multiplier at dt = -i tau.
  const auto ctx = SpectralContext::get(grid_);
  const auto k2 = ctx->k_squared();
  const double scale = 1.0 / static_cast<double>(grid_.size());
  auto half_kinetic = [&](ComplexField& f) {
    ctx->forward(f.values());
    auto v = f.values();
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] *= scale * std::exp(-0.5 * grid_.epsilon() * tau * k2[i]);
    ctx->backward(f.values());
  };
  half_kinetic(u);
  RealField hartree(grid_);
  if (config_.C1 != 0.0) hartree = hartree_potential(density(u));
  RealField integral(grid_);
  if (!phase_potential_.empty()) phase_potential_.accumulate_step_integral(integral, 0.0, tau, 1);
  apply_phase(u, integral, hartree, tau, true);
  half_kinetic(u);
}

RealField Propagator::potential_at(double t) { return energy_potential_.sample(t); }

DiagnosticsRecord Propagator::diagnostics(const ComplexField& u, double t) {
  if (energy_potential_.empty()) return compute_diagnostics(u, nullptr, config_.energy_params(), t);
  const RealField v = energy_potential_.sample(t);
  return compute_diagnostics(u, &v, config_.energy_params(), t);
}

// ---------------------------------------------------------------------------

Evolution::Evolution(ComplexField initial, EvolutionConfig config)
    : propagator_(initial.grid(), std::move(config)),
      state_(std::move(initial)),
      detector_(propagator_.config().blowup) {
  const auto& c = propagator_.config();
  n_steps_ = static_cast<long>(std::ceil(c.t_end / c.dt - 1e-9));
  if (n_steps_ < 0) n_steps_ = 0;
  finished_ = n_steps_ == 0;
  observe();
  record_.t_final = 0.0;
}

void Evolution::add_observer(Observer observer) {
  observer(state_, last_);
  observers_.push_back(std::move(observer));
}

void Evolution::observe() {
  const auto& c = propagator_.config();
  last_ = propagator_.diagnostics(state_.u, state_.t);
  sampled_ = state_.step_index % c.snapshot_stride == 0 || state_.step_index == n_steps_;
  if (sampled_) {
    record_.samples.push_back(last_);
    if (c.keep_fields) record_.snapshots.push_back({state_.t, state_.u});
  }
  for (auto& obs : observers_) obs(state_, last_);
  if (!c.blowup.enabled) return;
  if (auto report = detector_.observe(last_)) {
    if (!sampled_) record_.samples.push_back(last_);
    record_.blowup = std::move(report);
    record_.t_final = state_.t;
    finished_ = true;
    log::info("blow-up detected at t=", record_.blowup->blowup_time, " (", record_.blowup->reason, ")");
  }
}

void Evolution::advance() {
  if (finished_) return;
  const auto& c = propagator_.config();
  const long next = state_.step_index + 1;
  const double t_next = next == n_steps_ ? c.t_end : static_cast<double>(next) * c.dt;
  const double dt = t_next - state_.t;
  std::optional<ComplexField> last_good;
  if (!c.blowup.enabled) last_good = state_.u;
  const double last_time = state_.t;
  propagator_.step(state_, dt);
  state_.t = t_next;
  if (!finite_field(state_.u) && !c.blowup.enabled) {
    std::ostringstream msg;
    msg << "non-finite field after the step ending at t=" << t_next;
    throw BreakdownError(msg.str(), last_time, std::move(*last_good));
  }
  observe();
  if (state_.step_index >= n_steps_) finished_ = true;
  if (!record_.blowup) record_.t_final = state_.t;
}

RunRecord evolve(const ComplexField& initial, const EvolutionConfig& config,
                 const std::vector<Observer>& observers) {
  Evolution run(initial, config);
  for (const auto& obs : observers) run.add_observer(obs);
  while (!run.done()) run.advance();
  return run.take_record();
}

DiagnosticsRecord energy(const ComplexField& u, const EvolutionConfig& config, double t) {
  Propagator p(u.grid(), config);
  return p.diagnostics(u, t);
}

}  // namespace xfel
