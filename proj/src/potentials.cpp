#include "xfel/potentials.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "xfel/error.hpp"
#include "xfel/log.hpp"

namespace xfel {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoOverSqrtPi = 1.1283791670955126;
// erf(z) == 1 in double precision beyond this argument.
constexpr double kErfSaturation = 6.0;

// 4-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 4> kGaussNodes{-0.8611363115940526, -0.3399810435848563,
                                            0.3399810435848563, 0.8611363115940526};
constexpr std::array<double, 4> kGaussWeights{0.3478548451374538, 0.6521451548625461,
                                              0.6521451548625461, 0.3478548451374538};

// Mollified 1/r with alpha = sqrt(2 pi / eta).
inline double mollified_inverse_distance(double r, double alpha) {
  const double z = alpha * r;
  if (z > kErfSaturation) return 1.0 / r;
  if (z < 1e-3) {
    const double z2 = z * z;
    return alpha * kTwoOverSqrtPi * (1.0 - z2 / 3.0 + z2 * z2 / 10.0);
  }
  return std::erf(z) / r;
}

void add_coulomb(const Grid& grid, const Vec3& center, double coeff, double eta,
                 std::span<double> acc) {
  if (coeff == 0.0) return;
  const double alpha = std::sqrt(2.0 * kPi / eta);
  std::array<std::vector<double>, 3> d2;
  for (int a = 0; a < 3; ++a) {
    d2[a].resize(grid.count(a));
    for (int i = 0; i < grid.count(a); ++i) {
      const double d = grid.coordinate(a, i) - center[a];
      d2[a][i] = d * d;
    }
  }
  const int n0 = grid.count(0), n1 = grid.count(1), n2 = grid.count(2);
#pragma omp parallel for schedule(static)
  for (int i0 = 0; i0 < n0; ++i0) {
    for (int i1 = 0; i1 < n1; ++i1) {
      const double base = d2[0][i0] + d2[1][i1];
      double* row = acc.data() + grid.flatten(i0, i1, 0);
      for (int i2 = 0; i2 < n2; ++i2)
        row[i2] += coeff * mollified_inverse_distance(std::sqrt(base + d2[2][i2]), alpha);
    }
  }
}

void add_trap(const Grid& grid, const Vec3& center, double coeff, std::span<double> acc) {
  if (coeff == 0.0) return;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 x = grid.point(i);
    acc[i] += coeff * ((x[0] - center[0]) * (x[0] - center[0]) +
                       (x[1] - center[1]) * (x[1] - center[1]) +
                       (x[2] - center[2]) * (x[2] - center[2]));
  }
}

// Adds coeff * sum_l profile_l(x_l) for per-axis 1D profiles.
void add_separable(const Grid& grid, const std::array<std::vector<double>, 3>& profile,
                   double coeff, std::span<double> acc) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto idx = grid.unflatten(i);
    double v = 0.0;
    for (int a = 0; a < grid.dim(); ++a) v += profile[a][idx[a]];
    acc[i] += coeff * v;
  }
}

bool nonzero(const Vec3& v) { return v[0] != 0.0 || v[1] != 0.0 || v[2] != 0.0; }

}  // namespace

std::array<std::vector<double>, 3> lattice_profiles(const Grid& grid, const Vec3& freqs,
                                                    const Vec3& shift) {
  std::array<std::vector<double>, 3> p;
  for (int a = 0; a < grid.dim(); ++a) {
    p[a].resize(grid.count(a));
    for (int i = 0; i < grid.count(a); ++i) {
      const double s = std::sin(freqs[a] * (grid.coordinate(a, i) - shift[a]));
      p[a][i] = s * s;
    }
  }
  return p;
}

Vec3 ShiftSpec::e_at(double t) const noexcept {
  if (law == ShiftLaw::constant) return e0;
  const double s = std::sin(2.0 * kPi * t);
  return {e0[0] * s, e0[1] * s, e0[2] * s};
}

double ShiftSpec::max_amplitude() const noexcept { return std::sqrt(squared_norm(e0)); }

Vec3 b_of_t(const ShiftSpec& shift, double t) {
  const Vec3 e = shift.e_at(t);
  const double s = std::sin(2.0 * kPi * shift.omega * t);
  return {e[0] * s, e[1] * s, e[2] * s};
}

const char* to_string(PotentialKind kind) noexcept {
  switch (kind) {
    case PotentialKind::fast_coulomb: return "fast_coulomb";
    case PotentialKind::averaged_coulomb: return "averaged_coulomb";
    case PotentialKind::trap: return "trap";
    case PotentialKind::averaged_trap: return "averaged_trap";
    case PotentialKind::lattice: return "lattice";
    case PotentialKind::averaged_lattice: return "averaged_lattice";
    case PotentialKind::composite: return "composite";
  }
  return "composite";
}

PotentialKind parse_potential_kind(const std::string& name) {
  for (auto k : {PotentialKind::fast_coulomb, PotentialKind::averaged_coulomb, PotentialKind::trap,
                 PotentialKind::averaged_trap, PotentialKind::lattice,
                 PotentialKind::averaged_lattice, PotentialKind::composite})
    if (name == to_string(k)) return k;
  fail(ErrorKind::config, "unknown potential kind '" + name + "'");
}

bool is_averaged(PotentialKind kind) noexcept {
  return kind == PotentialKind::averaged_coulomb || kind == PotentialKind::averaged_trap ||
         kind == PotentialKind::averaged_lattice;
}

bool is_lattice(PotentialKind kind) noexcept {
  return kind == PotentialKind::lattice || kind == PotentialKind::averaged_lattice;
}

void validate(const PotentialSpec& spec) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(spec.c) || !finite(spec.trap_strength) || !finite(spec.shift.omega) ||
      !finite(spec.lattice_depth))
    fail(ErrorKind::config, "potential strengths must be finite");
  for (double v : spec.shift.e0)
    if (!finite(v)) fail(ErrorKind::config, "shift vector must be finite");
  if (spec.eta && !(*spec.eta > 0.0)) fail(ErrorKind::config, "mollification eta must be positive");
  if (spec.n_quad < 16) fail(ErrorKind::config, "n_quad must be at least 16");
  if (spec.kind == PotentialKind::composite) {
    for (const auto& child : spec.children) {
      if (child.kind == PotentialKind::composite)
        fail(ErrorKind::config, "composite potentials cannot nest composites");
      validate(child);
    }
  } else if (!spec.children.empty()) {
    fail(ErrorKind::config, "only composite potentials have children");
  }
  if ((spec.kind == PotentialKind::trap || spec.kind == PotentialKind::averaged_trap) &&
      spec.trap_strength < 0.0)
    fail(ErrorKind::config, "trap strength must be nonnegative");
}

void check_commensurate(const Grid& grid, const Vec3& freqs) {
  for (int a = 0; a < grid.dim(); ++a) {
    const double cycles = freqs[a] * grid.length(a) / (2.0 * kPi);
    if (freqs[a] <= 0.0 || std::abs(cycles - std::round(cycles)) > 1e-9)
      fail(ErrorKind::config, "lattice is incommensurate with the box on axis " + std::to_string(a));
  }
}

PotentialSpec averaged_counterpart(const PotentialSpec& spec) {
  PotentialSpec out = spec;
  switch (spec.kind) {
    case PotentialKind::fast_coulomb: out.kind = PotentialKind::averaged_coulomb; break;
    case PotentialKind::trap: out.kind = PotentialKind::averaged_trap; break;
    case PotentialKind::lattice: out.kind = PotentialKind::averaged_lattice; break;
    case PotentialKind::composite:
      for (auto& child : out.children) child = averaged_counterpart(child);
      break;
    default: break;
  }
  return out;
}

std::vector<PotentialSpec> leaves(const PotentialSpec& spec) {
  if (spec.kind != PotentialKind::composite) return {spec};
  return spec.children;
}

bool is_zero_potential(const PotentialSpec& spec) {
  for (const auto& leaf : leaves(spec)) {
    switch (leaf.kind) {
      case PotentialKind::fast_coulomb:
      case PotentialKind::averaged_coulomb:
        if (leaf.c != 0.0) return false;
        break;
      case PotentialKind::trap:
      case PotentialKind::averaged_trap:
        if (leaf.trap_strength != 0.0) return false;
        break;
      case PotentialKind::lattice:
      case PotentialKind::averaged_lattice:
        if (leaf.lattice_depth != 0.0) return false;
        break;
      case PotentialKind::composite: break;
    }
  }
  return true;
}

double default_eta(const Grid& grid) {
  const double h = grid.max_spacing();
  return h * h;
}

double resolved_eta(const PotentialSpec& spec, const Grid& grid) {
  return spec.eta.value_or(default_eta(grid));
}

double mollified_coulomb_at(const Vec3& x, const Vec3& center, double c, double eta) {
  if (!(eta > 0.0)) fail(ErrorKind::domain, "mollification width eta must be positive");
  if (c == 0.0) return 0.0;
  const Vec3 d{x[0] - center[0], x[1] - center[1], x[2] - center[2]};
  return c * mollified_inverse_distance(std::sqrt(squared_norm(d)), std::sqrt(2.0 * kPi / eta));
}

RealField mollified_coulomb_field(const Grid& grid, const Vec3& center, double c, double eta) {
  if (!(eta > 0.0)) fail(ErrorKind::domain, "mollification width eta must be positive");
  RealField f(grid);
  add_coulomb(grid, center, c, eta, f.values());
  return f;
}

RealField averaged_coulomb_field(const Grid& grid, const Vec3& e, double c, double eta,
                                 int n_quad) {
  if (n_quad < 16) fail(ErrorKind::config, "n_quad must be at least 16");
  if (!(eta > 0.0)) fail(ErrorKind::domain, "mollification width eta must be positive");
  RealField f(grid);
  if (!nonzero(e)) {
    add_coulomb(grid, e, c, eta, f.values());
    return f;
  }
  for (int q = 0; q < n_quad; ++q) {
    const double s = std::sin(2.0 * kPi * q / n_quad);
    add_coulomb(grid, {e[0] * s, e[1] * s, e[2] * s}, c / n_quad, eta, f.values());
  }
  return f;
}

RealField trap_field(const Grid& grid, double strength, const Vec3& center) {
  if (strength < 0.0) fail(ErrorKind::config, "trap strength must be nonnegative");
  RealField f(grid);
  add_trap(grid, center, strength, f.values());
  return f;
}

RealField averaged_trap_field(const Grid& grid, double strength, const Vec3& e) {
  RealField f = trap_field(grid, strength);
  const double shift = 0.5 * strength * squared_norm(e);
  for (auto& v : f.values()) v += shift;
  return f;
}

RealField lattice_field(const Grid& grid, const Vec3& freqs, const Vec3& shift, double depth) {
  check_commensurate(grid, freqs);
  RealField f(grid);
  add_separable(grid, lattice_profiles(grid, freqs, shift), depth, f.values());
  return f;
}

double averaged_lattice_contrast(double omega, double e) {
  return std::cyl_bessel_j(0.0, 2.0 * omega * std::abs(e));
}

std::array<std::vector<double>, 3> averaged_lattice_profiles(const Grid& grid, const Vec3& freqs,
                                                             const Vec3& e, int n_quad) {
  check_commensurate(grid, freqs);
  if (n_quad < 16) fail(ErrorKind::config, "n_quad must be at least 16");
  std::array<std::vector<double>, 3> profile;
  for (int a = 0; a < grid.dim(); ++a) {
    const int n = grid.count(a);
    profile[a].resize(n);
    const double j0 = averaged_lattice_contrast(freqs[a], e[a]);
    std::vector<double> quad(n, 0.0);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      const double y = grid.coordinate(a, i);
      profile[a][i] = 0.5 - 0.5 * j0 * std::cos(2.0 * freqs[a] * y);
      for (int q = 0; q < n_quad; ++q) {
        const double s = std::sin(freqs[a] * (y - e[a] * std::sin(2.0 * kPi * q / n_quad)));
        quad[i] += s * s / n_quad;
      }
      worst = std::max(worst, std::abs(quad[i] - profile[a][i]));
    }
    if (worst > 1e-10) {
      log::debug("averaged lattice: Bessel form off by ", worst, " on axis ", a,
                 "; using quadrature");
      profile[a] = std::move(quad);
    }
  }
  return profile;
}

RealField averaged_lattice_field(const Grid& grid, const Vec3& freqs, const Vec3& e, int n_quad,
                                 double depth) {
  RealField f(grid);
  add_separable(grid, averaged_lattice_profiles(grid, freqs, e, n_quad), depth, f.values());
  return f;
}

int fast_quadrature_nodes(double omega, double dt, int n_sub) {
  const int refined = static_cast<int>(std::ceil(4.0 * std::abs(omega) * dt)) * 4;
  return std::max({n_sub, refined, 1});
}

// ---------------------------------------------------------------------------

PotentialEvaluator::PotentialEvaluator(const Grid& grid, PotentialSpec spec)
    : grid_(grid), spec_(std::move(spec)) {
  validate(spec_);
  for (auto& leaf : leaves(spec_)) {
    if (is_lattice(leaf.kind)) check_commensurate(grid_, leaf.lattice_freqs);
    Leaf l;
    l.eta = resolved_eta(leaf, grid_);
    l.spec = std::move(leaf);
    leaves_.push_back(std::move(l));
  }
}

bool PotentialEvaluator::leaf_time_dependent(const Leaf& leaf) const noexcept {
  const auto& s = leaf.spec.shift;
  if (is_averaged(leaf.spec.kind)) return s.time_dependent_e() && nonzero(s.e0);
  return nonzero(s.e0) && s.omega != 0.0;
}

bool PotentialEvaluator::time_dependent() const noexcept {
  return std::any_of(leaves_.begin(), leaves_.end(),
                     [this](const Leaf& l) { return leaf_time_dependent(l); });
}

const RealField& PotentialEvaluator::averaged_leaf_field(Leaf& leaf, double t) {
  const auto& s = leaf.spec;
  const Vec3 e = is_averaged(s.kind) ? s.shift.e_at(t) : Vec3{0.0, 0.0, 0.0};
  if (leaf.cached) {
    const Vec3 d{e[0] - leaf.cached_e[0], e[1] - leaf.cached_e[1], e[2] - leaf.cached_e[2]};
    const double tol = 1e-3 * s.shift.max_amplitude();
    if (!leaf_time_dependent(leaf) || std::sqrt(squared_norm(d)) <= tol) return *leaf.cached;
  }
  ++rebuilds_;
  switch (s.kind) {
    case PotentialKind::averaged_coulomb:
      leaf.cached = averaged_coulomb_field(grid_, e, s.c, leaf.eta, s.n_quad);
      break;
    case PotentialKind::averaged_trap:
      leaf.cached = averaged_trap_field(grid_, s.trap_strength, e);
      break;
    case PotentialKind::averaged_lattice:
      leaf.cached = averaged_lattice_field(grid_, s.lattice_freqs, e, s.n_quad, s.lattice_depth);
      break;
    case PotentialKind::fast_coulomb:
      leaf.cached = mollified_coulomb_field(grid_, {0.0, 0.0, 0.0}, s.c, leaf.eta);
      break;
    case PotentialKind::trap: leaf.cached = trap_field(grid_, s.trap_strength); break;
    case PotentialKind::lattice:
      leaf.cached = lattice_field(grid_, s.lattice_freqs, {0.0, 0.0, 0.0}, s.lattice_depth);
      break;
    case PotentialKind::composite: fail(ErrorKind::config, "nested composite potential");
  }
  leaf.cached_e = e;
  return *leaf.cached;
}

void PotentialEvaluator::add_leaf_at(Leaf& leaf, double t, RealField& acc, double weight) {
  const auto& s = leaf.spec;
  if (is_averaged(s.kind) || !leaf_time_dependent(leaf)) {
    const RealField& f = averaged_leaf_field(leaf, t);
    auto out = acc.values();
    const auto in = f.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += weight * in[i];
    return;
  }
  const Vec3 b = b_of_t(s.shift, t);
  switch (s.kind) {
    case PotentialKind::fast_coulomb:
      add_coulomb(grid_, b, weight * s.c, leaf.eta, acc.values());
      break;
    case PotentialKind::trap: add_trap(grid_, b, weight * s.trap_strength, acc.values()); break;
    case PotentialKind::lattice:
      add_separable(grid_, lattice_profiles(grid_, s.lattice_freqs, b), weight * s.lattice_depth,
                    acc.values());
      break;
    default: fail(ErrorKind::config, "unexpected potential kind");
  }
}

RealField PotentialEvaluator::sample(double t) {
  RealField acc(grid_);
  for (auto& leaf : leaves_) add_leaf_at(leaf, t, acc, 1.0);
  return acc;
}

void PotentialEvaluator::accumulate_step_integral(RealField& acc, double t, double dt, int n_sub) {
  if (!(dt > 0.0)) fail(ErrorKind::domain, "step integral needs dt > 0");
  for (auto& leaf : leaves_) {
    if (!leaf_time_dependent(leaf)) {
      add_leaf_at(leaf, t, acc, dt);
      continue;
    }
    const int nodes = is_averaged(leaf.spec.kind)
                          ? std::max(n_sub, 1)
                          : fast_quadrature_nodes(leaf.spec.shift.omega, dt, n_sub);
    const int panels = (nodes + 3) / 4;
    const double width = dt / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = t + (p + 0.5) * width;
      for (int q = 0; q < 4; ++q)
        add_leaf_at(leaf, mid + 0.5 * width * kGaussNodes[q], acc, 0.5 * width * kGaussWeights[q]);
    }
  }
}

RealField PotentialEvaluator::step_integral(double t, double dt, int n_sub) {
  RealField acc(grid_);
  accumulate_step_integral(acc, t, dt, n_sub);
  return acc;
}

RealField step_time_integral(const Grid& grid, const PotentialSpec& spec, double t, double dt,
                             int n_sub) {
  PotentialEvaluator ev(grid, spec);
  return ev.step_integral(t, dt, n_sub);
}

}  // namespace xfel
