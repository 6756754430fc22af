#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xfel/grid.hpp"

namespace xfel {

enum class ShiftLaw {
  constant,    ///< e(t) = e0
  sinusoidal,  ///< e(t) = e0 sin(2 pi t)
};

/// Oscillating displacement b(t) = e(t) sin(2 pi omega t).
struct ShiftSpec {
  ShiftLaw law = ShiftLaw::constant;
  Vec3 e0{0.0, 0.0, 0.0};
  double omega = 0.0;

  Vec3 e_at(double t) const noexcept;
  double max_amplitude() const noexcept;
  bool time_dependent_e() const noexcept { return law != ShiftLaw::constant; }
  bool operator==(const ShiftSpec&) const = default;
};

Vec3 b_of_t(const ShiftSpec& shift, double t);

enum class PotentialKind {
  fast_coulomb,
  averaged_coulomb,
  trap,
  averaged_trap,
  lattice,
  averaged_lattice,
  composite,
};

const char* to_string(PotentialKind kind) noexcept;
PotentialKind parse_potential_kind(const std::string& name);
bool is_averaged(PotentialKind kind) noexcept;
bool is_lattice(PotentialKind kind) noexcept;

/// Declarative external potential. Fast kinds follow the displaced source
/// x - b(t); averaged kinds use the mean over one oscillation period with
/// e taken at the outer time.
struct PotentialSpec {
  PotentialKind kind = PotentialKind::composite;
  double c = 0.0;
  ShiftSpec shift;
  std::optional<double> eta;  ///< mollification; defaults to (max grid spacing)^2
  double trap_strength = 0.0;
  Vec3 lattice_freqs{0.0, 0.0, 0.0};
  double lattice_depth = 1.0;  ///< V_Gamma = depth * sum_l sin^2(omega_l y_l)
  int n_quad = 64;  ///< s-quadrature nodes for averaged kinds
  std::vector<PotentialSpec> children;

  bool operator==(const PotentialSpec&) const = default;
};

/// Checks field invariants; throws a config error.
void validate(const PotentialSpec& spec);
/// Lattice periods must tile the box: omega_l L_l / (2 pi) integral.
void check_commensurate(const Grid& grid, const Vec3& lattice_freqs);

/// Averaged counterpart of a fast potential (composites map child-wise).
PotentialSpec averaged_counterpart(const PotentialSpec& spec);
/// Leaves of a composite, or the spec itself.
std::vector<PotentialSpec> leaves(const PotentialSpec& spec);
bool is_zero_potential(const PotentialSpec& spec);

double default_eta(const Grid& grid);
double resolved_eta(const PotentialSpec& spec, const Grid& grid);

/// c erf(sqrt(2 pi / eta) r) / r, the Gaussian-mollified point charge; equals
/// 2 c sqrt(2/eta) at r = 0.
double mollified_coulomb_at(const Vec3& x, const Vec3& center, double c, double eta);

/// Period average of the mollified Coulomb source oscillating along e, by the
/// periodic trapezoid rule with n_quad nodes. Values on the segment {tau e}
/// depend on eta.
RealField averaged_coulomb_field(const Grid& grid, const Vec3& e, double c, double eta, int n_quad);
RealField mollified_coulomb_field(const Grid& grid, const Vec3& center, double c, double eta);

RealField trap_field(const Grid& grid, double strength, const Vec3& center = {0.0, 0.0, 0.0});
/// strength (|x|^2 + |e|^2 / 2).
RealField averaged_trap_field(const Grid& grid, double strength, const Vec3& e);

/// sum_l sin^2(omega_l (x_l - shift_l)) over the active axes.
RealField lattice_field(const Grid& grid, const Vec3& lattice_freqs,
                        const Vec3& shift = {0.0, 0.0, 0.0}, double depth = 1.0);
/// Per-axis 1/2 - J0(2 omega_l e_l) cos(2 omega_l x_l) / 2, verified against
/// an s-quadrature with n_quad nodes and replaced by it when they disagree.
RealField averaged_lattice_field(const Grid& grid, const Vec3& lattice_freqs, const Vec3& e,
                                 int n_quad, double depth = 1.0);
/// Per-axis 1D profiles of the averaged lattice (without the depth factor).
std::array<std::vector<double>, 3> averaged_lattice_profiles(const Grid& grid,
                                                             const Vec3& lattice_freqs,
                                                             const Vec3& e, int n_quad);
/// Per-axis 1D profiles sin^2(omega_l (y - shift_l)).
std::array<std::vector<double>, 3> lattice_profiles(const Grid& grid, const Vec3& lattice_freqs,
                                                    const Vec3& shift = {0.0, 0.0, 0.0});
/// One-dimensional averaged lattice profile factor J0(2 omega e).
double averaged_lattice_contrast(double omega, double e);

/// Node count used for fast kinds: max(n_sub, ceil(4 omega dt) * 4).
int fast_quadrature_nodes(double omega, double dt, int n_sub);

/// Evaluates a potential spec on a grid with caching of the averaged fields.
/// Not thread safe; each propagator owns one.
class PotentialEvaluator {
 public:
  PotentialEvaluator(const Grid& grid, PotentialSpec spec);

  const PotentialSpec& spec() const noexcept { return spec_; }
  const Grid& grid() const noexcept { return grid_; }
  bool empty() const noexcept { return leaves_.empty(); }
  /// True when the field changes with t.
  bool time_dependent() const noexcept;

  /// V(t, x).
  RealField sample(double t);
  /// x -> int_t^{t+dt} V(s, x) ds.
  RealField step_integral(double t, double dt, int n_sub);
  /// Adds the step integral into `acc` (same semantics, no allocation of a result).
  void accumulate_step_integral(RealField& acc, double t, double dt, int n_sub);

  /// Number of averaged-field rebuilds (cache misses) so far.
  int rebuilds() const noexcept { return rebuilds_; }

 private:
  struct Leaf {
    PotentialSpec spec;
    double eta = 0.0;
    std::optional<RealField> cached;  // averaged or static field
    Vec3 cached_e{0.0, 0.0, 0.0};
  };

  bool leaf_time_dependent(const Leaf& leaf) const noexcept;
  void add_leaf_at(Leaf& leaf, double t, RealField& acc, double weight);
  const RealField& averaged_leaf_field(Leaf& leaf, double t);

  Grid grid_;
  PotentialSpec spec_;
  std::vector<Leaf> leaves_;
  int rebuilds_ = 0;
};

/// Free-function form of the per-step time integral.
RealField step_time_integral(const Grid& grid, const PotentialSpec& spec, double t, double dt,
                             int n_sub);

}  // namespace xfel
