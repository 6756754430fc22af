#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "support.hpp"
#include "xfel/propagator.hpp"
#include "xfel/spectral.hpp"

using namespace xfel;
using test::max_abs_diff;
using test::random_field;
constexpr double kPi = std::numbers::pi;

namespace {

PotentialSpec coulomb(PotentialKind kind, double c, Vec3 e, double omega, double eta = 0.5) {
  PotentialSpec p;
  p.kind = kind;
  p.c = c;
  p.shift.e0 = e;
  p.shift.omega = omega;
  p.eta = eta;
  return p;
}

ComplexField gaussian(const Grid& g, double alpha = 1.0, Vec3 k = {0, 0, 0}) {
  return sample_complex(g, [&](const Vec3& x) {
    return std::exp(cplx(-alpha * squared_norm(x), k[0] * x[0] + k[1] * x[1] + k[2] * x[2]));
  });
}

ComplexField run(ComplexField u, const EvolutionConfig& c) {
  Propagator p(u.grid(), c);
  EvolutionState s(std::move(u));
  const long n = std::lround(c.t_end / c.dt);
  for (long i = 0; i < n; ++i) p.step(s, c.dt);
  return s.u;
}

EvolutionConfig nonlinear_config() {
  EvolutionConfig c;
  c.a = 10.0;
  c.C1 = 5.0;
  c.sigma = 2.0 / 3.0;
  c.potential = coulomb(PotentialKind::averaged_coulomb, 1.0, {0, 0, 1}, 10.0);
  return c;
}

}  // namespace

TEST_CASE("phase step") {
  const Grid g = Grid::cube(3, 8.0, 16, 0.5);
  SUBCASE("identity without potential or nonlinearity") {
    EvolutionConfig c;
    Propagator p(g, c);
    EvolutionState s(random_field(g, 1));
    const ComplexField before = s.u;
    p.potential_phase_step(s, 0.1);
    CHECK(max_abs_diff(s.u, before) == 0.0);
  }
  SUBCASE("modulus is unchanged pointwise") {
    EvolutionConfig c = nonlinear_config();
    c.a = 50.0;
    c.C1 = 20.0;
    c.potential = coulomb(PotentialKind::fast_coulomb, 1.0, {0, 0, 1}, 40.0);
    Propagator p(g, c);
    EvolutionState s(random_field(g, 2));
    const ComplexField before = s.u;
    p.potential_phase_step(s, 0.05);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      worst = std::max(worst, std::abs(std::abs(s.u[i]) - std::abs(before[i])) / std::abs(before[i]));
    CHECK(worst <= 1e-14);
  }
  SUBCASE("constant field rotates by the local nonlinearity") {
    EvolutionConfig c;
    c.a = 2.0;
    c.sigma = 0.8;
    Propagator p(g, c);
    const cplx u0(0.6, -0.3);
    EvolutionState s(sample_complex(g, [&](const Vec3&) { return u0; }));
    const double dt = 0.07;
    p.potential_phase_step(s, dt);
    const cplx expected = u0 * std::polar(1.0, c.a * std::pow(std::abs(u0), c.sigma) * dt / g.epsilon());
    for (const auto& v : s.u.values()) CHECK(std::abs(v - expected) <= 1e-14);
  }
  SUBCASE("zero density points") {
    EvolutionConfig c;
    c.a = 1.0;
    c.sigma = 0.5;
    Propagator p(g, c);
    EvolutionState s{ComplexField(g)};
    p.potential_phase_step(s, 0.1);
    for (const auto& v : s.u.values()) CHECK(v == cplx{});
  }
}

TEST_CASE("linear free problem reduces to the kinetic flow") {
  const Grid g = Grid::cube(2, 6.0, 32, 0.7);
  const ComplexField u = random_field(g, 3);
  for (Splitting sp : {Splitting::lie, Splitting::strang}) {
    EvolutionConfig c;
    c.splitting = sp;
    Propagator p(g, c);
    EvolutionState s(u);
    p.step(s, 0.13);
    CHECK(max_abs_diff(s.u, kinetic_propagate(u, 0.13)) <= 1e-12);
    CHECK(s.step_index == 1);
    CHECK(s.t == doctest::Approx(0.13));
  }
}

TEST_CASE("mass is conserved per step") {
  const Grid g = Grid::cube(3, 8.0, 16);
  EvolutionConfig c = nonlinear_config();
  c.potential = coulomb(PotentialKind::fast_coulomb, 1.0, {0, 0, 1}, 20.0);
  for (Splitting sp : {Splitting::lie, Splitting::strang}) {
    c.splitting = sp;
    Propagator p(g, c);
    EvolutionState s(gaussian(g));
    const double m0 = std::pow(l2_norm(s.u), 2);
    for (int i = 0; i < 20; ++i) {
      const double before = std::pow(l2_norm(s.u), 2);
      p.step(s, 1e-2);
      CHECK(std::abs(std::pow(l2_norm(s.u), 2) - before) <= 1e-10 * m0);
    }
  }
}

TEST_CASE("self-convergence orders") {
  const Grid g = Grid::cube(3, 8.0, 16);
  const ComplexField u0 = gaussian(g, 1.0, {1.0, 0.0, 0.5});
  EvolutionConfig c = nonlinear_config();
  c.t_end = 0.1;
  for (auto [sp, lo, hi] : {std::tuple{Splitting::strang, 3.5, 4.5}, std::tuple{Splitting::lie, 1.7, 2.3}}) {
    c.splitting = sp;
    c.dt = 1.25e-4;
    const ComplexField ref = run(u0, c);
    std::vector<double> err;
    for (double dt : {4e-3, 2e-3, 1e-3}) {
      c.dt = dt;
      err.push_back(l2_distance(run(u0, c), ref));
    }
    for (int i = 0; i < 2; ++i) {
      INFO(to_string(sp), " errors ", err[i], " ", err[i + 1]);
      CHECK(err[i] / err[i + 1] >= lo);
      CHECK(err[i] / err[i + 1] <= hi);
    }
  }
}

TEST_CASE("strang steps are reversible") {
  const Grid g = Grid::cube(3, 8.0, 16);
  const ComplexField u0 = gaussian(g, 1.0, {0.5, 0.0, 0.0});
  EvolutionConfig c;
  c.C1 = 5.0;
  c.potential = coulomb(PotentialKind::fast_coulomb, 1.0, {0, 0.5, 1}, 7.0);
  Propagator p(g, c);
  EvolutionState s(u0);
  for (int i = 0; i < 25; ++i) p.step(s, 4e-3);
  CHECK(l2_distance(s.u, u0) > 1e-2);
  for (int i = 0; i < 25; ++i) p.step(s, -4e-3);
  CHECK(std::abs(s.t) < 1e-14);
  CHECK(l2_distance(s.u, u0) <= 1e-10);
}

TEST_CASE("zero initial field stays zero") {
  const Grid g = Grid::cube(3, 8.0, 16);
  EvolutionConfig c = nonlinear_config();
  c.t_end = 0.05;
  c.dt = 1e-2;
  c.potential = {};
  const RunRecord r = evolve(ComplexField(g), c);
  CHECK(r.samples.size() == 6);
  for (const auto& d : r.samples) {
    CHECK(d.mass == 0.0);
    CHECK(d.total == 0.0);
    CHECK(d.h1 == 0.0);
    CHECK(d.max_density == 0.0);
  }
}

TEST_CASE("evolution bookkeeping") {
  const Grid g = Grid::cube(2, 6.0, 16);
  EvolutionConfig c;
  c.dt = 0.03;
  c.t_end = 0.1;
  c.snapshot_stride = 2;
  c.keep_fields = true;
  Evolution e(gaussian(g), c);
  CHECK(e.total_steps() == 4);
  int observed = 0;
  e.add_observer([&](const EvolutionState&, const DiagnosticsRecord&) { ++observed; });
  while (!e.done()) e.advance();
  CHECK(observed == 5);
  CHECK(e.state().t == 0.1);
  const RunRecord& r = e.record();
  REQUIRE(r.samples.size() == 3);  // steps 0, 2 and the final one
  CHECK(r.samples.back().t == 0.1);
  CHECK(r.snapshots.size() == 3);
  CHECK(max_abs_diff(r.snapshots.back().u, kinetic_propagate(gaussian(g), 0.1)) <= 1e-12);
}

TEST_CASE("invalid configurations") {
  const Grid g = Grid::cube(3, 8.0, 8);
  auto kind_of = [&](EvolutionConfig c, const Grid& grid) {
    try {
      Propagator p(grid, c);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::io;  // sentinel: no error raised
  };
  EvolutionConfig c;
  c.sigma = -1.0;
  CHECK(kind_of(c, g) == ErrorKind::config);
  c = {};
  c.dt = 0.0;
  CHECK(kind_of(c, g) == ErrorKind::config);
  c = {};
  c.snapshot_stride = 0;
  CHECK(kind_of(c, g) == ErrorKind::config);
  c = {};
  c.step_mode = StepMode::bloch;
  CHECK(kind_of(c, g) == ErrorKind::config);
  c = {};
  c.C1 = 1.0;
  CHECK(kind_of(c, Grid::cube(2, 8.0, 8)) == ErrorKind::unsupported);
  CHECK(parse_splitting("lie") == Splitting::lie);
  CHECK(parse_step_mode("plain") == StepMode::plain_spectral);
  CHECK_THROWS_AS(parse_step_mode("fast"), Error);
}

TEST_CASE("non-finite field raises a breakdown error") {
  const Grid g = Grid::cube(2, 6.0, 8);
  ComplexField u = gaussian(g);
  u[3] = std::numeric_limits<double>::quiet_NaN();
  EvolutionConfig c;
  c.a = 1.0;
  c.dt = 0.01;
  c.t_end = 0.05;
  try {
    evolve(u, c);
    FAIL("expected a breakdown");
  } catch (const BreakdownError& e) {
    CHECK(e.kind() == ErrorKind::numerical_breakdown);
    CHECK(e.last_good_time() == 0.0);
  }
  c.blowup.enabled = true;
  const RunRecord r = evolve(u, c);
  CHECK(r.blew_up());
}

TEST_CASE("blow-up detector stays quiet on a linear run") {
  const Grid g = Grid::cube(3, 8.0, 16);
  EvolutionConfig c;
  c.dt = 1e-2;
  c.t_end = 0.5;
  c.potential = coulomb(PotentialKind::fast_coulomb, 1.0, {0, 0, 1}, 10.0);
  c.blowup.enabled = true;
  const RunRecord r = evolve(gaussian(g), c);
  CHECK_FALSE(r.blew_up());
  CHECK(r.t_final == doctest::Approx(0.5));
}

TEST_CASE("bloch and plain modes coincide without a lattice") {
  const Grid g = Grid::cube(3, 8.0, 16);
  EvolutionConfig c = nonlinear_config();
  PotentialSpec lattice;
  lattice.kind = PotentialKind::lattice;
  lattice.lattice_freqs = {kPi / 2, kPi / 2, kPi / 2};
  lattice.lattice_depth = 0.0;
  lattice.shift = {ShiftLaw::constant, {0, 0, 1}, 10.0};
  PotentialSpec composite;
  composite.children = {coulomb(PotentialKind::fast_coulomb, 1.0, {0, 0, 1}, 10.0), lattice};
  c.potential = composite;
  c.dt = 1e-2;
  c.t_end = 0.2;
  const ComplexField u0 = gaussian(g, 1.0, {1, 0, 0});
  const RunRecord plain = [&] {
    EvolutionConfig p = c;
    p.keep_fields = true;
    return evolve(u0, p);
  }();
  c.step_mode = StepMode::bloch;
  c.keep_fields = true;
  const RunRecord bloch = evolve(u0, c);
  CHECK(l2_distance(plain.snapshots.back().u, bloch.snapshots.back().u) <= 1e-10);
}

TEST_CASE("bloch mode matches a fine plain run with a real lattice") {
  const Grid g(1, {4.0, 1, 1}, {64, 1, 1}, 0.25);
  EvolutionConfig c;
  c.a = 1.0;
  PotentialSpec lattice;
  lattice.kind = PotentialKind::lattice;
  lattice.lattice_freqs = {kPi, 0, 0};
  lattice.lattice_depth = 20.0;
  c.potential = lattice;
  c.t_end = 0.2;
  const ComplexField u0 = gaussian(g, 4.0, {8.0, 0, 0});
  c.dt = 1e-5;
  const ComplexField ref = run(u0, c);
  c.dt = 1e-2;
  const ComplexField plain = run(u0, c);
  c.step_mode = StepMode::bloch;
  const ComplexField bloch = run(u0, c);
  INFO("plain ", l2_distance(plain, ref), " bloch ", l2_distance(bloch, ref));
  CHECK(l2_distance(bloch, ref) < l2_distance(plain, ref));
}

TEST_CASE("bloch substeps") {
  const Grid g(1, {4.0, 1, 1}, {64, 1, 1}, 0.25);
  EvolutionConfig c;
  PotentialSpec lattice;
  lattice.kind = PotentialKind::lattice;
  lattice.lattice_freqs = {kPi, 0, 0};
  lattice.lattice_depth = 5.0;
  c.potential = lattice;
  c.step_mode = StepMode::bloch;
  c.dt = 1e-2;
  c.t_end = 0.1;
  const ComplexField u0 = gaussian(g, 4.0, {8.0, 0, 0});

  SUBCASE("a static lattice composes exactly") {
    const ComplexField one = run(u0, c);
    c.bloch_substeps = 5;
    CHECK(l2_distance(run(u0, c), one) <= 1e-11);
  }
  SUBCASE("a moving lattice converges as pieces are added") {
    c.potential.shift = {ShiftLaw::constant, {0.3, 0, 0}, 8.0};
    c.bloch_substeps = 64;
    const ComplexField ref = run(u0, c);
    double prev = 0.0;
    for (int k : {1, 2, 4, 8}) {
      c.bloch_substeps = k;
      const double err = l2_distance(run(u0, c), ref);
      CAPTURE(k);
      CHECK(err > 0.0);
      if (prev > 0.0) CHECK(err < 0.5 * prev);
      prev = err;
    }
  }
}

TEST_CASE("gauge equivalence on a linear problem") {
  // A(t) chosen so that 2 int_0^t A = -e sin(2 pi omega t), which makes the
  // gauge-transformed frame see the lattice displaced by +b(t).
  const Grid g = Grid::cube(3, 8.0, 32, 0.8);
  const Vec3 e{0.3, 0.0, 0.6};
  const double omega = 3.0, t_end = 0.25;
  auto a_field = [&](double t) {
    const double s = -kPi * omega * std::cos(2 * kPi * omega * t);
    return Vec3{s * e[0], s * e[1], s * e[2]};
  };
  auto history = [&](double t) {
    GaugeHistory h;
    const double s = -std::sin(2 * kPi * omega * t);
    h.shift = {s * e[0], s * e[1], s * e[2]};
    // int_0^t |A|^2 = |e|^2 (pi omega)^2 (t/2 + sin(4 pi omega t) / (8 pi omega))
    h.phase_integral = squared_norm(e) * std::pow(kPi * omega, 2) *
                       (t / 2 + std::sin(4 * kPi * omega * t) / (8 * kPi * omega));
    return h;
  };
  const ComplexField psi0 = gaussian(g, 1.0, {0.5, 0, 0});
  const double eps = g.epsilon();

  // Exact psi-frame flow for V = 0: mode k gets exp(-(i/eps) int |eps k + A|^2).
  auto psi_free = [&](double t) {
    Spectrum s = fft_forward(psi0);
    const GaugeHistory h = history(t);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto idx = g.unflatten(i);
      const Vec3 k{g.wavenumber(0, idx[0]), g.wavenumber(1, idx[1]), g.wavenumber(2, idx[2])};
      // 2 int A = -b, so the cross term is -eps k.b.
      const double kb = k[0] * h.shift[0] + k[1] * h.shift[1] + k[2] * h.shift[2];
      const double phase = eps * eps * squared_norm(k) * t + eps * kb + h.phase_integral;
      s[i] *= std::polar(1.0, -phase / eps);
    }
    return fft_inverse(s);
  };
  (void)a_field;

  SUBCASE("free problem, exact") {
    EvolutionConfig c;
    c.dt = 1e-2;
    c.t_end = t_end;
    const ComplexField u = run(psi0, c);
    const ComplexField mapped = gauge_transform(psi_free(t_end), history(t_end));
    CHECK(l2_distance(u, mapped) <= 1e-8);
  }

  SUBCASE("static Coulomb in the psi frame against the fast model") {
    const PotentialSpec still = coulomb(PotentialKind::fast_coulomb, 1.0, {0, 0, 0}, 0.0, 4.0);
    const RealField v = PotentialEvaluator(g, still).sample(0.0);
    auto psi_split = [&](double dt) {
      ComplexField psi = psi0;
      const long n = std::lround(t_end / dt);
      auto kinetic = [&](double t0, double t1) {
        // exact psi-frame kinetic flow from t0 to t1
        Spectrum s = fft_forward(psi);
        const GaugeHistory h0 = history(t0), h1 = history(t1);
        for (std::size_t i = 0; i < s.size(); ++i) {
          const auto idx = g.unflatten(i);
          const Vec3 k{g.wavenumber(0, idx[0]), g.wavenumber(1, idx[1]), g.wavenumber(2, idx[2])};
          double kb = 0.0;
          for (int a = 0; a < 3; ++a) kb += k[a] * (h1.shift[a] - h0.shift[a]);
          const double phase = eps * eps * squared_norm(k) * (t1 - t0) + eps * kb + h1.phase_integral - h0.phase_integral;
          s[i] *= std::polar(1.0, -phase / eps);
        }
        psi = fft_inverse(s);
      };
      for (long i = 0; i < n; ++i) {
        const double t = i * dt;
        kinetic(t, t + dt / 2);
        for (std::size_t j = 0; j < g.size(); ++j) psi[j] *= std::polar(1.0, -v[j] * dt / eps);
        kinetic(t + dt / 2, t + dt);
      }
      return psi;
    };
    std::vector<double> diff;
    for (double dt : {1e-2, 5e-3, 2.5e-3}) {
      EvolutionConfig c;
      c.dt = dt;
      c.t_end = t_end;
      c.n_sub = 16;
      c.potential = coulomb(PotentialKind::fast_coulomb, 1.0, e, omega, 4.0);
      const ComplexField u = run(psi0, c);
      diff.push_back(l2_distance(u, gauge_transform(psi_split(dt), history(t_end))));
    }
    INFO("differences ", diff[0], " ", diff[1], " ", diff[2]);
    CHECK(diff[2] < 1e-4);
    CHECK(diff[0] / diff[1] > 3.0);
    CHECK(diff[1] / diff[2] > 3.0);
  }
}
