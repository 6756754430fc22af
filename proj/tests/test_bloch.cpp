#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <numbers>
#include <sstream>

#include "support.hpp"
#include "xfel/bloch.hpp"
#include "xfel/error.hpp"
#include "xfel/spectral.hpp"

using namespace xfel;
using test::band_limited_field;
using test::max_abs_diff;
using test::random_field;
constexpr double kPi = std::numbers::pi;

namespace {

// Dense DFT matrix F with (F u)_n = sum_i u_i e^{-i k_n x_i'} over corner offsets.
Eigen::MatrixXcd dft_matrix(int n) {
  Eigen::MatrixXcd f(n, n);
  for (int q = 0; q < n; ++q)
    for (int i = 0; i < n; ++i) f(q, i) = std::polar(1.0, -2.0 * kPi * q * i / n);
  return f;
}

// Dense 1D Hamiltonian eps^2 (-d^2/dx^2 spectral) + diag(v) on the grid.
Eigen::MatrixXcd dense_hamiltonian(const Grid& g, const std::vector<double>& v) {
  const int n = g.count(0);
  const Eigen::MatrixXcd f = dft_matrix(n);
  Eigen::VectorXd k2(n);
  for (int q = 0; q < n; ++q) k2[q] = std::pow(g.wavenumber(0, q), 2);
  const double eps = g.epsilon();
  Eigen::MatrixXcd h = f.adjoint() * (eps * eps * k2).asDiagonal() * f / static_cast<double>(n);
  for (int i = 0; i < n; ++i) h(i, i) += v[i];
  return h;
}

Eigen::MatrixXcd dense_propagator(const Eigen::MatrixXcd& h, double dt, double eps) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> s(h);
  Eigen::VectorXcd ph(h.rows());
  for (int i = 0; i < h.rows(); ++i) ph[i] = std::polar(1.0, -s.eigenvalues()[i] * dt / eps);
  return s.eigenvectors() * ph.asDiagonal() * s.eigenvectors().adjoint();
}

std::vector<double> lattice_profile(const Grid& g, double omega, double depth, double shift = 0.0) {
  std::vector<double> v(g.count(0));
  for (int i = 0; i < g.count(0); ++i) v[i] = depth * std::pow(std::sin(omega * (g.coordinate(0, i) - shift)), 2);
  return v;
}

ComplexField apply_dense(const Eigen::MatrixXcd& m, const ComplexField& u) {
  Eigen::VectorXcd x(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) x[i] = u[i];
  const Eigen::VectorXcd y = m * x;
  ComplexField out(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = y[i];
  return out;
}

}  // namespace

TEST_CASE("empty lattice gives folded parabolas") {
  const Grid g(1, {4.0, 1, 1}, {64, 1, 1}, 0.5);
  const int cells = 4;
  const BlochBandTable t = build_band_table(g, {std::vector<double>(64, 0.0), {}, {}}, {cells, 1, 1});
  const auto& ax = t.axis(0);
  REQUIRE(ax.cell_points == 16);
  const double period = 1.0, G = 2 * kPi / period;
  for (int j = 0; j < cells; ++j) {
    // |k + G m|^2 over the reciprocal vectors that the grid resolves.
    std::vector<double> folded;
    for (int m = -10; m <= 10; ++m) {
      const double k = ax.quasimomenta[j] + G * m;
      if (k >= -kPi * 64 / 4.0 - 1e-12 && k < kPi * 64 / 4.0 - 1e-12) folded.push_back(0.25 * k * k);
    }
    std::sort(folded.begin(), folded.end());
    REQUIRE(folded.size() == 16);
    for (int b = 0; b < 16; ++b) CHECK(std::abs(ax.energies[j][b] - folded[b]) <= 1e-10 * (1 + folded[b]));
  }
}

TEST_CASE("cell eigenvalues against a dense eigensolve of the full operator") {
  for (double depth : {1.0, 40.0}) {
    const Grid g(1, {4.0, 1, 1}, {64, 1, 1}, 0.25);
    const double omega = kPi;  // 4 cells
    const BlochBandTable t = build_band_table({omega, 0, 0}, g, 0, depth);
    std::vector<double> table;
    for (const auto& e : t.axis(0).energies) table.insert(table.end(), e.begin(), e.end());
    std::sort(table.begin(), table.end());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> s(dense_hamiltonian(g, lattice_profile(g, omega, depth)));
    REQUIRE(table.size() == 64);
    for (int i = 0; i < 64; ++i) CHECK(std::abs(table[i] - s.eigenvalues()[i]) <= 1e-8 * (1 + std::abs(table[i])));
  }
}

TEST_CASE("band table invariants") {
  const Grid g(1, {8.0, 1, 1}, {128, 1, 1}, 0.3);
  const BlochBandTable t = build_band_table({kPi, 0, 0}, g, 0, 5.0);
  const auto& ax = t.axis(0);
  const int r = ax.cell_points, cells = ax.cells;
  CHECK(cells == 8);
  for (int j = 0; j < cells; ++j) {
    for (int b = 1; b < r; ++b) CHECK(ax.energies[j][b] >= ax.energies[j][b - 1]);
    // Lowest band is even in the quasimomentum.
    const int mj = (cells - j) % cells;
    if (j != cells / 2) CHECK(std::abs(ax.quasimomenta[j] + ax.quasimomenta[mj]) < 1e-12);
    CHECK(std::abs(ax.energies[j][0] - ax.energies[mj][0]) <= 1e-10);
    Eigen::Map<const Eigen::MatrixXcd> q(ax.eigenvectors[j].data(), r, r);
    const Eigen::MatrixXcd gram = q.adjoint() * q;
    CHECK((gram - Eigen::MatrixXcd::Identity(r, r)).cwiseAbs().maxCoeff() <= 1e-10);
  }
  std::ostringstream os;
  write_band_csv(t, os);
  const std::string csv = os.str();
  CHECK(csv.rfind("axis,k,E_1,E_2", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + cells);
}

TEST_CASE("incommensurate lattice is a config error") {
  const Grid g(1, {4.0, 1, 1}, {64, 1, 1});
  try {
    build_band_table({1.0, 0, 0}, g);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
  }
}

TEST_CASE("decompose and reconstruct") {
  const Grid g = Grid::cube(3, 4.0, 16, 0.5);
  const BlochBandTable t = build_band_table({kPi, kPi / 2, 0}, g, 0, 3.0);
  const ComplexField u = band_limited_field(g, 11);
  const BandCoefficients c = bloch_decompose(u, t);
  CHECK(c.discarded_mass == 0.0);
  const ComplexField back = bloch_reconstruct(c, t);
  CHECK(l2_distance(back, u) / l2_norm(u) <= 1e-10);
  CHECK(std::abs(std::sqrt(coefficient_norm_squared(c)) - l2_norm(u)) <= 1e-10 * l2_norm(u));
}

TEST_CASE("plane wave with an empty lattice has one coefficient") {
  const Grid g(1, {4.0, 1, 1}, {32, 1, 1});
  const BlochBandTable t = build_band_table(g, {std::vector<double>(32, 0.0), {}, {}}, {4, 1, 1});
  const double k = 2 * kPi * 1 / 4.0;  // first zone, class 1
  const ComplexField u = sample_complex(g, [&](const Vec3& x) { return std::polar(1.0, k * x[0]); });
  const BandCoefficients c = bloch_decompose(u, t);
  int nonzero = 0;
  for (const auto& v : c.values) nonzero += std::abs(v) > 1e-12;
  CHECK(nonzero == 1);
}

TEST_CASE("bloch step") {
  const Grid g = Grid::cube(2, 4.0, 32, 0.5);
  SUBCASE("empty lattice reduces to the kinetic flow") {
    const BlochBandTable t = build_band_table({0, 0, 0}, g);
    const ComplexField u = random_field(g, 3);
    CHECK(max_abs_diff(bloch_step(u, 0.37, t), kinetic_propagate(u, 0.37)) <= 1e-10);
    const BlochBandTable z = build_band_table({kPi, kPi, 0}, g, 0, 0.0);
    CHECK(max_abs_diff(bloch_step(u, 0.37, z, {0.3, -0.2, 0}), kinetic_propagate(u, 0.37)) <= 1e-10);
  }
  const BlochBandTable t = build_band_table({kPi, kPi / 2, 0}, g, 0, 4.0);
  SUBCASE("dt = 0 is the identity") {
    const ComplexField u = random_field(g, 4);
    CHECK(max_abs_diff(bloch_step(u, 0.0, t, {0.1, 0.2, 0}), u) == 0.0);
  }
  SUBCASE("band eigenfunction picks up its phase") {
    BandCoefficients c{g, ComplexBuffer(g.size(), cplx{}), 0.0};
    const int j0 = 1, b0 = 2, j1 = 0, b1 = 0;
    const std::size_t slot = g.flatten(j0 + t.axis(0).cells * b0, j1 + t.axis(1).cells * b1, 0);
    c.values[slot] = 1.0;
    const ComplexField phi = bloch_reconstruct(c, t);
    const double energy = t.axis(0).energies[j0][b0] + t.axis(1).energies[j1][b1];
    const double dt = 0.21;
    ComplexField expected = phi;
    for (auto& v : expected.values()) v *= std::polar(1.0, -energy * dt / g.epsilon());
    CHECK(max_abs_diff(bloch_step(phi, dt, t), expected) <= 1e-10);
  }
  SUBCASE("unitary") {
    const ComplexField u = random_field(g, 5);
    for (double dt : {0.01, 0.5, 3.0})
      CHECK(std::abs(l2_norm(bloch_step(u, dt, t, {0.13, 0.4, 0})) - l2_norm(u)) <= 1e-10 * l2_norm(u));
  }
}

TEST_CASE("shifted step against a dense matrix exponential") {
  const Grid g(1, {4.0, 1, 1}, {48, 1, 1}, 0.4);
  const double omega = kPi, depth = 6.0, dt = 0.3;
  const BlochBandTable t = build_band_table({omega, 0, 0}, g, 0, depth);
  const ComplexField u = random_field(g, 9);
  SUBCASE("grid-aligned shift samples the displaced lattice") {
    const double b = 5 * g.spacing(0);
    const Eigen::MatrixXcd h = dense_hamiltonian(g, lattice_profile(g, omega, depth, b));
    const ComplexField ref = apply_dense(dense_propagator(h, dt, g.epsilon()), u);
    CHECK(max_abs_diff(bloch_step(u, dt, t, {b, 0, 0}), ref) <= 1e-10);
  }
  SUBCASE("arbitrary shift equals the translation-conjugated operator") {
    const double b = 0.2371;
    const int n = g.count(0);
    const Eigen::MatrixXcd f = dft_matrix(n);
    Eigen::VectorXcd ph(n);
    for (int q = 0; q < n; ++q) ph[q] = std::polar(1.0, g.wavenumber(0, q) * b);
    const Eigen::MatrixXcd shift = f.adjoint() * ph.asDiagonal() * f / static_cast<double>(n);
    const Eigen::MatrixXcd h0 = dense_hamiltonian(g, lattice_profile(g, omega, depth));
    const Eigen::MatrixXcd h = shift.adjoint() * h0 * shift;
    const ComplexField ref = apply_dense(dense_propagator(h, dt, g.epsilon()), u);
    CHECK(max_abs_diff(bloch_step(u, dt, t, {b, 0, 0}), ref) <= 1e-10);
    // Smooth data sees the sampled displaced lattice up to aliasing at the band edge.
    const ComplexField s = band_limited_field(g, 10);
    const Eigen::MatrixXcd hs = dense_hamiltonian(g, lattice_profile(g, omega, depth, b));
    const ComplexField ref_s = apply_dense(dense_propagator(hs, dt, g.epsilon()), s);
    CHECK(l2_distance(bloch_step(s, dt, t, {b, 0, 0}), ref_s) / l2_norm(s) <= 1e-6);
  }
}

TEST_CASE("band truncation is reported") {
  const Grid g(1, {4.0, 1, 1}, {64, 1, 1}, 0.25);
  const BlochBandTable full = build_band_table({kPi, 0, 0}, g, 0, 2.0);
  const BlochBandTable cut = build_band_table({kPi, 0, 0}, g, 3, 2.0);
  CHECK(cut.retained_bands(0) == 3);
  CHECK(full.retained_bands(0) == 16);
  const ComplexField u = random_field(g, 1);
  const BandCoefficients c = bloch_decompose(u, cut);
  CHECK(c.discarded_mass > 1e-8);
  CHECK(std::abs(coefficient_norm_squared(c) + c.discarded_mass - std::pow(l2_norm(u), 2)) <= 1e-10 * std::pow(l2_norm(u), 2));
  // Data in the lowest bands passes through the truncated step untouched in norm.
  BandCoefficients low{g, ComplexBuffer(g.size(), cplx{}), 0.0};
  for (int j = 0; j < 4; ++j) low.values[j] = 0.5;
  const ComplexField v = bloch_reconstruct(low, full);
  CHECK(max_abs_diff(bloch_step(v, 0.4, cut), bloch_step(v, 0.4, full)) <= 1e-10);
}
