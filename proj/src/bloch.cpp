#include "xfel/bloch.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <ostream>

#include "xfel/error.hpp"
#include "xfel/fft.hpp"
#include "xfel/log.hpp"
#include "xfel/potentials.hpp"

namespace xfel {
namespace {

constexpr double kPi = std::numbers::pi;

BlochAxisTable build_axis(const Grid& grid, int axis, const std::vector<double>& profile,
                          int cells) {
  const int n = grid.count(axis);
  if (cells < 1 || n % cells != 0)
    fail(ErrorKind::config, "lattice cells must divide the point count on axis " +
                                std::to_string(axis));
  BlochAxisTable t;
  t.cells = cells;
  t.cell_points = n / cells;
  t.period = grid.length(axis) / cells;
  const int r = t.cell_points;

  std::vector<double> v = profile.empty() ? std::vector<double>(n, 0.0) : profile;
  if (static_cast<int>(v.size()) != n) fail(ErrorKind::config, "lattice profile has wrong length");
  for (int i = 0; i + r < n; ++i)
    if (std::abs(v[i + r] - v[i]) > 1e-9 * (1.0 + std::abs(v[i])))
      fail(ErrorKind::config, "lattice profile is not periodic with the cell on axis " +
                                  std::to_string(axis));

  // Corner-referenced DFT of the profile; only multiples of `cells` survive.
  std::vector<cplx> vhat(n);
  for (int q = 0; q < n; ++q) {
    cplx acc{};
    for (int i = 0; i < n; ++i)
      acc += v[i] * std::polar(1.0, -2.0 * kPi * static_cast<double>(q) * i / n);
    vhat[q] = acc / static_cast<double>(n);
  }

  const double eps2 = grid.epsilon() * grid.epsilon();
  t.quasimomenta.resize(cells);
  t.energies.resize(cells);
  t.eigenvectors.resize(cells);
  for (int j = 0; j < cells; ++j) {
    const int jj = j < (cells + 1) / 2 ? j : j - cells;
    t.quasimomenta[j] = cells > 1 ? 2.0 * kPi * jj / grid.length(axis) : 0.0;
    Eigen::MatrixXcd h(r, r);
    for (int m = 0; m < r; ++m) {
      const int nm = j + cells * m;
      for (int mp = 0; mp < r; ++mp) {
        const int np = j + cells * mp;
        h(m, mp) = vhat[((nm - np) % n + n) % n];
      }
      const double k = grid.wavenumber(axis, nm);
      h(m, m) += eps2 * k * k;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    if (solver.info() != Eigen::Success) fail(ErrorKind::numerical_breakdown, "cell eigensolve failed");
    t.energies[j].assign(solver.eigenvalues().data(), solver.eigenvalues().data() + r);
    t.eigenvectors[j].assign(solver.eigenvectors().data(), solver.eigenvectors().data() + r * r);
  }
  return t;
}

// Applies, along `axis`, the per-class matrix mats[j] (column-major r x r) to
// the spectral coefficient lines in place.
void apply_along_axis(const Grid& grid, int axis, std::span<cplx> data, int cells, int r,
                      const std::vector<std::vector<cplx>>& mats) {
  const Index3 n = grid.counts();
  std::size_t stride = 1;
  for (int a = axis + 1; a < 3; ++a) stride *= n[a];
  const std::size_t outer = grid.size() / (static_cast<std::size_t>(n[axis]) * stride);
  const std::size_t block = static_cast<std::size_t>(n[axis]) * stride;
#pragma omp parallel for schedule(static)
  for (std::size_t o = 0; o < outer; ++o) {
    std::vector<cplx> in(r), out(r);
    for (std::size_t s = 0; s < stride; ++s) {
      cplx* line = data.data() + o * block + s;
      for (int j = 0; j < cells; ++j) {
        for (int m = 0; m < r; ++m) in[m] = line[(j + static_cast<std::size_t>(cells) * m) * stride];
        const auto& mat = mats[j];
        for (int m = 0; m < r; ++m) out[m] = 0.0;
        for (int c = 0; c < r; ++c) {
          const cplx x = in[c];
          const cplx* col = mat.data() + static_cast<std::size_t>(c) * r;
          for (int m = 0; m < r; ++m) out[m] += col[m] * x;
        }
        for (int m = 0; m < r; ++m) line[(j + static_cast<std::size_t>(cells) * m) * stride] = out[m];
      }
    }
  }
}

std::vector<std::vector<cplx>> adjoint_eigenvectors(const BlochAxisTable& t) {
  const int r = t.cell_points;
  std::vector<std::vector<cplx>> out(t.cells, std::vector<cplx>(static_cast<std::size_t>(r) * r));
  for (int j = 0; j < t.cells; ++j)
    for (int c = 0; c < r; ++c)
      for (int m = 0; m < r; ++m) out[j][c * r + m] = std::conj(t.eigenvectors[j][m * r + c]);
  return out;
}

// Q diag(exp(-i E dt / eps)) Q^H per class.
std::vector<std::vector<cplx>> band_propagators(const BlochAxisTable& t, double dt, double eps) {
  const int r = t.cell_points;
  std::vector<std::vector<cplx>> out(t.cells, std::vector<cplx>(static_cast<std::size_t>(r) * r));
  for (int j = 0; j < t.cells; ++j) {
    const auto& q = t.eigenvectors[j];
    std::vector<cplx> phase(r);
    for (int b = 0; b < r; ++b) phase[b] = std::polar(1.0, -t.energies[j][b] * dt / eps);
    for (int c = 0; c < r; ++c)
      for (int m = 0; m < r; ++m) {
        cplx acc{};
        for (int b = 0; b < r; ++b) acc += q[b * r + m] * phase[b] * std::conj(q[b * r + c]);
        out[j][c * r + m] = acc;
      }
  }
  return out;
}

void translate_spectrum(const Grid& grid, std::span<cplx> data, const Vec3& shift, double sign) {
  if (shift == Vec3{0.0, 0.0, 0.0}) return;
  const auto ctx = SpectralContext::get(grid);
  std::array<std::vector<cplx>, 3> phase;
  for (int a = 0; a < 3; ++a) {
    const auto k = ctx->k_axis(a);
    phase[a].resize(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) phase[a][i] = std::polar(1.0, sign * k[i] * shift[a]);
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto idx = grid.unflatten(i);
    data[i] *= phase[0][idx[0]] * phase[1][idx[1]] * phase[2][idx[2]];
  }
}

}  // namespace

BlochBandTable::BlochBandTable(const Grid& grid, std::array<BlochAxisTable, 3> axes, int n_bands)
    : grid_(grid), axes_(std::move(axes)), n_bands_(n_bands) {
  if (n_bands < 0) fail(ErrorKind::config, "n_bands must be nonnegative");
}

int BlochBandTable::retained_bands(int a) const noexcept {
  const int r = axes_[a].cell_points;
  return n_bands_ > 0 && n_bands_ < r ? n_bands_ : r;
}

BlochBandTable build_band_table(const Grid& grid, const std::array<std::vector<double>, 3>& profiles,
                                const Index3& cells, int n_bands) {
  std::array<BlochAxisTable, 3> axes;
  for (int a = 0; a < 3; ++a) {
    if (a < grid.dim()) {
      axes[a] = build_axis(grid, a, profiles[a], cells[a]);
    } else {
      axes[a].cells = 1;
      axes[a].cell_points = 1;
      axes[a].quasimomenta = {0.0};
      axes[a].energies = {{0.0}};
      axes[a].eigenvectors = {{cplx(1.0)}};
    }
  }
  return BlochBandTable(grid, std::move(axes), n_bands);
}

BlochBandTable build_band_table(const Vec3& lattice_freqs, const Grid& grid, int n_bands,
                                double depth) {
  std::array<std::vector<double>, 3> profiles;
  Index3 cells{1, 1, 1};
  for (int a = 0; a < grid.dim(); ++a) {
    if (lattice_freqs[a] == 0.0) {
      cells[a] = grid.count(a);
      continue;
    }
    // sin^2(omega y) repeats every pi / omega.
    const double c = lattice_freqs[a] * grid.length(a) / kPi;
    if (std::abs(c - std::round(c)) > 1e-9 || std::round(c) < 1)
      fail(ErrorKind::config, "lattice is incommensurate with the box on axis " + std::to_string(a));
    cells[a] = static_cast<int>(std::round(c));
    profiles[a].resize(grid.count(a));
    for (int i = 0; i < grid.count(a); ++i) {
      const double s = std::sin(lattice_freqs[a] * grid.coordinate(a, i));
      profiles[a][i] = depth * s * s;
    }
  }
  return build_band_table(grid, profiles, cells, n_bands);
}

BandCoefficients bloch_decompose(const ComplexField& u, const BlochBandTable& table) {
  if (!u.grid().same_mesh(table.grid())) fail(ErrorKind::config, "band table grid mismatch");
  const Grid& g = u.grid();
  const auto ctx = SpectralContext::get(g);
  BandCoefficients out{g, ComplexBuffer(u.values().begin(), u.values().end()), 0.0};
  ctx->forward(out.values);
  const double inv_n = 1.0 / static_cast<double>(g.size());
  for (auto& c : out.values) c *= inv_n;
  for (int a = 0; a < g.dim(); ++a) {
    const auto& t = table.axis(a);
    apply_along_axis(g, a, out.values, t.cells, t.cell_points, adjoint_eigenvectors(t));
  }
  // Zero the discarded bands and measure what they carried.
  bool truncated = false;
  for (int a = 0; a < g.dim(); ++a) truncated |= table.retained_bands(a) < table.axis(a).cell_points;
  if (truncated) {
    double lost = 0.0;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      const auto idx = g.unflatten(i);
      for (int a = 0; a < g.dim(); ++a) {
        if (idx[a] / table.axis(a).cells >= table.retained_bands(a)) {
          lost += std::norm(out.values[i]);
          out.values[i] = 0.0;
          break;
        }
      }
    }
    out.discarded_mass = lost * g.box_volume();
    if (out.discarded_mass > 1e-8)
      log::warn("Bloch truncation discarded mass ", out.discarded_mass);
  }
  return out;
}

ComplexField bloch_reconstruct(const BandCoefficients& coefficients, const BlochBandTable& table) {
  const Grid& g = coefficients.grid;
  if (!g.same_mesh(table.grid())) fail(ErrorKind::config, "band table grid mismatch");
  ComplexField u(g, coefficients.values);
  for (int a = 0; a < g.dim(); ++a) {
    const auto& t = table.axis(a);
    apply_along_axis(g, a, u.values(), t.cells, t.cell_points, t.eigenvectors);
  }
  SpectralContext::get(g)->backward(u.values());
  return u;
}

double coefficient_norm_squared(const BandCoefficients& coefficients) {
  double acc = 0.0;
  for (const auto& c : coefficients.values) acc += std::norm(c);
  return acc * coefficients.grid.box_volume();
}

void bloch_step_inplace(ComplexField& u, double dt, const BlochBandTable& table,
                        const Vec3& shift_b) {
  const Grid& g = u.grid();
  if (!g.same_mesh(table.grid())) fail(ErrorKind::config, "band table grid mismatch");
  if (dt == 0.0) return;
  const auto ctx = SpectralContext::get(g);
  ctx->forward(u.values());
  const double inv_n = 1.0 / static_cast<double>(g.size());
  for (auto& c : u.values()) c *= inv_n;
  translate_spectrum(g, u.values(), shift_b, +1.0);
  const bool truncated = table.n_bands() > 0;
  for (int a = 0; a < g.dim(); ++a) {
    const auto& t = table.axis(a);
    if (truncated) {
      // Project onto the retained bands, propagate, and map back.
      apply_along_axis(g, a, u.values(), t.cells, t.cell_points, adjoint_eigenvectors(t));
      std::vector<std::vector<cplx>> phases(t.cells);
      const int r = t.cell_points;
      for (int j = 0; j < t.cells; ++j) {
        phases[j].assign(static_cast<std::size_t>(r) * r, cplx{});
        for (int b = 0; b < r; ++b)
          phases[j][b * r + b] = b < table.retained_bands(a)
                                     ? std::polar(1.0, -t.energies[j][b] * dt / g.epsilon())
                                     : cplx{};
      }
      apply_along_axis(g, a, u.values(), t.cells, r, phases);
      apply_along_axis(g, a, u.values(), t.cells, r, t.eigenvectors);
    } else {
      apply_along_axis(g, a, u.values(), t.cells, t.cell_points,
                       band_propagators(t, dt, g.epsilon()));
    }
  }
  translate_spectrum(g, u.values(), shift_b, -1.0);
  ctx->backward(u.values());
}

ComplexField bloch_step(const ComplexField& u, double dt, const BlochBandTable& table,
                        const Vec3& shift_b) {
  ComplexField out = u;
  bloch_step_inplace(out, dt, table, shift_b);
  return out;
}

void write_band_csv(const BlochBandTable& table, std::ostream& os) {
  int width = 0;
  for (int a = 0; a < table.grid().dim(); ++a) width = std::max(width, table.axis(a).cell_points);
  os << "axis,k";
  for (int b = 1; b <= width; ++b) os << ",E_" << b;
  os << '\n';
  os.precision(17);
  for (int a = 0; a < table.grid().dim(); ++a) {
    const auto& t = table.axis(a);
    std::vector<int> order(t.cells);
    for (int j = 0; j < t.cells; ++j) order[j] = j;
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return t.quasimomenta[x] < t.quasimomenta[y]; });
    for (int j : order) {
      os << a << ',' << t.quasimomenta[j];
      for (int b = 0; b < width; ++b) {
        os << ',';
        if (b < t.cell_points) os << t.energies[j][b];
      }
      os << '\n';
    }
  }
}

}  // namespace xfel
