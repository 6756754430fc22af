#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include "xfel/grid.hpp"

namespace xfel {

/// Band data for one axis of a separable lattice.
///
/// The axis holds `cells` lattice periods of `cell_points` samples each. Grid
/// mode n (FFT index) belongs to quasimomentum class j = n mod cells and cell
/// mode m = n / cells; the cell Hamiltonian for class j couples the
/// `cell_points` modes of that class and is diagonalised densely.
struct BlochAxisTable {
  int cells = 1;
  int cell_points = 1;
  double period = 0.0;
  std::vector<double> quasimomenta;               ///< per class j, first Brillouin zone
  std::vector<std::vector<double>> energies;      ///< [j][band], ascending
  std::vector<std::vector<cplx>> eigenvectors;    ///< [j], column-major cell_points^2
};

class BlochBandTable {
 public:
  BlochBandTable(const Grid& grid, std::array<BlochAxisTable, 3> axes, int n_bands);

  const Grid& grid() const noexcept { return grid_; }
  const BlochAxisTable& axis(int a) const noexcept { return axes_[a]; }
  /// Retained bands per axis (all of them by default).
  int n_bands() const noexcept { return n_bands_; }
  int retained_bands(int a) const noexcept;

 private:
  Grid grid_;
  std::array<BlochAxisTable, 3> axes_;
  int n_bands_;
};

/// Band table of -eps^2 d^2/dy^2 + depth sin^2(omega_l y) per axis; axes with
/// omega_l = 0 are free. `n_bands` = 0 keeps every band the grid resolves.
BlochBandTable build_band_table(const Vec3& lattice_freqs, const Grid& grid, int n_bands = 0,
                                double depth = 1.0);

/// Same for arbitrary per-axis cell potentials sampled on the grid; profile[a]
/// must repeat every count(a)/cells[a] samples.
BlochBandTable build_band_table(const Grid& grid, const std::array<std::vector<double>, 3>& profiles,
                                const Index3& cells, int n_bands = 0);

/// Band coefficients laid out like the grid: along each axis, slot
/// j + cells * m holds band m of class j.
struct BandCoefficients {
  Grid grid;
  ComplexBuffer values;
  double discarded_mass = 0.0;
};

BandCoefficients bloch_decompose(const ComplexField& u, const BlochBandTable& table);
ComplexField bloch_reconstruct(const BandCoefficients& coefficients, const BlochBandTable& table);
/// V_box * sum |c|^2, equal to ||u||^2 for untruncated tables.
double coefficient_norm_squared(const BandCoefficients& coefficients);

/// exp(-i dt (-eps^2 Lap + V_Gamma(x - b)) / eps) applied exactly through the
/// band table, with the lattice displaced by `shift_b` (held fixed).
ComplexField bloch_step(const ComplexField& u, double dt, const BlochBandTable& table,
                        const Vec3& shift_b = {0.0, 0.0, 0.0});
void bloch_step_inplace(ComplexField& u, double dt, const BlochBandTable& table,
                        const Vec3& shift_b = {0.0, 0.0, 0.0});

/// CSV with columns axis,k,E_1,...,E_M, one row per quasimomentum.
void write_band_csv(const BlochBandTable& table, std::ostream& os);

}  // namespace xfel
