#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <new>
#include <span>
#include <vector>

namespace xfel {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;
using Index3 = std::array<int, 3>;

/// 64-byte aligned storage so FFT plans can execute on any field buffer.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), alignment));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

using ComplexBuffer = std::vector<cplx, AlignedAllocator<cplx>>;

/// Periodic box [-L/2, L/2)^dim sampled at N_d points per axis.
///
/// Axes beyond `dim` are inert: count 1, length 1, coordinate 0, wavenumber 0.
/// Flat storage is row-major with axis 0 slowest.
class Grid {
 public:
  Grid(int dim, Vec3 lengths, Index3 counts, double epsilon = 1.0);

  static Grid cube(int dim, double length, int count, double epsilon = 1.0);

  int dim() const noexcept { return dim_; }
  double length(int axis) const noexcept { return lengths_[axis]; }
  int count(int axis) const noexcept { return counts_[axis]; }
  const Vec3& lengths() const noexcept { return lengths_; }
  const Index3& counts() const noexcept { return counts_; }
  double epsilon() const noexcept { return epsilon_; }

  std::size_t size() const noexcept { return size_; }
  double spacing(int axis) const noexcept { return lengths_[axis] / counts_[axis]; }
  double max_spacing() const noexcept;
  double cell_volume() const noexcept;
  double box_volume() const noexcept;

  double coordinate(int axis, int i) const noexcept {
    return axis < dim_ ? -0.5 * lengths_[axis] + i * spacing(axis) : 0.0;
  }
  /// Wavenumber 2*pi*n/L for FFT index i, with n in the symmetric ordering
  /// [-N/2, N/2).
  double wavenumber(int axis, int i) const noexcept;

  Index3 unflatten(std::size_t flat) const noexcept {
    const auto n12 = static_cast<std::size_t>(counts_[1]) * counts_[2];
    return {static_cast<int>(flat / n12), static_cast<int>((flat / counts_[2]) % counts_[1]),
            static_cast<int>(flat % counts_[2])};
  }
  std::size_t flatten(int i0, int i1, int i2) const noexcept {
    return (static_cast<std::size_t>(i0) * counts_[1] + i1) * counts_[2] + i2;
  }
  Vec3 point(std::size_t flat) const noexcept {
    const auto idx = unflatten(flat);
    return {coordinate(0, idx[0]), coordinate(1, idx[1]), coordinate(2, idx[2])};
  }

  Grid with_epsilon(double epsilon) const { return Grid(dim_, lengths_, counts_, epsilon); }
  bool same_mesh(const Grid& other) const noexcept {
    return dim_ == other.dim_ && lengths_ == other.lengths_ && counts_ == other.counts_;
  }
  bool operator==(const Grid& other) const noexcept {
    return same_mesh(other) && epsilon_ == other.epsilon_;
  }

 private:
  int dim_;
  Vec3 lengths_;
  Index3 counts_;
  double epsilon_;
  std::size_t size_;
};

/// Wave-function samples on a grid.
class ComplexField {
 public:
  explicit ComplexField(const Grid& grid) : grid_(grid), values_(grid.size(), cplx{}) {}
  ComplexField(const Grid& grid, ComplexBuffer values);

  const Grid& grid() const noexcept { return grid_; }
  std::span<cplx> values() noexcept { return values_; }
  std::span<const cplx> values() const noexcept { return values_; }
  cplx& operator[](std::size_t i) noexcept { return values_[i]; }
  const cplx& operator[](std::size_t i) const noexcept { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }
  cplx* data() noexcept { return values_.data(); }
  const cplx* data() const noexcept { return values_.data(); }

 private:
  Grid grid_;
  ComplexBuffer values_;
};

/// Real samples (potentials, densities) on a grid.
class RealField {
 public:
  explicit RealField(const Grid& grid) : grid_(grid), values_(grid.size(), 0.0) {}
  RealField(const Grid& grid, std::vector<double> values);

  const Grid& grid() const noexcept { return grid_; }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }

  RealField& operator+=(const RealField& other);
  RealField& operator*=(double s);

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Spectral coefficients c_n with f(x_j) = sum_n c_n exp(2 pi i n.j / N),
/// i.e. referenced to the box corner. Parseval: sum |f|^2 dV = V_box sum |c|^2.
class Spectrum {
 public:
  explicit Spectrum(const Grid& grid) : grid_(grid), coefficients_(grid.size(), cplx{}) {}
  Spectrum(const Grid& grid, ComplexBuffer coefficients);

  const Grid& grid() const noexcept { return grid_; }
  std::span<cplx> coefficients() noexcept { return coefficients_; }
  std::span<const cplx> coefficients() const noexcept { return coefficients_; }
  cplx& operator[](std::size_t i) noexcept { return coefficients_[i]; }
  const cplx& operator[](std::size_t i) const noexcept { return coefficients_[i]; }
  std::size_t size() const noexcept { return coefficients_.size(); }

 private:
  Grid grid_;
  ComplexBuffer coefficients_;
};

template <class Fn>
ComplexField sample_complex(const Grid& grid, Fn&& fn) {
  ComplexField f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = fn(grid.point(i));
  return f;
}

template <class Fn>
RealField sample_real(const Grid& grid, Fn&& fn) {
  RealField f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = fn(grid.point(i));
  return f;
}

/// exp(-|x-center|^2 / (2 width^2) + i k.x)
ComplexField gaussian_packet(const Grid& grid, const Vec3& center, double width,
                             const Vec3& wavevector = {0.0, 0.0, 0.0}, double amplitude = 1.0);

double squared_norm(const Vec3& v) noexcept;

}  // namespace xfel
