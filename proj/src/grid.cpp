#include "xfel/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "xfel/error.hpp"

namespace xfel {

Grid::Grid(int dim, Vec3 lengths, Index3 counts, double epsilon)
    : dim_(dim), lengths_(lengths), counts_(counts), epsilon_(epsilon) {
  if (dim < 1 || dim > 3) fail(ErrorKind::config, "grid dimension must be 1, 2 or 3");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    fail(ErrorKind::config, "semiclassical parameter epsilon must be positive");
  for (int a = 0; a < 3; ++a) {
    if (a >= dim) {
      lengths_[a] = 1.0;
      counts_[a] = 1;
      continue;
    }
    if (!(lengths_[a] > 0.0) || !std::isfinite(lengths_[a]))
      fail(ErrorKind::config, "box length on axis " + std::to_string(a) + " must be positive");
    if (counts_[a] < 4 || counts_[a] % 2 != 0)
      fail(ErrorKind::config,
           "point count on axis " + std::to_string(a) + " must be even and at least 4");
  }
  size_ = static_cast<std::size_t>(counts_[0]) * counts_[1] * counts_[2];
}

Grid Grid::cube(int dim, double length, int count, double epsilon) {
  return Grid(dim, {length, length, length}, {count, count, count}, epsilon);
}

double Grid::max_spacing() const noexcept {
  double h = 0.0;
  for (int a = 0; a < dim_; ++a) h = std::max(h, spacing(a));
  return h;
}

double Grid::cell_volume() const noexcept {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= spacing(a);
  return v;
}

double Grid::box_volume() const noexcept {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= lengths_[a];
  return v;
}

double Grid::wavenumber(int axis, int i) const noexcept {
  if (axis >= dim_) return 0.0;
  const int n = counts_[axis];
  const int m = i < n / 2 ? i : i - n;
  return 2.0 * std::numbers::pi * m / lengths_[axis];
}

ComplexField::ComplexField(const Grid& grid, ComplexBuffer values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    fail(ErrorKind::config, "complex field size does not match its grid");
}

RealField::RealField(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    fail(ErrorKind::config, "real field size does not match its grid");
}

RealField& RealField::operator+=(const RealField& other) {
  if (!grid_.same_mesh(other.grid_)) fail(ErrorKind::config, "field grids differ");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

RealField& RealField::operator*=(double s) {
  for (auto& v : values_) v *= s;
  return *this;
}

Spectrum::Spectrum(const Grid& grid, ComplexBuffer coefficients)
    : grid_(grid), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() != grid_.size())
    fail(ErrorKind::config, "spectrum size does not match its grid");
}

ComplexField gaussian_packet(const Grid& grid, const Vec3& center, double width,
                             const Vec3& wavevector, double amplitude) {
  if (!(width > 0.0)) fail(ErrorKind::config, "gaussian width must be positive");
  const double inv = 1.0 / (2.0 * width * width);
  return sample_complex(grid, [&](const Vec3& x) {
    double r2 = 0.0;
    double phase = 0.0;
    for (int a = 0; a < grid.dim(); ++a) {
      r2 += (x[a] - center[a]) * (x[a] - center[a]);
      phase += wavevector[a] * x[a];
    }
    return amplitude * std::exp(-r2 * inv) * cplx(std::cos(phase), std::sin(phase));
  });
}

double squared_norm(const Vec3& v) noexcept { return v[0] * v[0] + v[1] * v[1] + v[2] * v[2]; }

}  // namespace xfel
