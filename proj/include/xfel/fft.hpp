#pragma once

#include <memory>
#include <span>
#include <vector>

#include "xfel/grid.hpp"

namespace xfel {

/// Per-mesh FFT plans and wavenumber tables, shared by every field on that
/// mesh. Obtain through `SpectralContext::get`; instances are immutable and
/// safe to use from several threads.
class SpectralContext {
 public:
  static std::shared_ptr<const SpectralContext> get(const Grid& grid);

  ~SpectralContext();
  SpectralContext(const SpectralContext&) = delete;
  SpectralContext& operator=(const SpectralContext&) = delete;

  /// Unnormalised forward transform, in place.
  void forward(std::span<cplx> data) const;
  /// Unnormalised backward transform, in place (no 1/N factor).
  void backward(std::span<cplx> data) const;

  /// |k|^2 per flat FFT index.
  std::span<const double> k_squared() const noexcept { return k2_; }
  /// k along `axis` per FFT index on that axis.
  std::span<const double> k_axis(int axis) const noexcept { return k_axis_[axis]; }
  std::size_t size() const noexcept { return k2_.size(); }

 private:
  explicit SpectralContext(const Grid& grid);

  Grid grid_;
  void* forward_plan_ = nullptr;
  void* backward_plan_ = nullptr;
  std::vector<double> k2_;
  std::array<std::vector<double>, 3> k_axis_;
};

}  // namespace xfel
