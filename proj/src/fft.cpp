#include "xfel/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "xfel/error.hpp"

namespace xfel {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

using MeshKey = std::tuple<int, Index3, Vec3>;

}  // namespace

std::shared_ptr<const SpectralContext> SpectralContext::get(const Grid& grid) {
  // Contexts live for the whole process; meshes are few and plans are reused.
  static std::map<MeshKey, std::shared_ptr<const SpectralContext>> cache;
  std::lock_guard lock(planner_mutex());
  const MeshKey key{grid.dim(), grid.counts(), grid.lengths()};
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  std::shared_ptr<const SpectralContext> ctx(new SpectralContext(grid));
  cache[key] = ctx;
  return ctx;
}

// Constructed under the planner mutex (FFTW planning is not thread safe).
SpectralContext::SpectralContext(const Grid& grid) : grid_(grid) {
  ComplexBuffer scratch(grid.size());
  int dims[3] = {grid.count(0), grid.count(1), grid.count(2)};
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  // FFTW_ESTIMATE keeps plan choice, and therefore round-off, reproducible.
  forward_plan_ = fftw_plan_dft(grid.dim(), dims, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  backward_plan_ = fftw_plan_dft(grid.dim(), dims, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!forward_plan_ || !backward_plan_) fail(ErrorKind::config, "FFT planning failed");

  for (int a = 0; a < 3; ++a) {
    k_axis_[a].resize(grid.count(a));
    for (int i = 0; i < grid.count(a); ++i) k_axis_[a][i] = grid.wavenumber(a, i);
  }
  k2_.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto idx = grid.unflatten(i);
    double k2 = 0.0;
    for (int a = 0; a < 3; ++a) k2 += k_axis_[a][idx[a]] * k_axis_[a][idx[a]];
    k2_[i] = k2;
  }
}

SpectralContext::~SpectralContext() {
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

void SpectralContext::forward(std::span<cplx> data) const {
  if (data.size() != k2_.size()) fail(ErrorKind::config, "FFT size does not match the grid");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), p, p);
}

void SpectralContext::backward(std::span<cplx> data) const {
  if (data.size() != k2_.size()) fail(ErrorKind::config, "FFT size does not match the grid");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(backward_plan_), p, p);
}

}  // namespace xfel
