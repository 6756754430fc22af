#include "xfel/spectral.hpp"

#include <cmath>
#include <numbers>

#include "xfel/error.hpp"
#include "xfel/fft.hpp"

namespace xfel {
namespace {

constexpr double kPi = std::numbers::pi;

ComplexBuffer to_buffer(std::span<const cplx> values) {
  return ComplexBuffer(values.begin(), values.end());
}

ComplexField complexify(const RealField& f) {
  ComplexField c(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) c[i] = f[i];
  return c;
}

// Applies a real multiplier m(|k|^2) in spectral space, in place.
template <class Multiplier>
void apply_radial_multiplier(ComplexField& f, Multiplier&& m) {
  const auto ctx = SpectralContext::get(f.grid());
  const auto k2 = ctx->k_squared();
  const double inv_n = 1.0 / static_cast<double>(f.size());
  ctx->forward(f.values());
  auto v = f.values();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= m(k2[i]) * inv_n;
  ctx->backward(f.values());
}

}  // namespace

Spectrum fft_forward(const ComplexField& f) {
  const auto ctx = SpectralContext::get(f.grid());
  Spectrum s(f.grid(), to_buffer(f.values()));
  ctx->forward(s.coefficients());
  const double inv_n = 1.0 / static_cast<double>(f.size());
  for (auto& c : s.coefficients()) c *= inv_n;
  return s;
}

ComplexField fft_inverse(const Spectrum& coefficients) {
  const auto ctx = SpectralContext::get(coefficients.grid());
  ComplexField f(coefficients.grid(), to_buffer(coefficients.coefficients()));
  ctx->backward(f.values());
  return f;
}

void kinetic_propagate_inplace(ComplexField& f, double dt) {
  if (!std::isfinite(dt)) fail(ErrorKind::domain, "kinetic step needs a finite dt");
  if (dt == 0.0) return;
  const double eps = f.grid().epsilon();
  const auto ctx = SpectralContext::get(f.grid());
  const auto k2 = ctx->k_squared();
  const double inv_n = 1.0 / static_cast<double>(f.size());
  ctx->forward(f.values());
  auto v = f.values();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= std::polar(inv_n, -eps * dt * k2[i]);
  ctx->backward(f.values());
}

ComplexField kinetic_propagate(const ComplexField& f, double dt) {
  ComplexField out = f;
  kinetic_propagate_inplace(out, dt);
  return out;
}

RealField hartree_potential(const RealField& rho) {
  if (rho.grid().dim() != 3)
    fail(ErrorKind::unsupported, "the Hartree solve is defined on three-dimensional grids only");
  ComplexField work = complexify(rho);
  apply_radial_multiplier(work, [](double k2) { return k2 > 0.0 ? 4.0 * kPi / k2 : 0.0; });
  RealField out(rho.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = work[i].real();
  return out;
}

ComplexField gaussian_mollify(const ComplexField& f, double eta) {
  if (!(eta > 0.0)) fail(ErrorKind::domain, "mollification width eta must be positive");
  ComplexField out = f;
  const double s = eta / (8.0 * kPi);
  apply_radial_multiplier(out, [s](double k2) { return std::exp(-s * k2); });
  return out;
}

RealField gaussian_mollify(const RealField& f, double eta) {
  const ComplexField c = gaussian_mollify(complexify(f), eta);
  RealField out(f.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c[i].real();
  return out;
}

void spectral_translate_inplace(ComplexField& f, const Vec3& shift) {
  for (double s : shift)
    if (!std::isfinite(s)) fail(ErrorKind::domain, "translation must be finite");
  if (shift == Vec3{0.0, 0.0, 0.0}) return;
  const Grid& g = f.grid();
  const auto ctx = SpectralContext::get(g);
  const double inv_n = 1.0 / static_cast<double>(f.size());
  // Separable phase exp(i k.shift) = prod_a exp(i k_a shift_a).
  std::array<std::vector<cplx>, 3> phase;
  for (int a = 0; a < 3; ++a) {
    const auto k = ctx->k_axis(a);
    phase[a].resize(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) phase[a][i] = std::polar(1.0, k[i] * shift[a]);
  }
  ctx->forward(f.values());
  auto v = f.values();
  const int n1 = g.count(1), n2 = g.count(2);
#pragma omp parallel for schedule(static)
  for (int i0 = 0; i0 < g.count(0); ++i0) {
    for (int i1 = 0; i1 < n1; ++i1) {
      const cplx p01 = phase[0][i0] * phase[1][i1] * inv_n;
      cplx* row = v.data() + g.flatten(i0, i1, 0);
      for (int i2 = 0; i2 < n2; ++i2) row[i2] *= p01 * phase[2][i2];
    }
  }
  ctx->backward(f.values());
}

ComplexField spectral_translate(const ComplexField& f, const Vec3& shift) {
  ComplexField out = f;
  spectral_translate_inplace(out, shift);
  return out;
}

ComplexField gauge_transform(const ComplexField& psi, const GaugeHistory& history) {
  ComplexField u = spectral_translate(psi, history.shift);
  const cplx phase = std::polar(1.0, history.phase_integral / psi.grid().epsilon());
  for (auto& v : u.values()) v *= phase;
  return u;
}

ComplexField gauge_transform_inverse(const ComplexField& u, const GaugeHistory& history) {
  const Vec3 back{-history.shift[0], -history.shift[1], -history.shift[2]};
  ComplexField psi = spectral_translate(u, back);
  const cplx phase = std::polar(1.0, -history.phase_integral / u.grid().epsilon());
  for (auto& v : psi.values()) v *= phase;
  return psi;
}

cplx inner_product(const ComplexField& f, const ComplexField& g) {
  if (!f.grid().same_mesh(g.grid())) fail(ErrorKind::config, "inner product of fields on different grids");
  cplx acc{};
  for (std::size_t i = 0; i < f.size(); ++i) acc += std::conj(f[i]) * g[i];
  return acc * f.grid().cell_volume();
}

double l2_norm(const ComplexField& f) {
  double acc = 0.0;
  for (const auto& v : f.values()) acc += std::norm(v);
  return std::sqrt(acc * f.grid().cell_volume());
}

double l2_distance(const ComplexField& f, const ComplexField& g) {
  if (!f.grid().same_mesh(g.grid())) fail(ErrorKind::comparison, "distance between fields on different grids");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += std::norm(f[i] - g[i]);
  return std::sqrt(acc * f.grid().cell_volume());
}

double spectral_norm_squared(const Spectrum& s) {
  double acc = 0.0;
  for (const auto& c : s.coefficients()) acc += std::norm(c);
  return acc * s.grid().box_volume();
}

RealField density(const ComplexField& u) {
  RealField rho(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) rho[i] = std::norm(u[i]);
  return rho;
}

}  // namespace xfel
