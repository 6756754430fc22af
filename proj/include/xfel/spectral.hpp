#pragma once

#include "xfel/grid.hpp"

namespace xfel {

Spectrum fft_forward(const ComplexField& f);
ComplexField fft_inverse(const Spectrum& coefficients);

/// Multiplies every mode by exp(-i eps dt |k|^2).
ComplexField kinetic_propagate(const ComplexField& f, double dt);
void kinetic_propagate_inplace(ComplexField& f, double dt);

/// Periodic |x|^-1 * rho via the multiplier 4 pi / |k|^2 with the zero mode
/// removed (neutralising background). Three-dimensional grids only.
RealField hartree_potential(const RealField& rho);

/// Convolution with the unit-mass kernel (2/eta)^{3/2} exp(-2 pi |x|^2 / eta).
/// Its transform is exp(-eta |k|^2 / (8 pi)); on lower-dimensional grids the
/// kernel is marginalised onto the active axes.
RealField gaussian_mollify(const RealField& f, double eta);
ComplexField gaussian_mollify(const ComplexField& f, double eta);

/// Returns x -> f(x + shift) through the phase multiplier exp(i k.shift).
ComplexField spectral_translate(const ComplexField& f, const Vec3& shift);
void spectral_translate_inplace(ComplexField& f, const Vec3& shift);

/// Time integrals of the vector potential A needed to map psi to u:
/// shift = b(t) = 2 int_0^t A, phase_integral = int_0^t |A|^2.
struct GaugeHistory {
  Vec3 shift{0.0, 0.0, 0.0};
  double phase_integral = 0.0;
};

/// u(x) = psi(x + b) exp(i/eps int |A|^2).
ComplexField gauge_transform(const ComplexField& psi, const GaugeHistory& history);
/// Inverse of `gauge_transform`.
ComplexField gauge_transform_inverse(const ComplexField& u, const GaugeHistory& history);

/// Discrete L2 inner product and norms with weight prod(L_d/N_d).
cplx inner_product(const ComplexField& f, const ComplexField& g);
double l2_norm(const ComplexField& f);
double l2_distance(const ComplexField& f, const ComplexField& g);
/// V_box * sum |c_n|^2, the spectral side of Parseval.
double spectral_norm_squared(const Spectrum& s);

RealField density(const ComplexField& u);

}  // namespace xfel
