#pragma once

#include <cmath>
#include <random>

#include "xfel/grid.hpp"
#include "xfel/spectral.hpp"

namespace xfel::test {

inline ComplexField random_field(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexField f(g);
  for (auto& v : f.values()) v = {n(rng), n(rng)};
  return f;
}

/// Random field with only |n| < N/4 modes populated.
inline ComplexField band_limited_field(const Grid& g, unsigned seed) {
  ComplexField f = random_field(g, seed);
  Spectrum s = fft_forward(f);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto idx = g.unflatten(i);
    for (int a = 0; a < g.dim(); ++a) {
      const int n = idx[a] < g.count(a) / 2 ? idx[a] : idx[a] - g.count(a);
      if (std::abs(n) >= g.count(a) / 4) s[i] = 0.0;
    }
  }
  return fft_inverse(s);
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double max_abs_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace xfel::test
