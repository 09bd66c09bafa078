#pragma once

// Independent reference computations for the unit tests: direct
// trigonometric sums and quadrature, with no FFTs.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "ttn/spectral.hpp"

namespace ttn::testing {

/// Random real field with independent Gaussian coefficients on the cube.
inline SpectralField random_real(int dim, int N, std::uint64_t seed, bool zero_mean = false, double amp = 1.0) {
  SpectralField u(dim, N, 1);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, amp);
  auto c = u.component(0);
  const std::size_t z = u.zero_index();
  for (std::size_t i = z + 1; i < c.size(); ++i) {
    c[i] = Complex(g(rng), g(rng));
    c[u.mirror(i)] = std::conj(c[i]);
  }
  c[z] = zero_mean ? 0.0 : g(rng);
  return u;
}

/// Uniform grid points j / M of the unit torus.
inline std::vector<std::array<double, 3>> grid_points(int dim, int M) {
  std::vector<std::array<double, 3>> pts;
  const int n3 = dim == 3 ? M : 1;
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b)
      for (int c = 0; c < n3; ++c) pts.push_back({double(a) / M, double(b) / M, dim == 3 ? double(c) / M : 0.0});
  return pts;
}

/// sum_k mult(k) c_k e^{2 pi i k.x} evaluated at x.
inline Complex eval_at(const SpectralField& u, const std::array<double, 3>& x,
                       const std::function<Complex(const Wavevector&)>& mult = {}, int comp = 0) {
  Complex s = 0.0;
  for (std::size_t i = 0; i < u.modes(); ++i) {
    const Wavevector k = u.wavevector(i);
    double ph = 0.0;
    for (int j = 0; j < u.dim(); ++j) ph += k[j] * x[static_cast<std::size_t>(j)];
    const Complex e = std::polar(1.0, 2.0 * kPi * ph);
    const Complex c = u.component(comp)[i];
    s += (mult ? mult(k) : Complex(1.0)) * c * e;
  }
  return s;
}

/// Fourier coefficients up to cutoff N of grid samples f(j/M) by quadrature.
inline SpectralField quadrature(int dim, int N, int M, const std::vector<std::array<double, 3>>& pts,
                                const std::vector<double>& f) {
  SpectralField out(dim, N, 1);
  const double w = 1.0 / static_cast<double>(pts.size());
  for (std::size_t i = 0; i < out.modes(); ++i) {
    const Wavevector k = out.wavevector(i);
    Complex s = 0.0;
    for (std::size_t p = 0; p < pts.size(); ++p) {
      double ph = 0.0;
      for (int j = 0; j < dim; ++j) ph += k[j] * pts[p][static_cast<std::size_t>(j)];
      s += f[p] * std::polar(1.0, -2.0 * kPi * ph);
    }
    out.component(0)[i] = s * w;
  }
  (void)M;
  return out;
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace ttn::testing
