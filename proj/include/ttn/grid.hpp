#pragma once

// Physical-space evaluation of spectral fields on a uniform M^d grid, backed
// by FFTW real-to-complex transforms. Plans are shared process-wide and the
// transforms are safe to call concurrently.

#include <cstddef>
#include <span>
#include <vector>

#include "ttn/spectral.hpp"

namespace ttn {

/// Smallest M >= minimum whose prime factors are all <= 7.
int smooth_size(int minimum);

/// Smallest M >= (order + 1) * N + 1 whose prime factors are all <= 7.
/// order = 2 gives alias-free quadratic products and exact cubic integrals.
int padded_points(int cutoff, int order = 2);

class PaddedGrid {
 public:
  PaddedGrid(int dim, int points);

  int dim() const { return dim_; }
  int points() const { return points_; }
  std::size_t size() const { return size_; }

  /// u(x_j) at x_j = j / M for one component of a real field. Requires N < M/2.
  std::vector<double> to_physical(const SpectralField& u, int comp = 0) const;
  /// Writes the Fourier coefficients of `values` with max|k_i| <= cutoff of
  /// `out` into component `comp` of `out`.
  void to_spectral(std::span<const double> values, SpectralField& out, int comp = 0) const;
  SpectralField to_spectral(std::span<const double> values, int cutoff) const;

 private:
  int dim_;
  int points_;
  std::size_t size_;
  std::size_t spectral_size_;
  const void* plans_;
};

}  // namespace ttn
