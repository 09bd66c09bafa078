#pragma once

// Transport noise: frames a_{k,i} spanning k^perp, weight sequences theta,
// the conjugate-paired complex Brownian driver, and the operator
// sqrt(C_d nu) sum_{k,i} theta_k (sigma_{k,i} . grad u) dW^{k,i}
// with sigma_{k,i}(x) = a_{k,i} e^{2 pi i k.x} and C_d = d/(d-1).

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "ttn/spectral.hpp"

namespace ttn {

class NoiseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vec3 = std::array<double, 3>;

/// k is in S_+ iff its first nonzero component is positive.
bool in_positive_half(const Wavevector& k);

/// Support {k : 0 < max_i|k_i| <= K} split into S_+ and -S_+. Frames are
/// stored for S_+ only; a_{-k,i} = a_{k,i}.
class NoiseBasis {
 public:
  NoiseBasis() = default;
  NoiseBasis(int dim, int K);

  int dim() const { return dim_; }
  int band() const { return band_; }
  /// d - 1 frame vectors per wavevector.
  int frames_per_mode() const { return dim_ - 1; }
  const std::vector<Wavevector>& positive() const { return positive_; }
  std::size_t pair_count() const { return positive_.size() * static_cast<std::size_t>(dim_ - 1); }

  /// Frame vector a_{k,i} for k in S (either half); throws if k is not supported.
  const Vec3& frame(const Wavevector& k, int i) const;
  /// Frame a_{p,i} of the p-th element of S_+.
  const Vec3& frame_at(std::size_t p, int i) const {
    return frames_[p * static_cast<std::size_t>(dim_ - 1) + static_cast<std::size_t>(i)];
  }
  std::size_t positive_index(const Wavevector& k) const;

 private:
  int dim_ = 0;
  int band_ = 0;
  std::vector<Wavevector> positive_;
  std::vector<Vec3> frames_;
};

NoiseBasis build_basis(int dim, int K);

/// Frame of k^perp used by build_basis, exposed for tests.
std::vector<Vec3> frame_for(const Wavevector& k);

/// Symmetric weights theta_k = theta_{-k}, stored against S_+ of a basis.
class ThetaSequence {
 public:
  ThetaSequence() = default;
  ThetaSequence(const NoiseBasis& basis, std::vector<double> positive_weights, std::string family);

  int dim() const { return dim_; }
  int band() const { return band_; }
  const std::string& family() const { return family_; }
  const std::vector<double>& positive_weights() const { return weights_; }
  double at(std::size_t p) const { return weights_[p]; }

  /// sum over all of S (both halves).
  double l2_norm_sq() const;
  double l2_norm() const;
  double linf_norm() const;
  bool is_zero() const;
  /// theta_k == theta_l whenever |k| = |l| (within tol) over the supplied basis.
  bool is_radial(const NoiseBasis& basis, double tol = 0.0) const;

 private:
  int dim_ = 0;
  int band_ = 0;
  std::string family_;
  std::vector<double> weights_;
};

/// theta_k = (#support)^{-1/2} on 0 < max|k_i| <= N, so ||theta||_{l2} = 1.
ThetaSequence theta_shell(const NoiseBasis& basis, int N);
/// theta_k = 1 on 0 < max|k_i| <= N (unnormalized).
ThetaSequence theta_flat(const NoiseBasis& basis, int N);
/// All weights zero (noise off).
ThetaSequence theta_zero(const NoiseBasis& basis);

/// CSV lines "k1,k2[,k3],theta" over the whole support, S_+ then -S_+.
void write_theta_csv(std::ostream& os, const NoiseBasis& basis, const ThetaSequence& theta);

/// sum_{k in S, i} theta_k^2 a_{k,i} (x) a_{k,i}; row-major d x d.
std::vector<double> key_identity_matrix(const NoiseBasis& basis, const ThetaSequence& theta);

/// Brownian increments for (k, i) with k in S_+, index p*(d-1)+i. The value
/// for (-k, i) is the complex conjugate.
struct Increments {
  std::vector<Complex> values;
};

/// Seeded generator of increments dW = xi + i zeta, xi, zeta ~ N(0, dt).
class NoiseDriver {
 public:
  explicit NoiseDriver(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  Increments sample(const NoiseBasis& basis, double dt);
  void sample_into(const NoiseBasis& basis, double dt, Increments& out);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline double noise_constant(int dim) { return static_cast<double>(dim) / (dim - 1); }

/// sqrt(C_d nu) sum_{k,i} theta_k dW^{k,i} Pi_N(sigma_{k,i} . grad u).
SpectralField apply_transport(const SpectralField& u, const NoiseBasis& basis, const ThetaSequence& theta,
                              const Increments& incr, double nu);

/// Same operator evaluated mode by mode (double loop over output modes and
/// noise modes). Slow; kept as a reference for tests.
SpectralField apply_transport_direct(const SpectralField& u, const NoiseBasis& basis,
                                     const ThetaSequence& theta, const Increments& incr, double nu);

}  // namespace ttn
