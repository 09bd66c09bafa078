#include "ttn/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "ttn/grid.hpp"

namespace ttn {

bool in_positive_half(const Wavevector& k) {
  for (int i = 0; i < k.dim; ++i) {
    if (k[i] != 0) return k[i] > 0;
  }
  return false;
}

namespace {

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm3(const Vec3& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }

Vec3 scaled(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

}  // namespace

std::vector<Vec3> frame_for(const Wavevector& k) {
  if (k.is_zero()) throw NoiseError("zero wavevector has no frame");
  const double kn = std::sqrt(static_cast<double>(k.norm_sq()));
  if (k.dim == 2) {
    return {Vec3{-k[1] / kn, k[0] / kn, 0.0}};
  }
  int best = 0;
  for (int j = 1; j < 3; ++j) {
    if (std::abs(k[j]) < std::abs(k[best])) best = j;
  }
  Vec3 e{0.0, 0.0, 0.0};
  e[static_cast<std::size_t>(best)] = 1.0;
  const Vec3 kv{static_cast<double>(k[0]), static_cast<double>(k[1]), static_cast<double>(k[2])};
  Vec3 a1 = cross(kv, e);
  a1 = scaled(a1, 1.0 / norm3(a1));
  const Vec3 a2 = cross(scaled(kv, 1.0 / kn), a1);
  return {a1, a2};
}

NoiseBasis::NoiseBasis(int dim, int K) : dim_(dim), band_(K) {
  if (dim != 2 && dim != 3) throw NoiseError("noise dimension must be 2 or 3");
  if (K < 1) throw NoiseError("noise band must be at least 1");
  // Enumerate the cube in the same order as SpectralField storage.
  const SpectralField lattice(dim, K, 1);
  for (std::size_t idx = 0; idx < lattice.modes(); ++idx) {
    const Wavevector k = lattice.wavevector(idx);
    if (!in_positive_half(k)) continue;
    positive_.push_back(k);
    for (const auto& a : frame_for(k)) frames_.push_back(a);
  }
}

NoiseBasis build_basis(int dim, int K) { return NoiseBasis(dim, K); }

std::size_t NoiseBasis::positive_index(const Wavevector& k) const {
  const auto it = std::lower_bound(positive_.begin(), positive_.end(), k);
  if (it == positive_.end() || !(*it == k)) throw NoiseError("wavevector " + k.to_string() + " not in S_+");
  return static_cast<std::size_t>(it - positive_.begin());
}

const Vec3& NoiseBasis::frame(const Wavevector& k, int i) const {
  if (k.dim != dim_ || k.is_zero() || k.max_abs() > band_) {
    throw NoiseError("wavevector " + k.to_string() + " outside noise support");
  }
  if (i < 0 || i >= dim_ - 1) throw NoiseError("frame index out of range");
  const Wavevector kp = in_positive_half(k) ? k : -k;
  return frame_at(positive_index(kp), i);
}

// ---------------------------------------------------------------------------

ThetaSequence::ThetaSequence(const NoiseBasis& basis, std::vector<double> positive_weights, std::string family)
    : dim_(basis.dim()), band_(basis.band()), family_(std::move(family)), weights_(std::move(positive_weights)) {
  if (weights_.size() != basis.positive().size()) throw NoiseError("theta size does not match basis");
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) throw NoiseError("theta weights must be finite and nonnegative");
  }
}

double ThetaSequence::l2_norm_sq() const {
  double s = 0.0;
  for (double w : weights_) s += w * w;
  return 2.0 * s;
}

double ThetaSequence::l2_norm() const { return std::sqrt(l2_norm_sq()); }

double ThetaSequence::linf_norm() const {
  double m = 0.0;
  for (double w : weights_) m = std::max(m, w);
  return m;
}

bool ThetaSequence::is_zero() const {
  return std::all_of(weights_.begin(), weights_.end(), [](double w) { return w == 0.0; });
}

bool ThetaSequence::is_radial(const NoiseBasis& basis, double tol) const {
  std::map<long long, double> seen;
  for (std::size_t p = 0; p < weights_.size(); ++p) {
    const auto r2 = basis.positive()[p].norm_sq();
    const auto [it, fresh] = seen.emplace(r2, weights_[p]);
    if (!fresh && std::abs(it->second - weights_[p]) > tol) return false;
  }
  return true;
}

namespace {

ThetaSequence band_indicator(const NoiseBasis& basis, int N, double value, const std::string& family) {
  if (N < 1) throw NoiseError("theta band is empty");
  if (N > basis.band()) throw NoiseError("theta band exceeds noise basis band");
  std::vector<double> w(basis.positive().size(), 0.0);
  for (std::size_t p = 0; p < w.size(); ++p) {
    if (basis.positive()[p].max_abs() <= N) w[p] = value;
  }
  return ThetaSequence(basis, std::move(w), family);
}

}  // namespace

ThetaSequence theta_shell(const NoiseBasis& basis, int N) {
  long long count = 1;
  for (int i = 0; i < basis.dim(); ++i) count *= 2 * N + 1;
  count -= 1;
  return band_indicator(basis, N, 1.0 / std::sqrt(static_cast<double>(count)), "shell");
}

ThetaSequence theta_flat(const NoiseBasis& basis, int N) { return band_indicator(basis, N, 1.0, "flat"); }

ThetaSequence theta_zero(const NoiseBasis& basis) {
  return ThetaSequence(basis, std::vector<double>(basis.positive().size(), 0.0), "zero");
}

void write_theta_csv(std::ostream& os, const NoiseBasis& basis, const ThetaSequence& theta) {
  char buf[64];
  for (int sign : {1, -1}) {
    for (std::size_t p = 0; p < basis.positive().size(); ++p) {
      const Wavevector k = sign > 0 ? basis.positive()[p] : -basis.positive()[p];
      for (int i = 0; i < basis.dim(); ++i) os << k[i] << ',';
      std::snprintf(buf, sizeof buf, "%.17g", theta.at(p));
      os << buf << '\n';
    }
  }
}

std::vector<double> key_identity_matrix(const NoiseBasis& basis, const ThetaSequence& theta) {
  if (theta.dim() != basis.dim() || theta.positive_weights().size() != basis.positive().size()) {
    throw NoiseError("theta support does not match basis");
  }
  const int d = basis.dim();
  std::vector<double> m(static_cast<std::size_t>(d * d), 0.0);
  for (std::size_t p = 0; p < basis.positive().size(); ++p) {
    const double w = 2.0 * theta.at(p) * theta.at(p);  // k and -k share the frame
    if (w == 0.0) continue;
    for (int i = 0; i < d - 1; ++i) {
      const Vec3& a = basis.frame_at(p, i);
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) m[static_cast<std::size_t>(r * d + c)] += w * a[r] * a[c];
      }
    }
  }
  return m;
}

// ---------------------------------------------------------------------------

void NoiseDriver::sample_into(const NoiseBasis& basis, double dt, Increments& out) {
  if (!(dt > 0.0)) throw NoiseError("increment time step must be positive");
  const double s = std::sqrt(dt);
  out.values.resize(basis.pair_count());
  for (auto& v : out.values) {
    const double xi = normal_(engine_);
    const double zeta = normal_(engine_);
    v = Complex(s * xi, s * zeta);
  }
}

Increments NoiseDriver::sample(const NoiseBasis& basis, double dt) {
  Increments inc;
  sample_into(basis, dt, inc);
  return inc;
}

// ---------------------------------------------------------------------------

namespace {

void check_inputs(const SpectralField& u, const NoiseBasis& basis, const ThetaSequence& theta,
                  const Increments& incr) {
  if (u.components() != 1) throw NoiseError("transport acts on scalar fields");
  if (u.dim() != basis.dim()) throw NoiseError("field/noise dimension mismatch");
  if (theta.dim() != basis.dim() || theta.band() != basis.band() ||
      theta.positive_weights().size() != basis.positive().size()) {
    throw NoiseError("theta support does not match basis");
  }
  if (incr.values.size() != basis.pair_count()) throw NoiseError("increment count does not match basis");
}

}  // namespace

SpectralField apply_transport(const SpectralField& u, const NoiseBasis& basis, const ThetaSequence& theta,
                              const Increments& incr, double nu) {
  check_inputs(u, basis, theta, incr);
  const int d = u.dim();
  const int N = u.cutoff();
  const int K = basis.band();
  const double amp = std::sqrt(noise_constant(d) * nu);

  // Velocity V = amp sum theta_k dW^{k,i} a_{k,i} e_k as a band-K vector field.
  SpectralField V(d, K, d);
  const int per = d - 1;
  for (std::size_t p = 0; p < basis.positive().size(); ++p) {
    const double w = theta.at(p);
    if (w == 0.0) continue;
    const Wavevector& k = basis.positive()[p];
    const std::size_t ip = V.index(k);
    const std::size_t im = V.mirror(ip);
    for (int i = 0; i < per; ++i) {
      const Complex dw = amp * w * incr.values[p * static_cast<std::size_t>(per) + static_cast<std::size_t>(i)];
      const Vec3& a = basis.frame_at(p, i);
      for (int j = 0; j < d; ++j) {
        V.component(j)[ip] += a[j] * dw;
        V.component(j)[im] += a[j] * std::conj(dw);
      }
    }
  }

  // V . grad u has band N + K; M > 2N + K keeps every retained mode alias-free.
  PaddedGrid grid(d, smooth_size(std::max(2 * N + K + 1, 2 * K + 1)));
  const SpectralField g = gradient(u);
  std::vector<double> acc(grid.size(), 0.0);
  for (int j = 0; j < d; ++j) {
    const auto vj = grid.to_physical(V, j);
    const auto gj = grid.to_physical(g, j);
    for (std::size_t x = 0; x < acc.size(); ++x) acc[x] += vj[x] * gj[x];
  }
  SpectralField out = grid.to_spectral(acc, N);
  symmetrize(out);
  out.component(0)[out.zero_index()] = 0.0;  // a_{k,i}.k = 0, so the mean is untouched
  return out;
}

SpectralField apply_transport_direct(const SpectralField& u, const NoiseBasis& basis,
                                     const ThetaSequence& theta, const Increments& incr, double nu) {
  check_inputs(u, basis, theta, incr);
  const int d = u.dim();
  const double amp = std::sqrt(noise_constant(d) * nu);
  SpectralField out = u.zeros_like();
  const auto c = u.component(0);
  auto o = out.component(0);
  for (std::size_t p = 0; p < basis.positive().size(); ++p) {
    const double w = theta.at(p);
    if (w == 0.0) continue;
    for (int sign : {1, -1}) {
      const Wavevector k = sign > 0 ? basis.positive()[p] : -basis.positive()[p];
      for (int i = 0; i < d - 1; ++i) {
        Complex dw = amp * w * incr.values[p * static_cast<std::size_t>(d - 1) + static_cast<std::size_t>(i)];
        if (sign < 0) dw = std::conj(dw);
        const Vec3& a = basis.frame_at(p, i);
        for (std::size_t idx = 0; idx < u.modes(); ++idx) {
          const Wavevector j = u.wavevector(idx);  // source mode; lands at j + k
          const Wavevector m = j + k;
          if (!out.contains(m)) continue;
          double adot = 0.0;
          for (int r = 0; r < d; ++r) adot += a[r] * j[r];
          o[out.index(m)] += dw * Complex(0.0, kTwoPi * adot) * c[idx];
        }
      }
    }
  }
  return out;
}

}  // namespace ttn
