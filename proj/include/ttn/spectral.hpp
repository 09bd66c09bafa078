#pragma once

// Truncated Fourier representation of real periodic fields on the unit torus
// T^d = R^d / Z^d, with basis e_k(x) = exp(2 pi i k.x) and the cube truncation
// max_i |k_i| <= N.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttn {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kFourPiSq = 4.0 * kPi * kPi;

class FieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integer lattice frequency k in Z^d, d in {2,3}. Unused trailing slots are 0.
struct Wavevector {
  std::array<int, 3> c{0, 0, 0};
  int dim = 2;

  Wavevector() = default;
  Wavevector(int k1, int k2) : c{k1, k2, 0}, dim(2) {}
  Wavevector(int k1, int k2, int k3) : c{k1, k2, k3}, dim(3) {}

  int operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  long long norm_sq() const;
  int max_abs() const;
  bool is_zero() const { return c[0] == 0 && c[1] == 0 && c[2] == 0; }

  Wavevector operator-() const;
  Wavevector operator+(const Wavevector& o) const;
  Wavevector operator-(const Wavevector& o) const;
  bool operator==(const Wavevector& o) const = default;
  bool operator<(const Wavevector& o) const { return c < o.c; }

  std::string to_string() const;
};

/// Coefficients c_k for every k in the cube max_i|k_i| <= N, for each of
/// `components` scalar components (1 for scalars, d for vector fields).
/// Storage is component-major, then row-major over the lattice with k_1
/// slowest.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(int dim, int cutoff, int components = 1);

  static SpectralField constant(int dim, int cutoff, double value);
  /// amplitude * e_k (complex-valued unless paired with its conjugate mode).
  static SpectralField mode(int dim, int cutoff, const Wavevector& k, Complex amplitude = 1.0);
  /// amplitude * (e_k + e_{-k}) = 2 amplitude cos(2 pi k.x).
  static SpectralField cosine(int dim, int cutoff, const Wavevector& k, double amplitude = 1.0);

  int dim() const { return dim_; }
  int cutoff() const { return cutoff_; }
  int components() const { return components_; }
  int side() const { return 2 * cutoff_ + 1; }
  std::size_t modes() const { return modes_; }
  bool empty() const { return modes_ == 0; }

  bool contains(const Wavevector& k) const;
  std::size_t index(const Wavevector& k) const;
  Wavevector wavevector(std::size_t index) const;
  /// Position of -k for the mode stored at `index`.
  std::size_t mirror(std::size_t index) const { return modes_ - 1 - index; }
  std::size_t zero_index() const { return modes_ / 2; }

  Complex& at(const Wavevector& k, int comp = 0);
  const Complex& at(const Wavevector& k, int comp = 0) const;

  std::span<Complex> component(int comp);
  std::span<const Complex> component(int comp) const;
  std::span<Complex> data() { return coeffs_; }
  std::span<const Complex> data() const { return coeffs_; }

  /// Same shape, all coefficients zero.
  SpectralField zeros_like() const { return SpectralField(dim_, cutoff_, components_); }
  bool same_shape(const SpectralField& o) const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
  /// this += s * o
  SpectralField& add_scaled(const SpectralField& o, double s);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  bool operator==(const SpectralField& o) const = default;

 private:
  void require_same_shape(const SpectralField& o) const;

  int dim_ = 0;
  int cutoff_ = 0;
  int components_ = 0;
  std::size_t modes_ = 0;
  std::vector<Complex> coeffs_;
};

/// Wavevectors and |k|^2 of the cube lattice in storage order, cached per
/// (d, N) for the lifetime of the process.
struct Lattice {
  std::vector<Wavevector> k;
  std::vector<double> k2;
};
const Lattice& lattice(int dim, int cutoff);

// ---------------------------------------------------------------------------
// Diagnostics and norms

bool all_finite(const SpectralField& u);
/// max_k |c_{-k} - conj(c_k)| over all components.
double hermitian_defect(const SpectralField& u);
/// Replaces c_k by (c_k + conj(c_{-k}))/2 so the field is exactly real.
void symmetrize(SpectralField& u);

double l2_norm_sq(const SpectralField& u);
double l2_norm(const SpectralField& u);
/// (sum_k (1 + 4 pi^2 |k|^2)^s |c_k|^2)^{1/2}; throws FieldError("field corrupted")
/// on non-finite coefficients.
double sobolev_norm(const SpectralField& u, double s);
/// Real L^2 inner product Re sum_k c_k conj(d_k), summed over components.
double inner_product(const SpectralField& u, const SpectralField& v);
/// ||grad u||_{L^2}^2 = sum_k 4 pi^2 |k|^2 |c_k|^2.
double grad_l2_sq(const SpectralField& u);
/// ||(-Delta)^{s/2} u||_{L^2}.
double homogeneous_norm(const SpectralField& u, double s);
/// Per-mode weights (1 + 4 pi^2 |k|^2)^s, for repeated norm evaluation.
std::vector<double> sobolev_weights(int dim, int cutoff, double s);
/// sum_k w_k |c_k|^2 over all components, w indexed by lattice position.
double weighted_norm_sq(const SpectralField& u, std::span<const double> w);

/// k=0 coefficient of a real scalar field; throws if its imaginary part
/// exceeds 1e-12 in magnitude.
double mean(const SpectralField& u);

// ---------------------------------------------------------------------------
// Linear spectral operators

/// (-Delta)^alpha u, multiplier (4 pi^2 |k|^2)^alpha, alpha >= 1.
SpectralField apply_fractional_laplacian(const SpectralField& u, double alpha);
/// Multiply mode k by symbol(|k|^2).
template <class Fn>
SpectralField apply_radial_multiplier(const SpectralField& u, Fn&& symbol) {
  SpectralField out = u;
  const auto& k2 = lattice(u.dim(), u.cutoff()).k2;
  for (int c = 0; c < u.components(); ++c) {
    auto coeffs = out.component(c);
    for (std::size_t i = 0; i < u.modes(); ++i) coeffs[i] *= symbol(k2[i]);
  }
  return out;
}
/// Scalar -> vector field with components d_j u.
SpectralField gradient(const SpectralField& u);
/// Vector -> scalar field sum_j d_j v_j.
SpectralField divergence(const SpectralField& v);
/// grad (-Delta)^{-1} (f - mean f); coefficient 2 pi i k / (4 pi^2 |k|^2) c_k.
SpectralField inverse_gradient(const SpectralField& f);
/// Zero all modes with max_i |k_i| > M; the result keeps the cutoff of u.
SpectralField project(const SpectralField& u, int M);
/// Copy into a field with a different cutoff (truncating or zero-padding).
SpectralField resize(const SpectralField& u, int cutoff);
/// u(x + h): mode k multiplied by exp(2 pi i k.h).
SpectralField translate(const SpectralField& u, std::span<const double> h);

// ---------------------------------------------------------------------------
// Products (alias-free, evaluated on a zero-padded grid)

/// Projection onto |k_i| <= N of the pointwise product of two scalar fields
/// of equal shape. Complex-valued inputs take a slower path of four real
/// products.
SpectralField dealiased_product(const SpectralField& u, const SpectralField& v);
/// Projection of sum_j a_j b_j for two real vector fields of equal shape.
SpectralField dealiased_dot(const SpectralField& a, const SpectralField& b);
/// Exact integral of u^3 over the torus for a real scalar field.
double cubic_integral(const SpectralField& u);

// ---------------------------------------------------------------------------
// Binary snapshots: "TTNF", u32 version, u32 d, u32 N, u32 components,
// then (re, im) float64 pairs, all little-endian.

inline constexpr std::uint32_t kSnapshotVersion = 1;

void write_snapshot(std::ostream& os, const SpectralField& u);
SpectralField read_snapshot(std::istream& is);
void save_snapshot(const std::string& path, const SpectralField& u);
SpectralField load_snapshot(const std::string& path);

}  // namespace ttn
