#include "ttn/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <istream>
#include <ostream>
#include <sstream>

#include "ttn/grid.hpp"

namespace ttn {

long long Wavevector::norm_sq() const {
  long long s = 0;
  for (int i = 0; i < dim; ++i) s += static_cast<long long>(c[i]) * c[i];
  return s;
}

int Wavevector::max_abs() const {
  int m = 0;
  for (int i = 0; i < dim; ++i) m = std::max(m, std::abs(c[i]));
  return m;
}

Wavevector Wavevector::operator-() const {
  Wavevector r = *this;
  for (auto& x : r.c) x = -x;
  return r;
}

Wavevector Wavevector::operator+(const Wavevector& o) const {
  Wavevector r = *this;
  for (int i = 0; i < 3; ++i) r.c[i] += o.c[i];
  return r;
}

Wavevector Wavevector::operator-(const Wavevector& o) const {
  Wavevector r = *this;
  for (int i = 0; i < 3; ++i) r.c[i] -= o.c[i];
  return r;
}

std::string Wavevector::to_string() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim; ++i) os << (i ? "," : "") << c[i];
  os << ')';
  return os.str();
}

// ---------------------------------------------------------------------------

SpectralField::SpectralField(int dim, int cutoff, int components)
    : dim_(dim), cutoff_(cutoff), components_(components) {
  if (dim != 2 && dim != 3) throw FieldError("dimension must be 2 or 3");
  if (cutoff < 0) throw FieldError("cutoff must be nonnegative");
  if (components < 1) throw FieldError("component count must be positive");
  modes_ = 1;
  for (int i = 0; i < dim; ++i) modes_ *= static_cast<std::size_t>(side());
  coeffs_.assign(modes_ * static_cast<std::size_t>(components), Complex(0.0, 0.0));
}

SpectralField SpectralField::constant(int dim, int cutoff, double value) {
  SpectralField u(dim, cutoff, 1);
  u.coeffs_[u.zero_index()] = value;
  return u;
}

SpectralField SpectralField::mode(int dim, int cutoff, const Wavevector& k, Complex amplitude) {
  SpectralField u(dim, cutoff, 1);
  u.at(k) = amplitude;
  return u;
}

SpectralField SpectralField::cosine(int dim, int cutoff, const Wavevector& k, double amplitude) {
  SpectralField u(dim, cutoff, 1);
  u.at(k) += amplitude;
  u.at(-k) += amplitude;
  return u;
}

bool SpectralField::contains(const Wavevector& k) const {
  if (k.dim != dim_) return false;
  return k.max_abs() <= cutoff_;
}

std::size_t SpectralField::index(const Wavevector& k) const {
  if (!contains(k)) throw FieldError("wavevector " + k.to_string() + " outside truncation");
  std::size_t idx = 0;
  const auto s = static_cast<std::size_t>(side());
  for (int i = 0; i < dim_; ++i) idx = idx * s + static_cast<std::size_t>(k[i] + cutoff_);
  return idx;
}

Wavevector SpectralField::wavevector(std::size_t index) const {
  Wavevector k;
  k.dim = dim_;
  const auto s = static_cast<std::size_t>(side());
  for (int i = dim_ - 1; i >= 0; --i) {
    k.c[static_cast<std::size_t>(i)] = static_cast<int>(index % s) - cutoff_;
    index /= s;
  }
  return k;
}

Complex& SpectralField::at(const Wavevector& k, int comp) {
  return component(comp)[index(k)];
}

const Complex& SpectralField::at(const Wavevector& k, int comp) const {
  return component(comp)[index(k)];
}

std::span<Complex> SpectralField::component(int comp) {
  if (comp < 0 || comp >= components_) throw FieldError("component index out of range");
  return std::span<Complex>(coeffs_).subspan(static_cast<std::size_t>(comp) * modes_, modes_);
}

std::span<const Complex> SpectralField::component(int comp) const {
  if (comp < 0 || comp >= components_) throw FieldError("component index out of range");
  return std::span<const Complex>(coeffs_).subspan(static_cast<std::size_t>(comp) * modes_, modes_);
}

bool SpectralField::same_shape(const SpectralField& o) const {
  return dim_ == o.dim_ && cutoff_ == o.cutoff_ && components_ == o.components_;
}

void SpectralField::require_same_shape(const SpectralField& o) const {
  if (!same_shape(o)) throw FieldError("field shape mismatch");
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_same_shape(o);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_same_shape(o);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

SpectralField& SpectralField::add_scaled(const SpectralField& o, double s) {
  require_same_shape(o);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += s * o.coeffs_[i];
  return *this;
}

// ---------------------------------------------------------------------------

const Lattice& lattice(int dim, int cutoff) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<Lattice>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{dim, cutoff}];
  if (!slot) {
    const SpectralField shape(dim, cutoff, 1);
    slot = std::make_unique<Lattice>();
    slot->k.reserve(shape.modes());
    slot->k2.reserve(shape.modes());
    for (std::size_t i = 0; i < shape.modes(); ++i) {
      slot->k.push_back(shape.wavevector(i));
      slot->k2.push_back(static_cast<double>(slot->k.back().norm_sq()));
    }
  }
  return *slot;
}

bool all_finite(const SpectralField& u) {
  return std::all_of(u.data().begin(), u.data().end(),
                     [](const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

double hermitian_defect(const SpectralField& u) {
  double worst = 0.0;
  for (int c = 0; c < u.components(); ++c) {
    const auto coeffs = u.component(c);
    for (std::size_t i = 0; i < u.modes(); ++i) {
      worst = std::max(worst, std::abs(coeffs[u.mirror(i)] - std::conj(coeffs[i])));
    }
  }
  return worst;
}

void symmetrize(SpectralField& u) {
  for (int c = 0; c < u.components(); ++c) {
    auto coeffs = u.component(c);
    for (std::size_t i = 0; i <= u.zero_index(); ++i) {
      const std::size_t j = u.mirror(i);
      const Complex avg = 0.5 * (coeffs[i] + std::conj(coeffs[j]));
      coeffs[i] = avg;
      coeffs[j] = std::conj(avg);
    }
  }
}

double l2_norm_sq(const SpectralField& u) {
  double s = 0.0;
  for (const auto& c : u.data()) s += std::norm(c);
  return s;
}

double l2_norm(const SpectralField& u) { return std::sqrt(l2_norm_sq(u)); }

double sobolev_norm(const SpectralField& u, double s) {
  if (!all_finite(u)) throw FieldError("field corrupted");
  if (s == 0.0) return l2_norm(u);
  return std::sqrt(weighted_norm_sq(u, sobolev_weights(u.dim(), u.cutoff(), s)));
}

std::vector<double> sobolev_weights(int dim, int cutoff, double s) {
  const auto& k2 = lattice(dim, cutoff).k2;
  std::vector<double> w(k2.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(1.0 + kFourPiSq * k2[i], s);
  return w;
}

double weighted_norm_sq(const SpectralField& u, std::span<const double> w) {
  if (w.size() != u.modes()) throw FieldError("weight table size mismatch");
  double acc = 0.0;
  for (int c = 0; c < u.components(); ++c) {
    const auto coeffs = u.component(c);
    for (std::size_t i = 0; i < u.modes(); ++i) acc += w[i] * std::norm(coeffs[i]);
  }
  return acc;
}

double inner_product(const SpectralField& u, const SpectralField& v) {
  if (!u.same_shape(v)) throw FieldError("field shape mismatch");
  double s = 0.0;
  const auto a = u.data();
  const auto b = v.data();
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] * std::conj(b[i])).real();
  return s;
}

double grad_l2_sq(const SpectralField& u) {
  const auto& k2 = lattice(u.dim(), u.cutoff()).k2;
  double acc = 0.0;
  for (int c = 0; c < u.components(); ++c) {
    const auto coeffs = u.component(c);
    for (std::size_t i = 0; i < u.modes(); ++i) acc += k2[i] * std::norm(coeffs[i]);
  }
  return kFourPiSq * acc;
}

double homogeneous_norm(const SpectralField& u, double s) {
  const auto& table = lattice(u.dim(), u.cutoff()).k2;
  double acc = 0.0;
  for (int c = 0; c < u.components(); ++c) {
    const auto coeffs = u.component(c);
    for (std::size_t i = 0; i < u.modes(); ++i) {
      const double k2 = table[i];
      if (k2 == 0.0) continue;
      acc += std::pow(kFourPiSq * k2, s) * std::norm(coeffs[i]);
    }
  }
  return std::sqrt(acc);
}

double mean(const SpectralField& u) {
  if (u.components() != 1) throw FieldError("mean requires a scalar field");
  const Complex c0 = u.component(0)[u.zero_index()];
  if (std::abs(c0.imag()) > 1e-12) throw FieldError("mean of non-real field (Hermitian symmetry violated)");
  return c0.real();
}

// ---------------------------------------------------------------------------

SpectralField apply_fractional_laplacian(const SpectralField& u, double alpha) {
  if (alpha < 1.0) throw FieldError("fractional power must satisfy alpha >= 1");
  return apply_radial_multiplier(u, [alpha](double k2) {
    return k2 == 0.0 ? 0.0 : std::pow(kFourPiSq * k2, alpha);
  });
}

SpectralField gradient(const SpectralField& u) {
  if (u.components() != 1) throw FieldError("gradient requires a scalar field");
  SpectralField g(u.dim(), u.cutoff(), u.dim());
  const auto& ks = lattice(u.dim(), u.cutoff()).k;
  const auto coeffs = u.component(0);
  for (int j = 0; j < u.dim(); ++j) {
    auto out = g.component(j);
    for (std::size_t i = 0; i < u.modes(); ++i) {
      out[i] = Complex(0.0, kTwoPi * ks[i][j]) * coeffs[i];
    }
  }
  return g;
}

SpectralField divergence(const SpectralField& v) {
  if (v.components() != v.dim()) throw FieldError("divergence requires a vector field");
  SpectralField out(v.dim(), v.cutoff(), 1);
  auto o = out.component(0);
  const auto& ks = lattice(v.dim(), v.cutoff()).k;
  for (int j = 0; j < v.dim(); ++j) {
    const auto vj = v.component(j);
    for (std::size_t i = 0; i < v.modes(); ++i) {
      o[i] += Complex(0.0, kTwoPi * ks[i][j]) * vj[i];
    }
  }
  return out;
}

SpectralField inverse_gradient(const SpectralField& f) {
  if (f.components() != 1) throw FieldError("inverse gradient requires a scalar field");
  SpectralField out(f.dim(), f.cutoff(), f.dim());
  const auto coeffs = f.component(0);
  for (std::size_t i = 0; i < f.modes(); ++i) {
    const Wavevector k = f.wavevector(i);
    const double k2 = static_cast<double>(k.norm_sq());
    if (k2 == 0.0) continue;
    for (int j = 0; j < f.dim(); ++j) {
      out.component(j)[i] = Complex(0.0, kTwoPi * k[j] / (kFourPiSq * k2)) * coeffs[i];
    }
  }
  return out;
}

SpectralField project(const SpectralField& u, int M) {
  if (M < 0 || M > u.cutoff()) throw FieldError("projection band outside [0, N]");
  SpectralField out = u;
  for (int c = 0; c < u.components(); ++c) {
    auto coeffs = out.component(c);
    for (std::size_t i = 0; i < u.modes(); ++i) {
      if (u.wavevector(i).max_abs() > M) coeffs[i] = 0.0;
    }
  }
  return out;
}

SpectralField resize(const SpectralField& u, int cutoff) {
  SpectralField out(u.dim(), cutoff, u.components());
  for (int c = 0; c < u.components(); ++c) {
    const auto src = u.component(c);
    for (std::size_t i = 0; i < u.modes(); ++i) {
      const Wavevector k = u.wavevector(i);
      if (out.contains(k)) out.at(k, c) = src[i];
    }
  }
  return out;
}

SpectralField translate(const SpectralField& u, std::span<const double> h) {
  if (static_cast<int>(h.size()) != u.dim()) throw FieldError("shift dimension mismatch");
  SpectralField out = u;
  for (int c = 0; c < u.components(); ++c) {
    auto coeffs = out.component(c);
    for (std::size_t i = 0; i < u.modes(); ++i) {
      const Wavevector k = u.wavevector(i);
      double phase = 0.0;
      for (int j = 0; j < u.dim(); ++j) phase += k[j] * h[static_cast<std::size_t>(j)];
      coeffs[i] *= std::polar(1.0, kTwoPi * phase);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// u = re + i im with re, im real fields.
std::pair<SpectralField, SpectralField> split_real_imag(const SpectralField& u) {
  SpectralField re = u.zeros_like(), im = u.zeros_like();
  const auto c = u.component(0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Complex m = std::conj(c[u.mirror(i)]);
    re.component(0)[i] = 0.5 * (c[i] + m);
    im.component(0)[i] = Complex(0.0, -0.5) * (c[i] - m);
  }
  return {std::move(re), std::move(im)};
}

SpectralField complex_product(const SpectralField& u, const SpectralField& v) {
  const auto [ur, ui] = split_real_imag(u);
  const auto [vr, vi] = split_real_imag(v);
  SpectralField re = dealiased_product(ur, vr) - dealiased_product(ui, vi);
  const SpectralField im = dealiased_product(ur, vi) + dealiased_product(ui, vr);
  for (std::size_t i = 0; i < re.modes(); ++i) re.component(0)[i] += Complex(0.0, 1.0) * im.component(0)[i];
  return re;
}

}  // namespace

SpectralField dealiased_product(const SpectralField& u, const SpectralField& v) {
  if (!u.same_shape(v) || u.components() != 1) {
    throw FieldError("dealiased product requires scalar fields of equal dimension and cutoff");
  }
  if (hermitian_defect(u) > 1e-12 || hermitian_defect(v) > 1e-12) return complex_product(u, v);
  PaddedGrid grid(u.dim(), padded_points(u.cutoff()));
  auto a = grid.to_physical(u);
  const auto b = grid.to_physical(v);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
  return grid.to_spectral(a, u.cutoff());
}

SpectralField dealiased_dot(const SpectralField& a, const SpectralField& b) {
  if (!a.same_shape(b) || a.components() != a.dim()) {
    throw FieldError("dealiased dot requires vector fields of equal dimension and cutoff");
  }
  PaddedGrid grid(a.dim(), padded_points(a.cutoff()));
  std::vector<double> acc(grid.size(), 0.0);
  for (int j = 0; j < a.dim(); ++j) {
    const auto x = grid.to_physical(a, j);
    const auto y = grid.to_physical(b, j);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += x[i] * y[i];
  }
  return grid.to_spectral(acc, a.cutoff());
}

double cubic_integral(const SpectralField& u) {
  if (u.components() != 1) throw FieldError("cubic integral requires a scalar field");
  // u^3 has modes up to 3N; a grid of more than 3N points integrates it exactly.
  PaddedGrid grid(u.dim(), padded_points(u.cutoff()));
  const auto x = grid.to_physical(u);
  double s = 0.0;
  for (double v : x) s += v * v * v;
  return s / static_cast<double>(grid.size());
}

// ---------------------------------------------------------------------------

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot IO assumes a little-endian host");

void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void put_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), 8); }

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), 4)) throw FieldError("truncated snapshot");
  return v;
}

double get_f64(std::istream& is) {
  double v = 0.0;
  if (!is.read(reinterpret_cast<char*>(&v), 8)) throw FieldError("truncated snapshot");
  return v;
}

}  // namespace

void write_snapshot(std::ostream& os, const SpectralField& u) {
  os.write("TTNF", 4);
  put_u32(os, kSnapshotVersion);
  put_u32(os, static_cast<std::uint32_t>(u.dim()));
  put_u32(os, static_cast<std::uint32_t>(u.cutoff()));
  put_u32(os, static_cast<std::uint32_t>(u.components()));
  for (const auto& c : u.data()) {
    put_f64(os, c.real());
    put_f64(os, c.imag());
  }
}

SpectralField read_snapshot(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "TTNF", 4) != 0) throw FieldError("bad snapshot magic");
  const auto version = get_u32(is);
  if (version != kSnapshotVersion) throw FieldError("unsupported snapshot version " + std::to_string(version));
  const auto d = static_cast<int>(get_u32(is));
  const auto n = static_cast<int>(get_u32(is));
  const auto comps = static_cast<int>(get_u32(is));
  SpectralField u(d, n, comps);
  for (auto& c : u.data()) {
    const double re = get_f64(is);
    const double im = get_f64(is);
    c = Complex(re, im);
  }
  return u;
}

void save_snapshot(const std::string& path, const SpectralField& u) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FieldError("cannot open " + path);
  write_snapshot(os, u);
}

SpectralField load_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FieldError("cannot open " + path);
  return read_snapshot(is);
}

}  // namespace ttn
