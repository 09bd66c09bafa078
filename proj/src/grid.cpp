#include "ttn/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace ttn {

namespace {

struct Plans {
  fftw_plan to_physical = nullptr;  // complex (half spectrum) -> real
  fftw_plan to_spectral = nullptr;  // real -> complex (half spectrum)
};

// The FFTW planner is not thread-safe; execution with the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

const Plans& plans_for(int dim, int points) {
  static std::map<std::pair<int, int>, std::unique_ptr<Plans>> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto& slot = cache[{dim, points}];
  if (!slot) {
    std::vector<int> n(static_cast<std::size_t>(dim), points);
    std::size_t real_size = 1;
    for (int i = 0; i < dim; ++i) real_size *= static_cast<std::size_t>(points);
    const std::size_t cplx_size = real_size / static_cast<std::size_t>(points) *
                                  static_cast<std::size_t>(points / 2 + 1);
    double* r = fftw_alloc_real(real_size);
    fftw_complex* c = fftw_alloc_complex(cplx_size);
    slot = std::make_unique<Plans>();
    slot->to_physical = fftw_plan_dft_c2r(dim, n.data(), c, r, FFTW_ESTIMATE);
    slot->to_spectral = fftw_plan_dft_r2c(dim, n.data(), r, c, FFTW_ESTIMATE);
    fftw_free(r);
    fftw_free(c);
  }
  return *slot;
}

// Per-thread aligned scratch; every buffer comes from fftw_malloc so its
// alignment matches the planning arrays.
struct Scratch {
  struct Free {
    void operator()(void* p) const { fftw_free(p); }
  };
  std::unique_ptr<double, Free> real;
  std::unique_ptr<fftw_complex, Free> cplx;
  std::size_t real_cap = 0;
  std::size_t cplx_cap = 0;

  double* real_buffer(std::size_t n) {
    if (n > real_cap) {
      real.reset(fftw_alloc_real(n));
      real_cap = n;
    }
    return real.get();
  }
  fftw_complex* cplx_buffer(std::size_t n) {
    if (n > cplx_cap) {
      cplx.reset(fftw_alloc_complex(n));
      cplx_cap = n;
    }
    return cplx.get();
  }
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

bool smooth(int m) {
  for (int p : {2, 3, 5, 7}) {
    while (m % p == 0) m /= p;
  }
  return m == 1;
}

int wrap(int k, int m) { return k < 0 ? k + m : k; }

}  // namespace

int smooth_size(int minimum) {
  int m = std::max(minimum, 2);
  while (!smooth(m)) ++m;
  return m;
}

int padded_points(int cutoff, int order) { return smooth_size((order + 1) * cutoff + 1); }

PaddedGrid::PaddedGrid(int dim, int points) : dim_(dim), points_(points) {
  if (dim != 2 && dim != 3) throw FieldError("grid dimension must be 2 or 3");
  if (points < 2) throw FieldError("grid needs at least 2 points per axis");
  size_ = 1;
  for (int i = 0; i < dim; ++i) size_ *= static_cast<std::size_t>(points);
  spectral_size_ = size_ / static_cast<std::size_t>(points) * static_cast<std::size_t>(points / 2 + 1);
  plans_ = &plans_for(dim, points);
}

std::vector<double> PaddedGrid::to_physical(const SpectralField& u, int comp) const {
  if (u.dim() != dim_) throw FieldError("grid/field dimension mismatch");
  if (2 * u.cutoff() >= points_) throw FieldError("grid too coarse for field cutoff");
  const auto& plans = *static_cast<const Plans*>(plans_);
  auto& s = scratch();
  fftw_complex* hat = s.cplx_buffer(spectral_size_);
  double* phys = s.real_buffer(size_);
  std::fill_n(reinterpret_cast<double*>(hat), 2 * spectral_size_, 0.0);

  const auto coeffs = u.component(comp);
  const auto& ks = lattice(u.dim(), u.cutoff()).k;
  const int half = points_ / 2 + 1;
  for (std::size_t i = 0; i < u.modes(); ++i) {
    const Wavevector& k = ks[i];
    const int last = k[dim_ - 1];
    if (last < 0) continue;
    std::size_t idx;
    if (dim_ == 2) {
      idx = static_cast<std::size_t>(wrap(k[0], points_)) * half + static_cast<std::size_t>(last);
    } else {
      idx = (static_cast<std::size_t>(wrap(k[0], points_)) * points_ +
             static_cast<std::size_t>(wrap(k[1], points_))) * half + static_cast<std::size_t>(last);
    }
    hat[idx][0] = coeffs[i].real();
    hat[idx][1] = coeffs[i].imag();
  }
  fftw_execute_dft_c2r(plans.to_physical, hat, phys);
  return std::vector<double>(phys, phys + size_);
}

void PaddedGrid::to_spectral(std::span<const double> values, SpectralField& out, int comp) const {
  if (values.size() != size_) throw FieldError("grid value count mismatch");
  if (out.dim() != dim_) throw FieldError("grid/field dimension mismatch");
  if (2 * out.cutoff() >= points_) throw FieldError("grid too coarse for field cutoff");
  const auto& plans = *static_cast<const Plans*>(plans_);
  auto& s = scratch();
  fftw_complex* hat = s.cplx_buffer(spectral_size_);
  double* phys = s.real_buffer(size_);
  std::copy(values.begin(), values.end(), phys);
  fftw_execute_dft_r2c(plans.to_spectral, phys, hat);

  const double scale = 1.0 / static_cast<double>(size_);
  const int half = points_ / 2 + 1;
  auto coeffs = out.component(comp);
  const auto& ks = lattice(out.dim(), out.cutoff()).k;
  for (std::size_t i = 0; i < out.modes(); ++i) {
    Wavevector k = ks[i];
    bool conj = false;
    if (k[dim_ - 1] < 0) {
      k = -k;
      conj = true;
    }
    std::size_t idx;
    if (dim_ == 2) {
      idx = static_cast<std::size_t>(wrap(k[0], points_)) * half + static_cast<std::size_t>(k[1]);
    } else {
      idx = (static_cast<std::size_t>(wrap(k[0], points_)) * points_ +
             static_cast<std::size_t>(wrap(k[1], points_))) * half + static_cast<std::size_t>(k[2]);
    }
    const Complex c(hat[idx][0] * scale, hat[idx][1] * scale);
    coeffs[i] = conj ? std::conj(c) : c;
  }
}

SpectralField PaddedGrid::to_spectral(std::span<const double> values, int cutoff) const {
  SpectralField out(dim_, cutoff, 1);
  to_spectral(values, out, 0);
  return out;
}

}  // namespace ttn
