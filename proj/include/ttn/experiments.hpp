#pragma once

// Seeded Monte Carlo studies: scaling limit, delayed blow-up, relaxation
// enhancement and the triviality regime. Path p of every row uses seed
// base_seed + p, and the worker count never changes results.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ttn/integrator.hpp"

namespace ttn {

class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Initial data recipes:
///   "constant c"
///   "constant_plus_mode c, k1 k2[ k3], a"   -> c + a (e_k + e_{-k})
///   "random_trig seed, amplitude, band"    -> zero-mean random trigonometric
///                                             polynomial on 0 < max|k_i| <= band
struct InitialRecipe {
  enum class Kind { Constant, ConstantPlusMode, RandomTrig };
  Kind kind = Kind::Constant;
  double c = 0.0;
  Wavevector k;
  double a = 0.0;
  std::uint64_t seed = 0;
  double amplitude = 1.0;
  int band = 1;

  std::string to_string() const;
};

InitialRecipe parse_recipe(const std::string& text, int dim);
SpectralField build_initial(const InitialRecipe& recipe, int dim, int N);
/// c_k = amplitude (xi + i zeta) / sqrt(2), xi, zeta ~ N(0,1), for k in S_+
/// with max|k_i| <= band, mirrored to -k.
SpectralField random_trig(int dim, int N, std::uint64_t seed, double amplitude, int band);

enum class ThetaFamily { Shell, Flat };
ThetaFamily parse_theta_family(const std::string& name);
std::string to_string(ThetaFamily family);

struct StudyPlan {
  ModelSpec model;
  SolverConfig solver;
  InitialRecipe initial;
  ThetaFamily theta_family = ThetaFamily::Shell;
  std::vector<int> theta_N;     // one table row (per nu) for each entry
  int noise_band = 0;           // 0: max of theta_N
  std::vector<double> nu_grid;  // delayed blow-up and relaxation; others use solver.nu
  int paths = 1;
  std::uint64_t base_seed = 0;
  int threads = 1;              // wall time only
  double tau = 0.1;             // relaxation horizon
  double target = 0.1;          // relaxation distance target
  std::vector<Wavevector> monitored;  // triviality modes; default unit vectors

  int resolved_band() const;
  void validate() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
/// Wilson score interval at z = 1.96.
Interval wilson_interval(long long successes, long long n, double z = 1.96);

/// Mean and standard error (sample sd / sqrt(n)); se = 0 when n < 2.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
MeanSe mean_se(const std::vector<double>& v);

/// Row-major numeric table.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  double at(std::size_t row, const std::string& column) const;
};

/// Runs f(i) for i in [0, n) on `threads` workers; rethrows the first failure
/// by index.
void parallel_for(int n, int threads, const std::function<void(int)>& f);

/// sqrt(int_0^T ||u - v||^2 dt) by the trapezoid rule over matching record times.
double l2l2_distance(const std::vector<double>& t, const std::vector<double>& sq_dist);

/// N, theta_linf, distance_mean, distance_se, paths.
Table scaling_limit_study(const StudyPlan& plan);
/// nu, N, paths, survived, fraction, wilson_lo, wilson_hi, mean_tau_blown,
/// baseline_tau (NaN columns when undefined).
Table delayed_blowup_mc(const StudyPlan& plan);
/// nu, N, paths, successes, probability, wilson_lo, wilson_hi, benchmark.
Table relaxation_enhancing_study(const StudyPlan& plan);
/// N, theta_l2_sq, lambda_N, then per monitored mode j: mode_j_mean,
/// mode_j_se, and finally decay_mean, decay_se (the average over modes).
Table triviality_study(const StudyPlan& plan);

}  // namespace ttn
