#pragma once

// Time stepping of
//   du = [-(-Delta)^alpha u + nu_eff Delta u + g_R(u) F(u)] dt
//        + sqrt(C_d nu) sum_{k,i} theta_k sigma_{k,i}.grad u dW^{k,i}
// (Ito form; nu_eff = nu ||theta||_{l2}^2, and nu_eff = nu without noise)
// by Lie splitting: explicit Euler-Maruyama for the drift and noise at the
// current state, then the exact linear propagator.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ttn/noise.hpp"
#include "ttn/nonlinearity.hpp"
#include "ttn/spectral.hpp"

namespace ttn {

/// Raised when a hard numerical invariant breaks (not for blow-up).
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  int N = 8;
  double dt = 1e-4;
  double T = 1.0;
  double nu = 0.0;
  std::optional<CutoffSpec> cutoff;
  double delta = 0.1;  // H^{-delta} index of the recorded diagnostic (the cut-off carries its own)
  std::optional<double> blowup_threshold;  // default 1e6 * max(1, ||u0||)
  int record_every = 1;

  void validate() const;
  long long steps() const;
  double threshold_for(const SpectralField& u0) const;
};

/// The noise a stochastic run uses; the driver is owned by the caller and
/// advanced by the run.
struct NoiseSetup {
  const NoiseBasis* basis = nullptr;
  const ThetaSequence* theta = nullptr;
  NoiseDriver* driver = nullptr;
};

struct StepDiagnostics {
  double g = 1.0;              // cut-off value used in the step
  double grad_l2_sq = 0.0;     // ||grad u_n||^2 at the start of the step
  double martingale_sq = 0.0;  // ||Delta M_n||^2 of the noise increment
};

/// Single step with cached linear propagator.
class Stepper {
 public:
  Stepper(const ModelSpec& model, const SolverConfig& cfg, std::optional<NoiseSetup> noise = std::nullopt);

  double effective_viscosity() const { return nu_eff_; }
  /// Evolved field after one step of size cfg.dt. Non-finite output is
  /// returned as is; the caller decides.
  SpectralField step(const SpectralField& u, StepDiagnostics* diag = nullptr);

 private:
  ModelSpec model_;
  SolverConfig cfg_;
  std::optional<NoiseSetup> noise_;
  bool noise_active_ = false;
  double nu_eff_ = 0.0;
  std::vector<double> propagator_;
  std::vector<double> cutoff_weights_;
  Increments incr_;
};

SpectralField step_deterministic(const SpectralField& u, const ModelSpec& model, const SolverConfig& cfg);
SpectralField step_stochastic(const SpectralField& u, const ModelSpec& model, const SolverConfig& cfg,
                              const NoiseBasis& basis, const ThetaSequence& theta, NoiseDriver& driver,
                              StepDiagnostics* diag = nullptr);

struct TrajectoryRow {
  double t = 0.0;
  double l2 = 0.0;
  double h_minus_delta = 0.0;
  double grad_l2_sq = 0.0;
  double mean = 0.0;
  double g = 1.0;
  double bracket_pred = 0.0;
  double bracket_real = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryRow> rows;
  bool blew_up = false;
  std::optional<double> tau;
  double threshold = 0.0;
  double delta = 0.1;       // H^{-delta} index used for the h_minus_delta column
  double nu_eff = 0.0;
  long long steps_taken = 0;
  double max_l2_sq = 0.0;          // sup_t ||u||^2 over all steps
  double dissipation = 0.0;        // sum ||(-Delta)^{alpha/2} u_n||^2 dt
  std::vector<std::string> warnings;
  SpectralField final_field;
};

/// Called with (t, u) at every recorded time, including t = 0 and the last step.
using Observer = std::function<void(double, const SpectralField&)>;

/// Steps from u0 until t >= T or blow-up (any non-finite coefficient or
/// ||u|| > threshold, checked after every step).
Trajectory run(const SpectralField& u0, const ModelSpec& model, const SolverConfig& cfg,
               std::optional<NoiseSetup> noise = std::nullopt, const Observer& observer = {});

/// Heuristic noise step limit 1 / (nu (2 pi N)^2 C_d ||theta||_inf^2 d).
double noise_step_limit(const SolverConfig& cfg, const ThetaSequence& theta);

}  // namespace ttn
