#include "ttn/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace ttn {

void SolverConfig::validate() const {
  if (N < 2) throw ModelError("solver cutoff N must be at least 2");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ModelError("time step dt must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw ModelError("horizon T must be positive");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw ModelError("viscosity nu must be nonnegative");
  if (record_every < 1) throw ModelError("record_every must be at least 1");
  if (cutoff) cutoff->validate();
  if (!(delta > 0.0 && delta <= 1.0)) throw ModelError("delta must lie in (0, 1]");
  if (blowup_threshold && !(*blowup_threshold > 0.0)) throw ModelError("blow-up threshold must be positive");
}

long long SolverConfig::steps() const {
  return static_cast<long long>(std::ceil(T / dt - 1e-9));
}

double SolverConfig::threshold_for(const SpectralField& u0) const {
  return blowup_threshold.value_or(1e6 * std::max(1.0, l2_norm(u0)));
}

double noise_step_limit(const SolverConfig& cfg, const ThetaSequence& theta) {
  const double th = theta.linf_norm();
  if (cfg.nu == 0.0 || th == 0.0) return std::numeric_limits<double>::infinity();
  const int d = theta.dim();
  const double k = kTwoPi * cfg.N;
  return 1.0 / (cfg.nu * k * k * noise_constant(d) * th * th * d);
}

// ---------------------------------------------------------------------------

Stepper::Stepper(const ModelSpec& model, const SolverConfig& cfg, std::optional<NoiseSetup> noise)
    : model_(model), cfg_(cfg), noise_(noise) {
  model_.validate();
  cfg_.validate();
  nu_eff_ = cfg_.nu;
  if (noise_) {
    if (!noise_->basis || !noise_->theta || !noise_->driver) throw ModelError("incomplete noise setup");
    if (noise_->basis->dim() != model_.dim) throw ModelError("noise/model dimension mismatch");
    nu_eff_ = cfg_.nu * noise_->theta->l2_norm_sq();
    // With theta = 0 or nu = 0 the transport term vanishes; increments are
    // still drawn so the driver stream does not depend on the weights.
    noise_active_ = cfg_.nu > 0.0 && !noise_->theta->is_zero();
  }
  const auto& k2s = lattice(model_.dim, cfg_.N).k2;
  propagator_.resize(k2s.size());
  for (std::size_t i = 0; i < k2s.size(); ++i) {
    const double k2 = k2s[i];
    const double rate = (k2 == 0.0 ? 0.0 : std::pow(kFourPiSq * k2, model_.alpha)) + kFourPiSq * nu_eff_ * k2;
    propagator_[i] = std::exp(-rate * cfg_.dt);
  }
  if (cfg_.cutoff) cutoff_weights_ = sobolev_weights(model_.dim, cfg_.N, -cfg_.cutoff->delta);
}

SpectralField Stepper::step(const SpectralField& u, StepDiagnostics* diag) {
  if (u.dim() != model_.dim || u.cutoff() != cfg_.N || u.components() != 1) {
    throw ModelError("field shape does not match solver configuration");
  }
  const double g = cfg_.cutoff ? cutoff_ramp(cfg_.cutoff->R, std::sqrt(weighted_norm_sq(u, cutoff_weights_))) : 1.0;
  SpectralField next = u;
  if (g > 0.0) next.add_scaled(evaluate_F(model_, u), cfg_.dt * g);

  double mart = 0.0;
  if (noise_) {
    noise_->driver->sample_into(*noise_->basis, cfg_.dt, incr_);
    if (noise_active_) {
      const SpectralField dM = apply_transport(u, *noise_->basis, *noise_->theta, incr_, cfg_.nu);
      mart = l2_norm_sq(dM);
      next += dM;
    }
  }

  auto c = next.component(0);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= propagator_[i];
  symmetrize(next);

  if (model_.kind == ModelKind::KellerSegel && all_finite(next)) {
    Complex& c0 = c[next.zero_index()];
    if (std::abs(c0) >= kZeroMeanTolerance) {
      throw InvariantViolation("Keller-Segel mean drifted to " + std::to_string(std::abs(c0)));
    }
    c0 = 0.0;
  }

  if (diag) {
    diag->g = g;
    diag->grad_l2_sq = grad_l2_sq(u);
    diag->martingale_sq = mart;
  }
  return next;
}

SpectralField step_deterministic(const SpectralField& u, const ModelSpec& model, const SolverConfig& cfg) {
  Stepper s(model, cfg);
  return s.step(u);
}

SpectralField step_stochastic(const SpectralField& u, const ModelSpec& model, const SolverConfig& cfg,
                              const NoiseBasis& basis, const ThetaSequence& theta, NoiseDriver& driver,
                              StepDiagnostics* diag) {
  Stepper s(model, cfg, NoiseSetup{&basis, &theta, &driver});
  return s.step(u, diag);
}

// ---------------------------------------------------------------------------

namespace {

TrajectoryRow make_row(double t, const SpectralField& u, const SolverConfig& cfg, const std::vector<double>& hmd,
                       double pred, double real) {
  TrajectoryRow r;
  r.t = t;
  r.bracket_pred = pred;
  r.bracket_real = real;
  if (!all_finite(u)) {
    const double inf = std::numeric_limits<double>::infinity();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.l2 = inf;
    r.h_minus_delta = inf;
    r.grad_l2_sq = inf;
    r.mean = nan;
    r.g = cfg.cutoff ? 0.0 : 1.0;
    return r;
  }
  r.l2 = l2_norm(u);
  r.h_minus_delta = std::sqrt(weighted_norm_sq(u, hmd));
  r.grad_l2_sq = grad_l2_sq(u);
  r.mean = u.component(0)[u.zero_index()].real();
  r.g = cfg.cutoff ? cutoff_ramp(cfg.cutoff->R, r.h_minus_delta) : 1.0;
  return r;
}

}  // namespace

Trajectory run(const SpectralField& u0, const ModelSpec& model, const SolverConfig& cfg,
               std::optional<NoiseSetup> noise, const Observer& observer) {
  cfg.validate();
  if (u0.dim() != model.dim || u0.cutoff() != cfg.N || u0.components() != 1) {
    throw ModelError("initial field shape does not match solver configuration");
  }
  if (!all_finite(u0)) throw FieldError("field corrupted");
  if (hermitian_defect(u0) > 1e-12) throw FieldError("initial field is not real");
  if (model.kind == ModelKind::KellerSegel && std::abs(mean(u0)) >= kZeroMeanTolerance) {
    throw ModelError("Keller-Segel initial state must have zero mean");
  }

  Stepper stepper(model, cfg, noise);
  Trajectory traj;
  traj.threshold = cfg.threshold_for(u0);
  if (!(traj.threshold > l2_norm(u0))) throw ModelError("blow-up threshold must exceed ||u0||");
  traj.delta = cfg.cutoff ? cfg.cutoff->delta : cfg.delta;
  traj.nu_eff = stepper.effective_viscosity();
  if (noise && noise->theta && cfg.dt > noise_step_limit(cfg, *noise->theta)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "dt=%.6g exceeds the noise step limit %.6g", cfg.dt,
                  noise_step_limit(cfg, *noise->theta));
    traj.warnings.emplace_back(buf);
  }

  const std::vector<double> hmd = sobolev_weights(model.dim, cfg.N, -traj.delta);
  std::vector<double> diss = lattice(model.dim, cfg.N).k2;
  for (double& w : diss) w = w == 0.0 ? 0.0 : std::pow(kFourPiSq * w, model.alpha);

  SpectralField u = u0;
  double pred = 0.0, real = 0.0;
  traj.rows.push_back(make_row(0.0, u, cfg, hmd, pred, real));
  traj.max_l2_sq = l2_norm_sq(u);
  if (observer) observer(0.0, u);

  const long long n_steps = cfg.steps();
  for (long long n = 0; n < n_steps; ++n) {
    StepDiagnostics diag;
    traj.dissipation += weighted_norm_sq(u, diss) * cfg.dt;
    SpectralField next = stepper.step(u, &diag);
    pred += 2.0 * traj.nu_eff * diag.grad_l2_sq * cfg.dt;
    real += diag.martingale_sq;
    const double t = static_cast<double>(n + 1) * cfg.dt;
    traj.steps_taken = n + 1;

    const bool finite = all_finite(next);
    const double l2 = finite ? l2_norm(next) : std::numeric_limits<double>::infinity();
    if (!finite || l2 > traj.threshold) {
      traj.blew_up = true;
      traj.tau = t;
      traj.rows.push_back(make_row(t, next, cfg, hmd, pred, real));
      if (finite) {
        traj.max_l2_sq = std::max(traj.max_l2_sq, l2 * l2);
        u = std::move(next);
        if (observer) observer(t, u);
      }
      break;
    }
    u = std::move(next);
    traj.max_l2_sq = std::max(traj.max_l2_sq, l2 * l2);
    if ((n + 1) % cfg.record_every == 0 || n + 1 == n_steps) {
      traj.rows.push_back(make_row(t, u, cfg, hmd, pred, real));
      if (observer) observer(t, u);
    }
  }
  traj.final_field = std::move(u);
  return traj;
}

}  // namespace ttn
