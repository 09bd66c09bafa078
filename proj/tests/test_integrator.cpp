#include <catch_amalgamated.hpp>

#include "support.hpp"
#include "ttn/experiments.hpp"
#include "ttn/integrator.hpp"

using namespace ttn;
using Catch::Approx;
using ttn::testing::max_abs_diff;
using ttn::testing::random_real;

namespace {

// Second moments E|c_m|^2 of the linear scheme, mode by mode. Increments are
// independent of the state, so E|c_m + dM_m|^2 = E|c_m|^2 + E|dM_m|^2 and
// E|dM_m|^2 = C_d nu sum_k theta_k^2 2 dt (2 pi a_k.m)^2 E|c_{m-k}|^2.
struct MomentOracle {
  double energy = 0.0;     // E||u(T)||^2
  double realized = 0.0;   // E sum ||dM||^2
  double predicted = 0.0;  // E 2 nu_eff sum ||grad u||^2 dt
};

MomentOracle moment_oracle(const SpectralField& u0, const NoiseBasis& b, const ThetaSequence& th, double nu,
                           double dt, long long steps) {
  const int d = u0.dim();
  SpectralField E = u0.zeros_like();
  for (std::size_t i = 0; i < E.modes(); ++i) E.component(0)[i] = std::norm(u0.component(0)[i]);
  const double nu_eff = nu * th.l2_norm_sq();
  MomentOracle o;
  for (long long n = 0; n < steps; ++n) {
    SpectralField next = E.zeros_like();
    for (std::size_t i = 0; i < E.modes(); ++i) {
      const Wavevector m = E.wavevector(i);
      o.predicted += 2.0 * nu_eff * kFourPiSq * double(m.norm_sq()) * E.component(0)[i].real() * dt;
      double pump = 0.0;
      for (std::size_t p = 0; p < b.positive().size(); ++p) {
        const double w = th.at(p);
        if (w == 0.0) continue;
        for (int sgn : {1, -1}) {
          const Wavevector k = sgn > 0 ? b.positive()[p] : -b.positive()[p];
          const Wavevector j = m - k;
          if (!E.contains(j)) continue;
          for (int f = 0; f < d - 1; ++f) {
            const Vec3& a = b.frame_at(p, f);
            double am = 0.0;
            for (int c = 0; c < d; ++c) am += a[static_cast<std::size_t>(c)] * m[c];
            pump += noise_constant(d) * nu * w * w * 2.0 * dt * kFourPiSq * am * am * E.at(j).real();
          }
        }
      }
      o.realized += pump;
      const double lam = kFourPiSq * double(m.norm_sq()) * (1.0 + nu_eff);
      next.component(0)[i] = std::exp(-2.0 * lam * dt) * (E.component(0)[i].real() + pump);
    }
    E = std::move(next);
  }
  for (const auto& c : E.component(0)) o.energy += c.real();
  return o;
}

ModelSpec linear2() { return ModelSpec::make(ModelKind::Linear, 2, 1.0); }

}  // namespace

TEST_CASE("solver config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.N = 1;
  CHECK_THROWS(c.validate());
  c = SolverConfig{};
  c.dt = 0.0;
  CHECK_THROWS(c.validate());
  c = SolverConfig{};
  c.nu = -1.0;
  CHECK_THROWS(c.validate());
  c = SolverConfig{};
  c.T = 0.25;
  c.dt = 0.05;
  CHECK(c.steps() == 5);
  CHECK(c.threshold_for(SpectralField::constant(2, 4, 3.0)) == 3e6);
  CHECK(c.threshold_for(SpectralField::constant(2, 4, 0.1)) == 1e6);
}

TEST_CASE("linear step is the exact semigroup") {
  for (double alpha : {1.0, 2.0}) {
    const auto m = ModelSpec::make(ModelKind::Linear, 2, alpha);
    SolverConfig cfg;
    cfg.N = 4;
    cfg.dt = 1e-3;
    cfg.nu = 0.7;
    const Wavevector k(1, 2);
    const SpectralField u = SpectralField::cosine(2, 4, k);
    const SpectralField v = step_deterministic(u, m, cfg);
    const double k2 = kFourPiSq * 5.0;
    const double f = std::exp(-std::pow(k2, alpha) * cfg.dt - cfg.nu * k2 * cfg.dt);
    CHECK(v.at(k).real() == Approx(f).epsilon(1e-14));
    CHECK(std::abs(l2_norm_sq(v) - 2.0 * f * f) < 1e-14);
  }
}

TEST_CASE("Fisher-KPP constant step") {
  const auto m = ModelSpec::make(ModelKind::FisherKPP, 2);
  SolverConfig cfg;
  cfg.N = 4;
  cfg.dt = 1e-2;
  cfg.nu = 3.0;
  const double c = 1.7;
  const SpectralField v = step_deterministic(SpectralField::constant(2, 4, c), m, cfg);
  CHECK(v.at(Wavevector(0, 0)).real() == Approx(c + cfg.dt * (c * c - c)).epsilon(1e-15));
  CHECK(l2_norm_sq(v) == Approx(std::pow(c + cfg.dt * (c * c - c), 2)).epsilon(1e-14));
}

TEST_CASE("splitting converges at first order") {
  const auto m = ModelSpec::make(ModelKind::FisherKPP, 2);
  const SpectralField u0 = SpectralField::constant(2, 6, 0.5) + project(random_real(2, 6, 3, true, 0.05), 2);
  const auto final_at = [&](double dt) {
    SolverConfig cfg;
    cfg.N = 6;
    cfg.dt = dt;
    cfg.T = 0.05;
    cfg.nu = 0.2;
    return run(u0, m, cfg).final_field;
  };
  const SpectralField a = final_at(1e-4), b = final_at(5e-5), c = final_at(2.5e-5);
  const double ratio = l2_norm(a - b) / l2_norm(b - c);
  CHECK(ratio == Approx(2.0).margin(0.2));
}

TEST_CASE("zero theta reproduces the deterministic step bit for bit") {
  const NoiseBasis b(2, 3);
  const ThetaSequence zero = theta_zero(b);
  for (auto kind : {ModelKind::FisherKPP, ModelKind::Linear}) {
    const auto m = ModelSpec::make(kind, 2, kind == ModelKind::Linear ? std::optional<double>(1.0) : std::nullopt);
    const SpectralField u = SpectralField::constant(2, 5, 0.4) + random_real(2, 5, 8, true, 0.2);
    SolverConfig det;
    det.N = 5;
    det.dt = 1e-3;
    det.nu = 0.0;
    for (double nu : {0.0, 1.0}) {
      SolverConfig sto = det;
      sto.nu = nu;
      NoiseDriver drv(5);
      // nu ||theta||^2 = 0: no transport and no extra viscosity.
      CHECK(step_stochastic(u, m, sto, b, zero, drv) == step_deterministic(u, m, det));
    }
  }
}

TEST_CASE("noise leaves constants alone") {
  const NoiseBasis b(2, 3);
  const ThetaSequence th = theta_shell(b, 3);
  const auto m = ModelSpec::make(ModelKind::FisherKPP, 2);
  SolverConfig cfg;
  cfg.N = 5;
  cfg.dt = 1e-3;
  cfg.nu = 2.0;
  NoiseDriver drv(1);
  StepDiagnostics diag;
  const SpectralField u = SpectralField::constant(2, 5, 0.8);
  CHECK(step_stochastic(u, m, cfg, b, th, drv, &diag) == step_deterministic(u, m, cfg));
  CHECK(diag.martingale_sq == 0.0);
}

TEST_CASE("Fisher-KPP blow-up near the Riccati time") {
  const auto m = ModelSpec::make(ModelKind::FisherKPP, 2);
  SolverConfig cfg;
  cfg.N = 4;
  cfg.dt = 1e-4;
  cfg.T = 1.0;
  cfg.blowup_threshold = 1e3;
  cfg.record_every = 50;
  const Trajectory tr = run(SpectralField::constant(2, 4, 2.0), m, cfg);
  REQUIRE(tr.blew_up);
  REQUIRE(tr.tau);
  CHECK(std::abs(*tr.tau - std::log(2.0)) < 0.02);
  CHECK(*tr.tau <= cfg.T);
  CHECK(tr.rows.back().l2 > 1e3);

  const Trajectory one = run(SpectralField::constant(2, 4, 1.0), m, cfg);
  CHECK_FALSE(one.blew_up);
  CHECK(max_abs_diff(one.final_field, SpectralField::constant(2, 4, 1.0)) < 1e-12);
}

TEST_CASE("heat flow norm decay") {
  SolverConfig cfg;
  cfg.N = 4;
  cfg.dt = 1e-3;
  cfg.T = 0.05;
  cfg.nu = 0.5;
  const Trajectory tr = run(SpectralField::cosine(2, 4, Wavevector(1, 0)), linear2(), cfg);
  CHECK(std::abs(tr.rows.back().l2 - std::sqrt(2.0) * std::exp(-kFourPiSq * (1.0 + cfg.nu) * cfg.T)) < 1e-10);
}

TEST_CASE("trajectory bookkeeping") {
  SolverConfig cfg;
  cfg.N = 4;
  cfg.dt = 1e-3;
  cfg.T = 0.1;
  cfg.record_every = 7;
  std::vector<double> seen;
  const Trajectory tr = run(SpectralField::cosine(2, 4, Wavevector(1, 1)), linear2(), cfg, std::nullopt,
                            [&](double t, const SpectralField&) { seen.push_back(t); });
  REQUIRE(tr.rows.size() == seen.size());
  CHECK(tr.rows.front().t == 0.0);
  CHECK(tr.rows.back().t == Approx(0.1).epsilon(1e-12));
  CHECK(tr.rows.size() == 1 + 100 / 7 + 1);
  for (std::size_t i = 1; i < tr.rows.size(); ++i) CHECK(tr.rows[i].t > tr.rows[i - 1].t);
  CHECK(tr.steps_taken == 100);

  cfg.blowup_threshold = 0.5;
  CHECK_THROWS(run(SpectralField::constant(2, 4, 1.0), linear2(), cfg));
  CHECK_THROWS(run(SpectralField::constant(3, 4, 1.0), linear2(), cfg));
}

TEST_CASE("Keller-Segel keeps zero mean") {
  const auto m = ModelSpec::make(ModelKind::KellerSegel, 2);
  SolverConfig cfg;
  cfg.N = 6;
  cfg.dt = 1e-4;
  cfg.T = 0.02;
  const Trajectory tr = run(random_real(2, 6, 13, true, 0.5), m, cfg);
  for (const auto& r : tr.rows) CHECK(std::abs(r.mean) < 1e-10);
  CHECK_THROWS(run(SpectralField::constant(2, 6, 0.1), m, cfg));
}

TEST_CASE("large steps carry a noise warning") {
  const NoiseBasis b(2, 4);
  const ThetaSequence th = theta_shell(b, 1);
  NoiseDriver drv(0);
  SolverConfig cfg;
  cfg.N = 8;
  cfg.nu = 1.0;
  cfg.dt = 1.0;
  cfg.T = 1.0;
  const double limit = noise_step_limit(cfg, th);
  CHECK(limit == Approx(1.0 / (std::pow(kTwoPi * 8, 2) * 2.0 * 0.125 * 2.0)).epsilon(1e-14));
  const Trajectory tr = run(SpectralField::constant(2, 8, 1.0), linear2(), cfg, NoiseSetup{&b, &th, &drv});
  CHECK(tr.warnings.size() == 1);
}

TEST_CASE("runs are deterministic under concurrency") {
  const NoiseBasis b(2, 4);
  const ThetaSequence th = theta_shell(b, 4);
  SolverConfig cfg;
  cfg.N = 6;
  cfg.dt = 1e-4;
  cfg.T = 0.01;
  cfg.nu = 1.0;
  const SpectralField u0 = random_real(2, 6, 2, false, 0.5);
  const auto once = [&](std::uint64_t seed) {
    NoiseDriver drv(seed);
    return run(u0, linear2(), cfg, NoiseSetup{&b, &th, &drv});
  };
  const Trajectory ref = once(9);
  std::vector<Trajectory> out(6);
  parallel_for(6, 3, [&](int i) { out[static_cast<std::size_t>(i)] = once(i % 2 ? 9 : 100 + i); });
  for (int i = 1; i < 6; i += 2) {
    const Trajectory& t = out[static_cast<std::size_t>(i)];
    CHECK(t.final_field == ref.final_field);
    REQUIRE(t.rows.size() == ref.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      CHECK(t.rows[r].l2 == ref.rows[r].l2);
      CHECK(t.rows[r].bracket_real == ref.rows[r].bracket_real);
    }
  }
}

TEST_CASE("second moments match the mode oracle") {
  // Linear model, d = 2, N = 8, u0 = e_(1,0) + e_(-1,0), shell theta(4).
  const int N = 8, paths = 200;
  const double nu = 1.0, dt = 2e-4, T = 0.1;
  const NoiseBasis b(2, 4);
  const ThetaSequence th = theta_shell(b, 4);
  const SpectralField u0 = SpectralField::cosine(2, N, Wavevector(1, 0));
  SolverConfig cfg;
  cfg.N = N;
  cfg.dt = dt;
  cfg.T = T;
  cfg.nu = nu;
  cfg.record_every = 1000000;
  const MomentOracle o = moment_oracle(u0, b, th, nu, dt, cfg.steps());

  std::vector<double> energy(paths), real(paths), pred(paths);
  for (int p = 0; p < paths; ++p) {
    NoiseDriver drv(static_cast<std::uint64_t>(p));
    const Trajectory tr = run(u0, linear2(), cfg, NoiseSetup{&b, &th, &drv});
    energy[p] = l2_norm_sq(tr.final_field);
    real[p] = tr.rows.back().bracket_real;
    pred[p] = tr.rows.back().bracket_pred;
  }
  const MeanSe e = mean_se(energy), r = mean_se(real), q = mean_se(pred);
  CHECK(std::abs(e.mean - o.energy) < 0.05 * o.energy);
  CHECK(std::abs(r.mean - o.realized) < 3.0 * r.se);
  CHECK(std::abs(q.mean - o.predicted) < 3.0 * q.se);
  // Discrete moment energy inequality: E||u(T)||^2 <= ||u0||^2.
  CHECK(o.energy <= l2_norm_sq(u0));
  CHECK(e.mean <= l2_norm_sq(u0));
}

TEST_CASE("energy bound does not grow as theta spreads") {
  const auto m = ModelSpec::make(ModelKind::FisherKPP, 2);
  const NoiseBasis b(2, 4);
  SolverConfig cfg;
  cfg.N = 8;
  cfg.dt = 2e-4;
  cfg.T = 0.2;
  cfg.nu = 1.0;
  cfg.cutoff = CutoffSpec{1.0, 0.1};
  cfg.record_every = 1000000;
  const SpectralField u0 = SpectralField::constant(2, 8, 0.5) + SpectralField::cosine(2, 8, Wavevector(1, 0), 0.2);
  std::vector<double> bound;
  std::vector<double> linf;
  for (int n : {1, 2, 4}) {
    const ThetaSequence th = theta_shell(b, n);
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      NoiseDriver drv(seed);
      const Trajectory tr = run(u0, m, cfg, NoiseSetup{&b, &th, &drv});
      worst = std::max(worst, tr.max_l2_sq + tr.dissipation);
    }
    bound.push_back(worst);
    linf.push_back(th.linf_norm());
  }
  CHECK(linf[0] > linf[2]);
  for (double v : bound) CHECK(v <= bound[0] * (1.0 + 1e-12));
}
