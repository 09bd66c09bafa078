#include <catch_amalgamated.hpp>

#include "support.hpp"
#include "ttn/integrator.hpp"
#include "ttn/nonlinearity.hpp"

using namespace ttn;
using Catch::Approx;
using ttn::testing::max_abs_diff;
using ttn::testing::random_real;

namespace {

// F evaluated pointwise from direct trigonometric sums, then projected back
// by exact quadrature on a grid of more than 3N points.
SpectralField physical_F(const ModelSpec& m, const SpectralField& u) {
  const int d = u.dim(), N = u.cutoff(), M = 3 * N + 2;
  const auto pts = ttn::testing::grid_points(d, M);
  const auto ik = [](int j) {
    return [j](const Wavevector& k) { return Complex(0.0, kTwoPi * k[j]); };
  };
  const auto inv = [](int j) {
    return [j](const Wavevector& k) {
      return k.is_zero() ? Complex(0.0) : Complex(0.0, kTwoPi * k[j]) / (kFourPiSq * double(k.norm_sq()));
    };
  };
  std::vector<double> f(pts.size(), 0.0);
  if (m.kind == ModelKind::FisherKPP) {
    for (std::size_t p = 0; p < pts.size(); ++p) {
      const double v = ttn::testing::eval_at(u, pts[p]).real();
      f[p] = v * v - v;
    }
    return ttn::testing::quadrature(d, N, M, pts, f);
  }
  if (m.kind == ModelKind::KuramotoSivashinsky) {
    for (std::size_t p = 0; p < pts.size(); ++p) {
      double g2 = 0.0;
      for (int j = 0; j < d; ++j) g2 += std::pow(ttn::testing::eval_at(u, pts[p], ik(j)).real(), 2);
      const double lap = ttn::testing::eval_at(u, pts[p], [](const Wavevector& k) {
                           return Complex(-kFourPiSq * double(k.norm_sq()));
                         }).real();
      f[p] = -lap - 0.5 * g2;
    }
    return ttn::testing::quadrature(d, N, M, pts, f);
  }
  // Keller-Segel: flux u grad^{-1} u by quadrature, divergence by symbol.
  SpectralField out = u.zeros_like();
  for (int j = 0; j < d; ++j) {
    for (std::size_t p = 0; p < pts.size(); ++p) {
      f[p] = ttn::testing::eval_at(u, pts[p]).real() * ttn::testing::eval_at(u, pts[p], inv(j)).real();
    }
    const SpectralField flux = ttn::testing::quadrature(d, N, M, pts, f);
    for (std::size_t i = 0; i < out.modes(); ++i) {
      out.component(0)[i] -= m.chi * Complex(0.0, kTwoPi * out.wavevector(i)[j]) * flux.component(0)[i];
    }
  }
  out.add_scaled(u, m.chi * m.lambda);
  return out;
}

}  // namespace

TEST_CASE("model names and fixed exponents") {
  for (auto k : {ModelKind::KellerSegel, ModelKind::FisherKPP, ModelKind::KuramotoSivashinsky, ModelKind::Linear}) {
    CHECK(parse_model_kind(to_string(k)) == k);
  }
  CHECK_THROWS_WITH(ModelSpec::make(ModelKind::FisherKPP, 2, 2.0), "alpha fixed by model");
  CHECK(ModelSpec::make(ModelKind::KuramotoSivashinsky, 2).alpha == 2.0);
  CHECK(ModelSpec::make(ModelKind::Linear, 3, 1.5).alpha == 1.5);
  CHECK_THROWS(ModelSpec::make(ModelKind::Linear, 4));
  CHECK_THROWS(parse_model_kind("burgers"));
}

TEST_CASE("F on constants") {
  const auto fk = ModelSpec::make(ModelKind::FisherKPP, 2);
  const auto ks = ModelSpec::make(ModelKind::KuramotoSivashinsky, 2);
  for (double c : {-1.0, 0.5, 2.0}) {
    const SpectralField u = SpectralField::constant(2, 4, c);
    const SpectralField f = evaluate_F(fk, u);
    CHECK(f.at(Wavevector(0, 0)).real() == Approx(c * c - c).margin(1e-14));
    CHECK(l2_norm_sq(f) == Approx((c * c - c) * (c * c - c)).margin(1e-14));
    CHECK(l2_norm(evaluate_F(ks, u)) < 1e-14);
    CHECK(pairing_F_u(fk, u) == Approx(c * c * c - c * c).margin(1e-13));
    CHECK(std::abs(pairing_F_u(ks, u)) < 1e-13);
  }
}

TEST_CASE("Keller-Segel quadratic part on a single cosine") {
  ModelSpec m = ModelSpec::make(ModelKind::KellerSegel, 2);
  m.lambda = 0.0;
  for (const Wavevector& k : {Wavevector(1, 0), Wavevector(1, 1), Wavevector(0, 2)}) {
    const SpectralField u = SpectralField::cosine(2, 5, k);
    SpectralField expect(2, 5, 1);
    expect.at(k + k) = 2.0;
    expect.at(-k - k) = 2.0;
    CHECK(max_abs_diff(evaluate_F(m, u), expect) < 1e-12);
    CHECK(std::abs(inner_product(keller_segel_quadratic(u), u)) < 1e-12);
  }
}

TEST_CASE("Keller-Segel quadratic part is mean free and pairs to half the cubic") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SpectralField u = random_real(2, 6, seed, true);
    const SpectralField q = keller_segel_quadratic(u);
    CHECK(std::abs(q.at(Wavevector(0, 0))) < 1e-12);
    CHECK(inner_product(q, u) == Approx(0.5 * cubic_integral(u)).margin(1e-10));
  }
  const SpectralField c = SpectralField::constant(2, 3, 0.1);
  CHECK_THROWS(evaluate_F(ModelSpec::make(ModelKind::KellerSegel, 2), c));
}

TEST_CASE("Fisher-KPP commutes with translation") {
  const auto m = ModelSpec::make(ModelKind::FisherKPP, 2);
  const SpectralField u = random_real(2, 6, 4);
  const double h[2] = {0.123, 0.77};
  CHECK(max_abs_diff(evaluate_F(m, translate(u, h)), translate(evaluate_F(m, u), h)) < 1e-10);
}

TEST_CASE("F agrees with physical-space evaluation") {
  for (auto kind : {ModelKind::FisherKPP, ModelKind::KuramotoSivashinsky, ModelKind::KellerSegel}) {
    ModelSpec m = ModelSpec::make(kind, 2);
    m.lambda = 0.4;
    for (int N : {3, 8}) {
      const SpectralField u = random_real(2, N, 77 + N, kind == ModelKind::KellerSegel, 0.5);
      CHECK(max_abs_diff(evaluate_F(m, u), physical_F(m, u)) < 1e-8);
    }
  }
  ModelSpec m3 = ModelSpec::make(ModelKind::KuramotoSivashinsky, 3);
  const SpectralField u3 = random_real(3, 3, 5, false, 0.3);
  CHECK(max_abs_diff(evaluate_F(m3, u3), physical_F(m3, u3)) < 1e-8);
}

TEST_CASE("cut-off ramp") {
  const CutoffSpec spec{2.0, 0.1};
  const double w = std::pow(1.0 + kFourPiSq, -0.1);
  const auto at_norm = [&](double x) { return SpectralField::cosine(2, 3, Wavevector(1, 0), x / std::sqrt(2.0 * w)); };
  CHECK(cutoff_value(spec, at_norm(2.0)) == Approx(1.0).margin(1e-12));
  CHECK(cutoff_value(spec, at_norm(2.5)) == Approx(0.5).margin(1e-12));
  CHECK(cutoff_value(spec, at_norm(3.0)) == Approx(0.0).margin(1e-12));
  CHECK(cutoff_value(spec, at_norm(9.0)) == 0.0);
  CHECK_THROWS(CutoffSpec{0.0, 0.1}.validate());
  CHECK_THROWS(CutoffSpec{1.0, 1.5}.validate());
}

TEST_CASE("cut-off is 1-Lipschitz in the negative Sobolev norm") {
  const CutoffSpec spec{1.0, 0.1};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const SpectralField u = random_real(2, 4, seed, false, 0.3);
    const SpectralField v = random_real(2, 4, 500 + seed, false, 0.3);
    CHECK(std::abs(cutoff_value(spec, u) - cutoff_value(spec, v)) <= sobolev_norm(u - v, -spec.delta) + 1e-14);
  }
}

TEST_CASE("hypothesis parameter constraints and defaults") {
  const auto ks = HypothesisParams::defaults(ModelKind::KuramotoSivashinsky);
  CHECK(ks.beta2 == 11.0 / 8.0);
  CHECK(ks.gamma2 == 13.0 / 8.0);
  CHECK(ks.beta3 == 5.0 / 4.0);
  CHECK(ks.gamma3 == 3.0 / 4.0);
  CHECK(ks.kappa == 1.0);
  const auto fk = HypothesisParams::defaults(ModelKind::FisherKPP);
  CHECK(fk.eta == 0.5);
  CHECK(fk.beta2 == 1.5);
  CHECK(HypothesisParams::defaults(ModelKind::KellerSegel).eta == 0.25);
  HypothesisParams bad = fk;
  bad.gamma2 = 2.0;
  CHECK_THROWS(bad.validate());
  bad = fk;
  bad.beta3 = 0.5;
  CHECK_THROWS(bad.validate());
  bad = fk;
  bad.kappa = 1.5;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("hypothesis probe examples") {
  const auto fk = ModelSpec::make(ModelKind::FisherKPP, 2);
  const auto rows = hypothesis_probe(fk, HypothesisParams::defaults(fk.kind), {SpectralField::constant(2, 4, 2.0)});
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].hypothesis == "H2");
  const double expect = 4.0 / std::pow(1.0 + std::pow(2.0, 1.5), 2);
  CHECK(rows[1].max_ratio == Approx(expect).epsilon(1e-12));
  CHECK(rows[1].max_ratio == Approx(0.273).margin(5e-4));

  for (auto kind : {ModelKind::FisherKPP, ModelKind::KuramotoSivashinsky, ModelKind::KellerSegel}) {
    const auto m = ModelSpec::make(kind, 2);
    const auto zero = hypothesis_probe(m, HypothesisParams::defaults(kind), {SpectralField(2, 4, 1)});
    for (const auto& r : zero) CHECK(r.max_ratio == 0.0);
  }
  CHECK_THROWS(hypothesis_probe(fk, HypothesisParams::defaults(fk.kind), {}));
}

TEST_CASE("hypothesis ratios stay bounded under amplitude scaling") {
  for (auto kind : {ModelKind::FisherKPP, ModelKind::KuramotoSivashinsky, ModelKind::KellerSegel}) {
    const auto m = ModelSpec::make(kind, 2);
    std::vector<double> first;
    for (double s : {1.0, 2.0, 4.0, 8.0}) {
      std::vector<SpectralField> ens;
      for (std::uint64_t i = 0; i < 4; ++i) ens.push_back(s * random_real(2, 4, 60 + i, true, 0.5));
      const auto rows = hypothesis_probe(m, HypothesisParams::defaults(kind), ens);
      for (std::size_t h = 0; h < rows.size(); ++h) {
        CHECK(std::isfinite(rows[h].max_ratio));
        if (first.size() < rows.size()) {
          first.push_back(rows[h].max_ratio);
        } else {
          // No divergence: an eightfold amplitude moves no ratio by more than
          // a fixed factor.
          CHECK(rows[h].max_ratio <= 64.0 * first[h] + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("KSE mean identity holds to first order in dt") {
  const auto m = ModelSpec::make(ModelKind::KuramotoSivashinsky, 2);
  // Smooth data so that the stiffest active rate times dt stays small.
  const SpectralField u0 = project(random_real(2, 6, 12, true, 0.3), 1);
  const auto max_residual = [&](double dt) {
    SolverConfig cfg;
    cfg.N = 6;
    cfg.dt = dt;
    cfg.T = 2e-4;
    const Trajectory tr = run(u0, m, cfg);
    double r = 0.0;
    for (std::size_t n = 1; n + 1 < tr.rows.size(); ++n) {
      const double lhs = (tr.rows[n + 1].mean - tr.rows[n - 1].mean) / (2.0 * dt);
      r = std::max(r, std::abs(lhs + 0.5 * tr.rows[n].grad_l2_sq));
    }
    return r;
  };
  const double r1 = max_residual(2e-6), r2 = max_residual(1e-6);
  CHECK(r1 > 0.0);
  CHECK(r2 / r1 == Approx(0.5).margin(0.1));
}
