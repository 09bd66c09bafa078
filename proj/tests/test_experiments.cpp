#include <catch_amalgamated.hpp>

#include <atomic>

#include "support.hpp"
#include "ttn/experiments.hpp"

using namespace ttn;
using Catch::Approx;

namespace {

StudyPlan linear_plan() {
  StudyPlan p;
  p.model = ModelSpec::make(ModelKind::Linear, 2, 1.0);
  p.solver.N = 4;
  p.solver.dt = 1e-3;
  p.solver.T = 0.02;
  p.solver.nu = 1.0;
  p.solver.cutoff = CutoffSpec{1e6, 0.1};
  p.initial = parse_recipe("constant_plus_mode 0, 1 0, 1", 2);
  p.theta_N = {1, 2};
  p.paths = 6;
  p.base_seed = 3;
  return p;
}

void same_table(const Table& a, const Table& b) {
  REQUIRE(a.columns == b.columns);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    for (std::size_t c = 0; c < a.rows[r].size(); ++c) {
      const double x = a.rows[r][c], y = b.rows[r][c];
      CHECK(((std::isnan(x) && std::isnan(y)) || x == y));
    }
  }
}

}  // namespace

TEST_CASE("initial recipes") {
  const InitialRecipe c = parse_recipe("constant 2.5", 2);
  CHECK(build_initial(c, 2, 3) == SpectralField::constant(2, 3, 2.5));

  const InitialRecipe m = parse_recipe("constant_plus_mode 1.2, 1 0, 0.3", 2);
  SpectralField expect = SpectralField::constant(2, 16, 1.2);
  expect.at(Wavevector(1, 0)) = 0.3;
  expect.at(Wavevector(-1, 0)) = 0.3;
  CHECK(build_initial(m, 2, 16) == expect);
  CHECK(parse_recipe(m.to_string(), 2).to_string() == m.to_string());

  const InitialRecipe m3 = parse_recipe("constant_plus_mode 0, 0 1 2, 1", 3);
  CHECK(m3.k == Wavevector(0, 1, 2));

  const InitialRecipe r = parse_recipe("random_trig 7, 0.5, 2", 2);
  CHECK(r.seed == 7);
  CHECK(r.amplitude == 0.5);
  CHECK(r.band == 2);
  CHECK(parse_recipe(r.to_string(), 2).to_string() == r.to_string());

  CHECK_THROWS_AS(parse_recipe("gaussian 1", 2), PlanError);
  CHECK_THROWS_AS(parse_recipe("constant x", 2), PlanError);
  CHECK_THROWS_AS(parse_recipe("constant_plus_mode 1, 1 0 0, 1", 2), PlanError);
  CHECK_THROWS_AS(parse_recipe("random_trig 1, 1", 2), PlanError);
  CHECK_THROWS_AS(build_initial(parse_recipe("constant_plus_mode 0, 5 0, 1", 2), 2, 4), PlanError);
}

TEST_CASE("random trigonometric data") {
  const SpectralField u = random_trig(2, 6, 11, 0.7, 3);
  CHECK(hermitian_defect(u) == 0.0);
  CHECK(mean(u) == 0.0);
  for (std::size_t i = 0; i < u.modes(); ++i) {
    if (u.wavevector(i).max_abs() > 3) CHECK(u.component(0)[i] == Complex(0.0));
  }
  CHECK(random_trig(2, 6, 11, 0.7, 3) == u);
  CHECK_FALSE(random_trig(2, 6, 12, 0.7, 3) == u);
  CHECK_THROWS_AS(random_trig(2, 2, 1, 1.0, 3), PlanError);

  // E|c_k|^2 = amplitude^2: 2 * 24 modes of the band-3 support.
  double acc = 0.0;
  for (std::uint64_t s = 0; s < 400; ++s) acc += l2_norm_sq(random_trig(2, 3, s, 1.0, 3));
  CHECK(acc / 400.0 == Approx(48.0).epsilon(0.03));
}

TEST_CASE("Wilson interval") {
  const Interval a = wilson_interval(5, 10);
  CHECK(a.lo == Approx(0.2366).margin(1e-4));
  CHECK(a.hi == Approx(0.7634).margin(1e-4));
  const Interval z = wilson_interval(0, 10);
  CHECK(z.lo == 0.0);
  CHECK(z.hi == Approx(0.2775).margin(1e-4));
  const Interval f = wilson_interval(50, 50);
  CHECK(f.hi == 1.0);
  CHECK(f.lo == Approx(0.9287).margin(1e-4));
}

TEST_CASE("mean and standard error") {
  const MeanSe m = mean_se({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == 2.5);
  CHECK(m.se == Approx(std::sqrt(5.0 / 3.0 / 4.0)).epsilon(1e-15));
  CHECK(mean_se({7.0}).se == 0.0);
}

TEST_CASE("space-time distance quadrature") {
  CHECK(l2l2_distance({0.0, 1.0, 2.0}, {1.0, 1.0, 1.0}) == Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(l2l2_distance({0.0, 1.0}, {0.0, 2.0}) == Approx(1.0).epsilon(1e-15));
  CHECK_THROWS(l2l2_distance({0.0}, {1.0, 2.0}));
}

TEST_CASE("parallel_for covers every index and rethrows the first failure") {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](int i) { hits[static_cast<std::size_t>(i)]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  try {
    parallel_for(20, 3, [](int i) {
      if (i == 5 || i == 12) throw std::runtime_error("fail " + std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "fail 5");
  }
}

TEST_CASE("plan preconditions") {
  StudyPlan p = linear_plan();
  CHECK_NOTHROW(p.validate());
  p.theta_N.clear();
  CHECK_THROWS_WITH(p.validate(), "noise required");
  p = linear_plan();
  p.theta_N = {5};
  CHECK_THROWS_AS(p.validate(), PlanError);

  p = linear_plan();
  p.solver.cutoff.reset();
  CHECK_THROWS_AS(scaling_limit_study(p), PlanError);
  CHECK_THROWS_AS(triviality_study(p), PlanError);
  p = linear_plan();
  p.theta_family = ThetaFamily::Flat;
  CHECK_THROWS_AS(scaling_limit_study(p), PlanError);
  p = linear_plan();
  CHECK_THROWS_AS(triviality_study(p), PlanError);
  CHECK_THROWS_AS(delayed_blowup_mc(p), PlanError);
  p.nu_grid = {1.0};
  p.model = ModelSpec::make(ModelKind::FisherKPP, 2);
  CHECK_THROWS_AS(relaxation_enhancing_study(p), PlanError);
  CHECK(parse_theta_family(to_string(ThetaFamily::Flat)) == ThetaFamily::Flat);
  CHECK_THROWS_AS(parse_theta_family("ring"), PlanError);
}

TEST_CASE("scaling-limit table does not depend on the worker count") {
  StudyPlan p = linear_plan();
  const Table one = scaling_limit_study(p);
  p.threads = 3;
  same_table(one, scaling_limit_study(p));
  REQUIRE(one.rows.size() == 2);
  CHECK(one.at(0, "N") == 1.0);
  CHECK(one.at(0, "theta_linf") == Approx(1.0 / std::sqrt(8.0)).epsilon(1e-15));
  CHECK(one.at(1, "paths") == 6.0);
  CHECK(one.at(0, "distance_mean") > 0.0);
}

TEST_CASE("delayed blow-up table") {
  StudyPlan p;
  p.model = ModelSpec::make(ModelKind::FisherKPP, 2);
  p.solver.N = 4;
  p.solver.dt = 1e-3;
  p.solver.T = 1.0;
  p.initial = parse_recipe("constant 2", 2);
  p.theta_N = {2};
  p.nu_grid = {0.0, 1.0};
  p.paths = 4;
  const Table t = delayed_blowup_mc(p);
  REQUIRE(t.rows.size() == 2);
  CHECK(std::abs(t.at(0, "baseline_tau") - std::log(2.0)) < 0.02);
  // A constant never feels the noise: every path blows up at the baseline time.
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(t.at(r, "survived") == 0.0);
    CHECK(t.at(r, "mean_tau_blown") == t.at(r, "baseline_tau"));
    CHECK(t.at(r, "wilson_lo") == 0.0);
  }
  p.threads = 2;
  same_table(t, delayed_blowup_mc(p));
}

TEST_CASE("relaxation table") {
  StudyPlan p = linear_plan();
  p.solver.cutoff.reset();
  p.nu_grid = {0.0, 5.0};
  p.tau = 0.02;
  p.target = 0.5;
  p.theta_N = {2};
  const Table t = relaxation_enhancing_study(p);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.at(0, "benchmark") == Approx(std::exp(-kFourPiSq * 0.02)).epsilon(1e-14));
  CHECK(t.at(1, "benchmark") == Approx(std::exp(-kFourPiSq * 6.0 * 0.02)).epsilon(1e-14));
  // exp(-4 pi^2 0.02) = 0.45 < 0.5: the heat flow alone already succeeds.
  CHECK(t.at(0, "probability") == 1.0);
  CHECK(t.at(1, "probability") == 1.0);
  p.threads = 4;
  same_table(t, relaxation_enhancing_study(p));
}

TEST_CASE("triviality table") {
  StudyPlan p = linear_plan();
  p.theta_family = ThetaFamily::Flat;
  p.initial = parse_recipe("random_trig 7, 1, 1", 2);
  const Table t = triviality_study(p);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.columns.size() == 3 + 2 * 2 + 2);
  CHECK(t.at(0, "theta_l2_sq") == 8.0);
  CHECK(t.at(1, "lambda_N") == Approx(kFourPiSq * 25.0).epsilon(1e-14));
  CHECK(t.at(1, "decay_mean") < t.at(0, "decay_mean"));
  p.threads = 3;
  same_table(t, triviality_study(p));
}
