#include "ttn/ode_comparison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ttn {

double fkpp_lambda(double nu) { return 8.0 * kPi * kPi * nu; }
double kse_lambda(double nu) { return 8.0 * kPi * kPi * (nu - 1.0); }
double mean_zero_lambda(double nu) { return 2.0 * (kFourPiSq * nu - 1.0); }

double beta_tilde(double beta2, double gamma2) {
  if (!(gamma2 < 2.0)) throw OdeError("gamma2 must be below 2");
  return 2.0 * beta2 / (2.0 - gamma2);
}

namespace {

template <class F>
ComparisonState rk4(ComparisonState s, double dt, F&& f) {
  const auto add = [](ComparisonState a, ComparisonState k, double h) {
    return ComparisonState{a.x + h * k.x, a.y + h * k.y};
  };
  const ComparisonState k1 = f(s);
  const ComparisonState k2 = f(add(s, k1, 0.5 * dt));
  const ComparisonState k3 = f(add(s, k2, 0.5 * dt));
  const ComparisonState k4 = f(add(s, k3, dt));
  ComparisonState out{s.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
                      s.y + dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y)};
  out.y = std::max(out.y, 0.0);
  return out;
}

}  // namespace

ComparisonState fkpp_system_step(ComparisonState s, double lambda, double C, double dt) {
  if (!(dt > 0.0)) throw OdeError("dt must be positive");
  return rk4(s, dt, [&](ComparisonState v) {
    return ComparisonState{v.y + v.x * v.x - v.x, (-lambda + 4.0 * v.x) * v.y + C * v.y * v.y * v.y};
  });
}

ComparisonState kse_system_step(ComparisonState s, double lambda, double C, double dt) {
  if (!(dt > 0.0)) throw OdeError("dt must be positive");
  return rk4(s, dt, [&](ComparisonState v) { return ComparisonState{v.y, -lambda * v.y + C * v.y * v.y}; });
}

double mean_zero_comparison_step(double x, double lambda_nu, double C2, double bt, double dt) {
  if (!(dt > 0.0)) throw OdeError("dt must be positive");
  const auto f = [&](double v) { return -lambda_nu * v + C2 * (1.0 + std::pow(std::max(v, 0.0), bt / 2.0)); };
  const double k1 = f(x);
  const double k2 = f(x + 0.5 * dt * k1);
  const double k3 = f(x + 0.5 * dt * k2);
  const double k4 = f(x + dt * k3);
  return std::max(0.0, x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

std::vector<ComparisonState> integrate_system(ComparisonState s0, double dt, double T, const SystemStep& step) {
  std::vector<ComparisonState> out{s0};
  const auto n = static_cast<long long>(std::ceil(T / dt - 1e-9));
  ComparisonState s = s0;
  for (long long i = 0; i < n; ++i) {
    s = step(s, dt);
    out.push_back(s);
    if (!std::isfinite(s.x) || !std::isfinite(s.y) || std::abs(s.x) > 1e300 || s.y > 1e300) break;
  }
  return out;
}

// ---------------------------------------------------------------------------

RiccatiSolution riccati_blowup(double y0) {
  if (!(y0 > 0.0)) throw OdeError("Riccati initial value must be positive");
  RiccatiSolution s;
  s.y0 = y0;
  if (y0 > 1.0) s.blowup_time = std::log(y0 / (y0 - 1.0));
  return s;
}

double RiccatiSolution::operator()(double t) const {
  if (blowup_time && t >= *blowup_time) return std::numeric_limits<double>::infinity();
  return 1.0 / (1.0 - (1.0 - 1.0 / y0) * std::exp(t));
}

BernoulliSolution bernoulli_solution(double y0, double lambda, double C) {
  if (!(y0 >= 0.0)) throw OdeError("Bernoulli initial value must be nonnegative");
  BernoulliSolution s{y0, lambda, C, std::nullopt};
  if (y0 == 0.0 || C <= 0.0) return s;
  const double z0 = 1.0 / y0;
  if (lambda == 0.0) {
    s.blowup_time = z0 / C;
    return s;
  }
  const double a = C / lambda;
  const double b = z0 - a;
  if (b == 0.0) return s;  // equilibrium y = lambda / C
  const double r = -a / b;
  if (r > 0.0) {
    const double t = std::log(r) / lambda;
    if (t > 0.0) s.blowup_time = t;
  }
  return s;
}

double BernoulliSolution::y(double t) const {
  if (y0 == 0.0) return 0.0;
  if (blowup_time && t >= *blowup_time) return std::numeric_limits<double>::infinity();
  const double z0 = 1.0 / y0;
  if (lambda == 0.0) return 1.0 / (z0 - C * t);
  const double a = C / lambda;
  return 1.0 / (a + (z0 - a) * std::exp(lambda * t));
}

double BernoulliSolution::integral(double t) const {
  if (y0 == 0.0) return 0.0;
  if (blowup_time && t >= *blowup_time) return std::numeric_limits<double>::infinity();
  const double z0 = 1.0 / y0;
  if (lambda == 0.0) {
    if (C == 0.0) return y0 * t;
    return -std::log(1.0 - C * t / z0) / C;
  }
  const double a = C / lambda;
  if (a == 0.0) return -std::expm1(-lambda * t) / (lambda * z0);
  const double b = z0 - a;
  return (t - std::log((a + b * std::exp(lambda * t)) / (a + b)) / lambda) / a;
}

std::optional<double> mean_zero_equilibrium(double lambda_nu, double C2, double bt, double upper) {
  const auto h = [&](double x) { return lambda_nu * x - C2 * (1.0 + std::pow(x, bt / 2.0)); };
  if (h(0.0) >= 0.0) return 0.0;
  // Scan geometrically for the first sign change, then bisect.
  double lo = 0.0, hi = 1e-6;
  while (hi <= upper && h(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  if (hi > upper) return std::nullopt;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------

ComparisonSystem parse_comparison_system(const std::string& name) {
  if (name == "fkpp" || name == "fisher_kpp") return ComparisonSystem::FisherKPP;
  if (name == "kse") return ComparisonSystem::KSE;
  throw OdeError("unknown comparison system '" + name + "' (expected fkpp or kse)");
}

namespace {

struct Channels {
  std::vector<double> t, x, y;
};

Channels extract(const Trajectory& traj, ComparisonSystem system) {
  Channels c;
  for (const auto& r : traj.rows) {
    if (!std::isfinite(r.l2) || !std::isfinite(r.mean) || !std::isfinite(r.grad_l2_sq)) break;
    c.t.push_back(r.t);
    if (system == ComparisonSystem::FisherKPP) {
      c.x.push_back(r.mean);
      c.y.push_back(std::max(0.0, r.l2 * r.l2 - r.mean * r.mean));
    } else {
      c.x.push_back(std::abs(r.mean));
      c.y.push_back(r.grad_l2_sq);
    }
  }
  if (c.t.size() < 3) throw OdeError("trajectory lacks required channels (need >= 3 finite records)");
  return c;
}

double centered(const std::vector<double>& v, const std::vector<double>& t, std::size_t i) {
  return (v[i + 1] - v[i - 1]) / (t[i + 1] - t[i - 1]);
}

}  // namespace

ResidualReport check_pde_inequality(const Trajectory& traj, ComparisonSystem system, double lambda, double C,
                                    ResidualTolerance tol) {
  const Channels ch = extract(traj, system);
  ResidualReport rep;
  std::size_t vx = 0, vy = 0, n = 0;
  for (std::size_t i = 1; i + 1 < ch.t.size(); ++i) {
    const double x = ch.x[i], y = ch.y[i];
    const double dx = centered(ch.x, ch.t, i);
    const double dy = centered(ch.y, ch.t, i);
    double rx, ry;
    bool bad_x;
    if (system == ComparisonSystem::FisherKPP) {
      rx = y + x * x - x;
      ry = (-lambda + 4.0 * x) * y + C * y * y * y;
      bad_x = std::abs(dx - rx) > tol.absolute + tol.relative * std::max(std::abs(dx), std::abs(rx));
    } else {
      rx = y;
      ry = -lambda * y + C * y * y;
      bad_x = dx - rx > tol.absolute + tol.relative * std::max(std::abs(dx), std::abs(rx));
    }
    const bool bad_y = dy - ry > tol.absolute + tol.relative * std::max(std::abs(dy), std::abs(ry));
    rep.max_x_residual = std::max(rep.max_x_residual, std::abs(dx - rx));
    rep.rows.push_back({ch.t[i], "x", dx, rx, bad_x});
    rep.rows.push_back({ch.t[i], "y", dy, ry, bad_y});
    vx += bad_x;
    vy += bad_y;
    ++n;
  }
  if (n > 0) {
    rep.violated_fraction_x = static_cast<double>(vx) / static_cast<double>(n);
    rep.violated_fraction_y = static_cast<double>(vy) / static_cast<double>(n);
  }
  return rep;
}

double calibrate_constant(const Trajectory& traj, ComparisonSystem system, double lambda) {
  const Channels ch = extract(traj, system);
  double C = 0.0;
  for (std::size_t i = 1; i + 1 < ch.t.size(); ++i) {
    const double x = ch.x[i], y = ch.y[i];
    if (y < 1e-12) continue;
    const double dy = centered(ch.y, ch.t, i);
    if (system == ComparisonSystem::FisherKPP) {
      C = std::max(C, (dy - (-lambda + 4.0 * x) * y) / (y * y * y));
    } else {
      C = std::max(C, (dy + lambda * y) / (y * y));
    }
  }
  return C;
}

}  // namespace ttn
