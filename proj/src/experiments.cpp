#include "ttn/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace ttn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw PlanError("recipe: cannot read " + what + " from '" + s + "'");
  }
}

long long to_integer(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw PlanError("recipe: cannot read " + what + " from '" + s + "'");
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string InitialRecipe::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Constant: os << "constant " << fmt(c); break;
    case Kind::ConstantPlusMode:
      os << "constant_plus_mode " << fmt(c) << ", ";
      for (int i = 0; i < k.dim; ++i) os << (i ? " " : "") << k[i];
      os << ", " << fmt(a);
      break;
    case Kind::RandomTrig: os << "random_trig " << seed << ", " << fmt(amplitude) << ", " << band; break;
  }
  return os.str();
}

InitialRecipe parse_recipe(const std::string& text, int dim) {
  const std::string t = trim(text);
  const auto sp = t.find(' ');
  const std::string head = t.substr(0, sp);
  const std::string rest = sp == std::string::npos ? "" : trim(t.substr(sp + 1));
  InitialRecipe r;
  if (head == "constant") {
    r.kind = InitialRecipe::Kind::Constant;
    r.c = to_double(rest, "constant");
  } else if (head == "constant_plus_mode") {
    const auto parts = split(rest, ',');
    if (parts.size() != 3) throw PlanError("recipe: expected 'constant_plus_mode c, k1 k2, a'");
    r.kind = InitialRecipe::Kind::ConstantPlusMode;
    r.c = to_double(parts[0], "constant");
    std::istringstream ks(parts[1]);
    std::vector<int> comps;
    std::string tok;
    while (ks >> tok) comps.push_back(static_cast<int>(to_integer(tok, "wavevector")));
    if (static_cast<int>(comps.size()) != dim) throw PlanError("recipe: wavevector needs " + std::to_string(dim) + " components");
    r.k = dim == 2 ? Wavevector(comps[0], comps[1]) : Wavevector(comps[0], comps[1], comps[2]);
    r.a = to_double(parts[2], "amplitude");
  } else if (head == "random_trig") {
    const auto parts = split(rest, ',');
    if (parts.size() != 3) throw PlanError("recipe: expected 'random_trig seed, amplitude, band'");
    r.kind = InitialRecipe::Kind::RandomTrig;
    const long long s = to_integer(parts[0], "seed");
    if (s < 0) throw PlanError("recipe: seed must be nonnegative");
    r.seed = static_cast<std::uint64_t>(s);
    r.amplitude = to_double(parts[1], "amplitude");
    r.band = static_cast<int>(to_integer(parts[2], "band"));
    if (r.band < 1) throw PlanError("recipe: band must be at least 1");
  } else {
    throw PlanError("unknown initial recipe '" + head + "' (expected constant, constant_plus_mode, random_trig)");
  }
  return r;
}

SpectralField random_trig(int dim, int N, std::uint64_t seed, double amplitude, int band) {
  if (band > N) throw PlanError("random_trig band exceeds solver cutoff");
  SpectralField u(dim, N, 1);
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto c = u.component(0);
  for (std::size_t i = u.zero_index() + 1; i < u.modes(); ++i) {
    // Indices past the zero mode are exactly S_+ in storage order.
    if (u.wavevector(i).max_abs() > band) continue;
    const double xi = normal(eng);
    const double zeta = normal(eng);
    c[i] = amplitude * Complex(xi, zeta) / std::sqrt(2.0);
    c[u.mirror(i)] = std::conj(c[i]);
  }
  return u;
}

SpectralField build_initial(const InitialRecipe& r, int dim, int N) {
  switch (r.kind) {
    case InitialRecipe::Kind::Constant: return SpectralField::constant(dim, N, r.c);
    case InitialRecipe::Kind::ConstantPlusMode: {
      if (r.k.dim != dim) throw PlanError("recipe wavevector dimension mismatch");
      if (r.k.max_abs() > N) throw PlanError("recipe wavevector outside solver cutoff");
      if (r.k.is_zero()) throw PlanError("recipe wavevector must be nonzero");
      SpectralField u = SpectralField::constant(dim, N, r.c);
      u += SpectralField::cosine(dim, N, r.k, r.a);
      return u;
    }
    case InitialRecipe::Kind::RandomTrig: return random_trig(dim, N, r.seed, r.amplitude, r.band);
  }
  throw PlanError("unhandled recipe");
}

ThetaFamily parse_theta_family(const std::string& name) {
  if (name == "shell") return ThetaFamily::Shell;
  if (name == "flat") return ThetaFamily::Flat;
  throw PlanError("unknown theta family '" + name + "' (expected shell or flat)");
}

std::string to_string(ThetaFamily family) { return family == ThetaFamily::Shell ? "shell" : "flat"; }

int StudyPlan::resolved_band() const {
  if (noise_band > 0) return noise_band;
  return theta_N.empty() ? 0 : *std::max_element(theta_N.begin(), theta_N.end());
}

void StudyPlan::validate() const {
  model.validate();
  solver.validate();
  if (paths < 1) throw PlanError("path count must be at least 1");
  if (threads < 1) throw PlanError("thread count must be at least 1");
  if (theta_N.empty()) throw PlanError("noise required");
  for (int n : theta_N) {
    if (n < 1) throw PlanError("theta N must be at least 1");
    if (n > solver.N) throw PlanError("theta N exceeds solver cutoff");
    if (n > resolved_band()) throw PlanError("theta N exceeds noise band");
  }
}

Interval wilson_interval(long long successes, long long n, double z) {
  if (n <= 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe r;
  if (v.empty()) return {kNaN, kNaN};
  double s = 0.0;
  for (double x : v) s += x;
  r.mean = s / static_cast<double>(v.size());
  if (v.size() < 2) return r;
  double ss = 0.0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return r;
}

double Table::at(std::size_t row, const std::string& column) const {
  const auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw PlanError("no column '" + column + "'");
  return rows.at(row).at(static_cast<std::size_t>(it - columns.begin()));
}

void parallel_for(int n, int threads, const std::function<void(int)>& f) {
  if (n <= 0) return;
  const int workers = std::max(1, std::min(threads, n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  const auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double l2l2_distance(const std::vector<double>& t, const std::vector<double>& sq) {
  if (t.size() != sq.size()) throw PlanError("distance quadrature size mismatch");
  double acc = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) acc += 0.5 * (sq[i] + sq[i - 1]) * (t[i] - t[i - 1]);
  return std::sqrt(acc);
}

// ---------------------------------------------------------------------------

namespace {

ThetaSequence make_theta(const StudyPlan& plan, const NoiseBasis& basis, int N) {
  return plan.theta_family == ThetaFamily::Shell ? theta_shell(basis, N) : theta_flat(basis, N);
}

template <class PathFn>
std::vector<double> per_path(const StudyPlan& plan, PathFn&& fn) {
  std::vector<double> out(static_cast<std::size_t>(plan.paths));
  parallel_for(plan.paths, plan.threads,
               [&](int p) { out[static_cast<std::size_t>(p)] = fn(plan.base_seed + static_cast<std::uint64_t>(p)); });
  return out;
}

}  // namespace

Table scaling_limit_study(const StudyPlan& plan) {
  plan.validate();
  if (!plan.solver.cutoff) throw PlanError("scaling-limit requires a cut-off (set solver R)");
  if (plan.theta_family != ThetaFamily::Shell) throw PlanError("scaling-limit requires the shell theta family");
  const int d = plan.model.dim;
  const SpectralField u0 = build_initial(plan.initial, d, plan.solver.N);

  std::vector<double> times;
  std::vector<SpectralField> reference;
  run(u0, plan.model, plan.solver, std::nullopt, [&](double t, const SpectralField& u) {
    times.push_back(t);
    reference.push_back(u);
  });

  const NoiseBasis basis = build_basis(d, plan.resolved_band());
  Table table{{"N", "theta_linf", "distance_mean", "distance_se", "paths"}, {}};
  for (int N : plan.theta_N) {
    const ThetaSequence theta = make_theta(plan, basis, N);
    const auto dist = per_path(plan, [&](std::uint64_t seed) {
      NoiseDriver driver(seed);
      std::vector<double> sq;
      std::vector<double> ts;
      run(u0, plan.model, plan.solver, NoiseSetup{&basis, &theta, &driver}, [&](double t, const SpectralField& u) {
        const std::size_t j = sq.size();
        if (j >= times.size() || times[j] != t) return;
        sq.push_back(l2_norm_sq(u - reference[j]));
        ts.push_back(t);
      });
      if (sq.size() != times.size()) return std::numeric_limits<double>::infinity();
      return l2l2_distance(ts, sq);
    });
    const MeanSe ms = mean_se(dist);
    table.rows.push_back({static_cast<double>(N), theta.linf_norm(), ms.mean, ms.se, static_cast<double>(plan.paths)});
  }
  return table;
}

Table delayed_blowup_mc(const StudyPlan& plan) {
  plan.validate();
  if (plan.nu_grid.empty()) throw PlanError("delayed-blowup requires a nu grid");
  const int d = plan.model.dim;
  const SpectralField u0 = build_initial(plan.initial, d, plan.solver.N);

  SolverConfig base = plan.solver;
  base.nu = 0.0;
  const Trajectory baseline = run(u0, plan.model, base);
  const double baseline_tau = baseline.tau.value_or(kNaN);

  const NoiseBasis basis = build_basis(d, plan.resolved_band());
  Table table{{"nu", "N", "paths", "survived", "fraction", "wilson_lo", "wilson_hi", "mean_tau_blown", "baseline_tau"},
              {}};
  for (double nu : plan.nu_grid) {
    if (!(nu >= 0.0)) throw PlanError("nu grid entries must be nonnegative");
    SolverConfig cfg = plan.solver;
    cfg.nu = nu;
    for (int N : plan.theta_N) {
      const ThetaSequence theta = make_theta(plan, basis, N);
      // Each path reports tau, or -1 when it survives to T.
      const auto taus = per_path(plan, [&](std::uint64_t seed) {
        NoiseDriver driver(seed);
        const Trajectory tr = run(u0, plan.model, cfg, NoiseSetup{&basis, &theta, &driver});
        return tr.blew_up ? *tr.tau : -1.0;
      });
      long long survived = 0;
      std::vector<double> blown;
      for (double t : taus) {
        if (t < 0.0) {
          ++survived;
        } else {
          blown.push_back(t);
        }
      }
      const Interval w = wilson_interval(survived, plan.paths);
      table.rows.push_back({nu, static_cast<double>(N), static_cast<double>(plan.paths), static_cast<double>(survived),
                            static_cast<double>(survived) / plan.paths, w.lo, w.hi,
                            blown.empty() ? kNaN : mean_se(blown).mean, baseline_tau});
    }
  }
  return table;
}

Table relaxation_enhancing_study(const StudyPlan& plan) {
  plan.validate();
  if (plan.model.kind != ModelKind::Linear || plan.model.alpha != 1.0) {
    throw PlanError("relaxation requires model = linear with alpha = 1");
  }
  if (plan.nu_grid.empty()) throw PlanError("relaxation requires a nu grid");
  if (!(plan.tau > 0.0) || !(plan.target > 0.0)) throw PlanError("relaxation needs tau > 0 and target > 0");
  const int d = plan.model.dim;
  SpectralField u0 = build_initial(plan.initial, d, plan.solver.N);
  const double m = mean(u0);
  SpectralField fluct = u0;
  fluct.component(0)[fluct.zero_index()] = 0.0;
  const double fn = l2_norm(fluct);
  if (fn > 0.0) {
    fluct *= 1.0 / fn;
    u0 = fluct;
    u0.component(0)[u0.zero_index()] = m;
  }

  const NoiseBasis basis = build_basis(d, plan.resolved_band());
  Table table{{"nu", "N", "paths", "successes", "probability", "wilson_lo", "wilson_hi", "benchmark"}, {}};
  for (double nu : plan.nu_grid) {
    if (!(nu >= 0.0)) throw PlanError("nu grid entries must be nonnegative");
    SolverConfig cfg = plan.solver;
    cfg.nu = nu;
    cfg.T = plan.tau;
    for (int N : plan.theta_N) {
      const ThetaSequence theta = make_theta(plan, basis, N);
      const auto hit = per_path(plan, [&](std::uint64_t seed) {
        NoiseDriver driver(seed);
        const Trajectory tr = run(u0, plan.model, cfg, NoiseSetup{&basis, &theta, &driver});
        if (tr.blew_up) return 0.0;
        SpectralField diff = tr.final_field;
        diff.component(0)[diff.zero_index()] -= m;
        return l2_norm(diff) < plan.target ? 1.0 : 0.0;
      });
      long long s = 0;
      for (double h : hit) s += h > 0.5;
      const Interval w = wilson_interval(s, plan.paths);
      table.rows.push_back({nu, static_cast<double>(N), static_cast<double>(plan.paths), static_cast<double>(s),
                            static_cast<double>(s) / plan.paths, w.lo, w.hi,
                            std::exp(-kFourPiSq * (1.0 + nu) * plan.tau)});
    }
  }
  return table;
}

Table triviality_study(const StudyPlan& plan) {
  plan.validate();
  if (!plan.solver.cutoff) throw PlanError("triviality requires a cut-off (set solver R)");
  if (plan.theta_family != ThetaFamily::Flat) throw PlanError("triviality requires the flat theta family");
  const int d = plan.model.dim;
  std::vector<Wavevector> modes = plan.monitored;
  if (modes.empty()) {
    for (int j = 0; j < d; ++j) {
      Wavevector k = d == 2 ? Wavevector(0, 0) : Wavevector(0, 0, 0);
      k.c[static_cast<std::size_t>(j)] = 1;
      modes.push_back(k);
    }
  }
  const SpectralField u0 = build_initial(plan.initial, d, plan.solver.N);
  const NoiseBasis basis = build_basis(d, plan.resolved_band());

  Table table;
  table.columns = {"N", "theta_l2_sq", "lambda_N"};
  for (std::size_t j = 0; j < modes.size(); ++j) {
    table.columns.push_back("mode" + std::to_string(j) + "_mean");
    table.columns.push_back("mode" + std::to_string(j) + "_se");
  }
  table.columns.push_back("decay_mean");
  table.columns.push_back("decay_se");

  const std::size_t nm = modes.size();
  for (int N : plan.theta_N) {
    const ThetaSequence theta = make_theta(plan, basis, N);
    std::vector<std::vector<double>> sups(static_cast<std::size_t>(plan.paths));
    parallel_for(plan.paths, plan.threads, [&](int p) {
      NoiseDriver driver(plan.base_seed + static_cast<std::uint64_t>(p));
      std::vector<Complex> integral(nm, 0.0), last(nm, 0.0);
      std::vector<double> sup(nm, 0.0);
      double t_last = 0.0;
      bool first = true;
      run(u0, plan.model, plan.solver, NoiseSetup{&basis, &theta, &driver}, [&](double t, const SpectralField& u) {
        for (std::size_t j = 0; j < nm; ++j) {
          const Complex c = u.at(modes[j]);
          if (!first) integral[j] += 0.5 * (c + last[j]) * (t - t_last);
          last[j] = c;
          sup[j] = std::max(sup[j], std::abs(integral[j]));
        }
        t_last = t;
        first = false;
      });
      sups[static_cast<std::size_t>(p)] = sup;
    });
    std::vector<double> row{static_cast<double>(N), theta.l2_norm_sq(),
                            kFourPiSq * (1.0 + plan.solver.nu * theta.l2_norm_sq())};
    std::vector<double> combined(static_cast<std::size_t>(plan.paths), 0.0);
    for (std::size_t j = 0; j < nm; ++j) {
      std::vector<double> col;
      for (std::size_t p = 0; p < sups.size(); ++p) {
        col.push_back(sups[p][j]);
        combined[p] += sups[p][j] / static_cast<double>(nm);
      }
      const MeanSe ms = mean_se(col);
      row.push_back(ms.mean);
      row.push_back(ms.se);
    }
    const MeanSe ms = mean_se(combined);
    row.push_back(ms.mean);
    row.push_back(ms.se);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace ttn
