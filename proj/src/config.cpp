#include "ttn/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "ttn/ode_comparison.hpp"

namespace ttn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Ctx {
  std::string source;
  int line = 0;
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(source + ":" + std::to_string(line) + ": " + msg);
  }
};

double as_double(const Ctx& c, const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  c.fail("expected a real number for " + key + ", got '" + v + "'");
}

long long as_integer(const Ctx& c, const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long d = std::stoll(v, &pos);
    if (pos == v.size()) return d;
  } catch (const std::exception&) {
  }
  c.fail("expected an integer for " + key + ", got '" + v + "'");
}

int as_int(const Ctx& c, const std::string& key, const std::string& v) {
  const long long x = as_integer(c, key, v);
  if (x < -2147483647LL || x > 2147483647LL) c.fail(key + " out of range");
  return static_cast<int>(x);
}

std::vector<std::string> list_items(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(v);
  while (std::getline(is, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& v, const std::function<std::string(const T&)>& f) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + f(v[i]);
  return s;
}

}  // namespace

Config parse_config_text(const std::string& text, const std::string& source) {
  Config cfg;
  cfg.source = source;
  Ctx ctx{source, 0};

  std::string section;
  std::set<std::string> seen_sections;
  std::set<std::string> seen_keys;
  std::optional<std::pair<double, int>> alpha_entry;
  std::optional<std::pair<std::string, int>> initial_entry;
  std::optional<int> dim_line;
  bool noise_nonempty = false;

  std::istringstream is(text);
  std::string raw;
  while (std::getline(is, raw)) {
    ++ctx.line;
    std::string line = raw;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') ctx.fail("malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      static const std::set<std::string> known{"model", "solver", "noise", "study", "run"};
      if (!known.count(section)) ctx.fail("unknown section [" + section + "]");
      if (!seen_sections.insert(section).second) ctx.fail("duplicate section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) ctx.fail("expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) ctx.fail("key '" + key + "' outside any section");
    const std::string full = section + "." + key;
    if (!seen_keys.insert(full).second) ctx.fail("duplicate key " + full);
    if (value.empty()) ctx.fail("empty value for " + full);

    if (section == "model") {
      if (key == "kind") {
        try {
          cfg.model.kind = parse_model_kind(value);
        } catch (const ModelError& e) {
          ctx.fail(e.what());
        }
      } else if (key == "dim") {
        cfg.model.dim = as_int(ctx, full, value);
        if (cfg.model.dim != 2 && cfg.model.dim != 3) ctx.fail("model.dim must be 2 or 3");
        dim_line = ctx.line;
      } else if (key == "alpha") {
        alpha_entry = {as_double(ctx, full, value), ctx.line};
      } else if (key == "lambda") {
        cfg.model.lambda = as_double(ctx, full, value);
      } else if (key == "chi") {
        cfg.model.chi = as_double(ctx, full, value);
        if (!(cfg.model.chi > 0.0)) ctx.fail("model.chi must be positive");
      } else if (key == "initial") {
        initial_entry = {value, ctx.line};
      } else {
        ctx.fail("unknown key " + full);
      }
    } else if (section == "solver") {
      auto& s = cfg.solver;
      if (key == "N") {
        s.N = as_int(ctx, full, value);
        if (s.N < 2) ctx.fail("solver.N must be at least 2");
      } else if (key == "dt") {
        s.dt = as_double(ctx, full, value);
        if (!(s.dt > 0.0)) ctx.fail("solver.dt must be positive");
      } else if (key == "T") {
        s.T = as_double(ctx, full, value);
        if (!(s.T > 0.0)) ctx.fail("solver.T must be positive");
      } else if (key == "nu") {
        s.nu = as_double(ctx, full, value);
        if (!(s.nu >= 0.0)) ctx.fail("solver.nu must be nonnegative");
      } else if (key == "R") {
        if (value != "none") {
          const double R = as_double(ctx, full, value);
          if (!(R > 0.0)) ctx.fail("solver.R must be positive or 'none'");
          CutoffSpec c = s.cutoff.value_or(CutoffSpec{});
          c.R = R;
          s.cutoff = c;
        }
      } else if (key == "delta") {
        s.delta = as_double(ctx, full, value);
        if (!(s.delta > 0.0 && s.delta <= 1.0)) ctx.fail("solver.delta must lie in (0, 1]");
      } else if (key == "blowup_threshold") {
        if (value != "auto") {
          const double b = as_double(ctx, full, value);
          if (!(b > 0.0)) ctx.fail("solver.blowup_threshold must be positive or 'auto'");
          s.blowup_threshold = b;
        }
      } else if (key == "record_every") {
        s.record_every = as_int(ctx, full, value);
        if (s.record_every < 1) ctx.fail("solver.record_every must be at least 1");
      } else {
        ctx.fail("unknown key " + full);
      }
    } else if (section == "noise") {
      noise_nonempty = true;
      auto& n = cfg.noise;
      if (key == "theta") {
        try {
          n.family = parse_theta_family(value);
        } catch (const PlanError& e) {
          ctx.fail(e.what());
        }
      } else if (key == "theta_N") {
        for (const auto& item : list_items(value)) {
          const int v = as_int(ctx, full, item);
          if (v < 1) ctx.fail("noise.theta_N entries must be at least 1");
          n.theta_N.push_back(v);
        }
        if (n.theta_N.empty()) ctx.fail("noise.theta_N is empty");
      } else if (key == "band") {
        if (value != "auto") {
          n.band = as_int(ctx, full, value);
          if (n.band < 1) ctx.fail("noise.band must be at least 1 or 'auto'");
        }
      } else {
        ctx.fail("unknown key " + full);
      }
    } else if (section == "study") {
      auto& st = cfg.study;
      if (key == "paths") {
        st.paths = as_int(ctx, full, value);
        if (st.paths < 1) ctx.fail("study.paths must be at least 1");
      } else if (key == "seed") {
        const long long v = as_integer(ctx, full, value);
        if (v < 0) ctx.fail("study.seed must be nonnegative");
        st.seed = static_cast<std::uint64_t>(v);
      } else if (key == "nu_grid") {
        st.nu_grid.clear();
        for (const auto& item : list_items(value)) {
          const double v = as_double(ctx, full, item);
          if (!(v >= 0.0)) ctx.fail("study.nu_grid entries must be nonnegative");
          st.nu_grid.push_back(v);
        }
      } else if (key == "tau") {
        st.tau = as_double(ctx, full, value);
        if (!(st.tau > 0.0)) ctx.fail("study.tau must be positive");
      } else if (key == "target") {
        st.target = as_double(ctx, full, value);
        if (!(st.target > 0.0)) ctx.fail("study.target must be positive");
      } else if (key == "system") {
        if (value != "auto" && value != "fkpp" && value != "kse") ctx.fail("study.system must be auto, fkpp or kse");
        st.system = value;
      } else if (key == "comparison_C") {
        if (value != "auto") st.comparison_C = as_double(ctx, full, value);
      } else if (key == "residual_tolerance") {
        st.residual_tolerance = as_double(ctx, full, value);
        if (!(st.residual_tolerance >= 0.0)) ctx.fail("study.residual_tolerance must be nonnegative");
      } else if (key == "ensemble_size") {
        st.ensemble_size = as_int(ctx, full, value);
        if (st.ensemble_size < 0) ctx.fail("study.ensemble_size must be nonnegative");
      } else if (key == "scales") {
        st.scales.clear();
        for (const auto& item : list_items(value)) st.scales.push_back(as_double(ctx, full, item));
      } else {
        ctx.fail("unknown key " + full);
      }
    } else if (section == "run") {
      // Manifest bookkeeping; only the command is used.
      static const std::set<std::string> known{"command", "seed", "version", "started", "finished", "outputs", "blew_up", "tau"};
      if (!known.count(key)) ctx.fail("unknown key " + full);
      if (key == "command") cfg.run_command = value;
    }
  }

  // Cross-key resolution.
  const auto fixed = model_alpha(cfg.model.kind);
  if (alpha_entry) {
    ctx.line = alpha_entry->second;
    if (fixed && alpha_entry->first != *fixed) ctx.fail("alpha fixed by model");
    if (!(alpha_entry->first >= 1.0)) ctx.fail("model.alpha must be >= 1");
    cfg.model.alpha = alpha_entry->first;
  } else {
    cfg.model.alpha = fixed.value_or(1.0);
  }
  if (cfg.solver.cutoff) cfg.solver.cutoff->delta = cfg.solver.delta;
  const std::string initial_text = initial_entry ? initial_entry->first : "constant_plus_mode 0, 1 0, 1";
  ctx.line = initial_entry ? initial_entry->second : (dim_line ? *dim_line : 0);
  if (!initial_entry && cfg.model.dim == 3) {
    cfg.initial = parse_recipe("constant_plus_mode 0, 1 0 0, 1", 3);
  } else {
    try {
      cfg.initial = parse_recipe(initial_text, cfg.model.dim);
    } catch (const PlanError& e) {
      ctx.fail(e.what());
    }
  }
  if (cfg.model.kind == ModelKind::KellerSegel) {
    const SpectralField u0 = build_initial(cfg.initial, cfg.model.dim, std::max(cfg.solver.N, 1));
    if (std::abs(mean(u0)) >= kZeroMeanTolerance) ctx.fail("keller_segel evolves the zero-mean variable; initial mean must be 0");
  }
  cfg.noise.present = noise_nonempty;
  if (cfg.noise.present) {
    ctx.line = 0;
    if (cfg.noise.theta_N.empty()) throw ConfigError(source + ": [noise] needs theta_N");
    const int maxN = *std::max_element(cfg.noise.theta_N.begin(), cfg.noise.theta_N.end());
    if (cfg.noise.band == 0) cfg.noise.band = maxN;
    if (maxN > cfg.noise.band) throw ConfigError(source + ": noise.theta_N exceeds noise.band");
    if (maxN > cfg.solver.N) throw ConfigError(source + ": noise.theta_N exceeds solver.N");
  }
  try {
    cfg.model.validate();
    cfg.solver.validate();
  } catch (const ModelError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

Config parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::string serialize_config(const Config& cfg) {
  std::ostringstream os;
  const auto& m = cfg.model;
  const auto& s = cfg.solver;
  os << "[model]\n";
  os << "kind = " << to_string(m.kind) << "\n";
  os << "dim = " << m.dim << "\n";
  os << "alpha = " << fmt(m.alpha) << "\n";
  os << "lambda = " << fmt(m.lambda) << "\n";
  os << "chi = " << fmt(m.chi) << "\n";
  os << "initial = " << cfg.initial.to_string() << "\n";
  os << "\n[solver]\n";
  os << "N = " << s.N << "\n";
  os << "dt = " << fmt(s.dt) << "\n";
  os << "T = " << fmt(s.T) << "\n";
  os << "nu = " << fmt(s.nu) << "\n";
  os << "R = " << (s.cutoff ? fmt(s.cutoff->R) : std::string("none")) << "\n";
  os << "delta = " << fmt(s.delta) << "\n";
  os << "blowup_threshold = " << (s.blowup_threshold ? fmt(*s.blowup_threshold) : std::string("auto")) << "\n";
  os << "record_every = " << s.record_every << "\n";
  os << "\n[noise]\n";
  if (cfg.noise.present) {
    os << "theta = " << to_string(cfg.noise.family) << "\n";
    os << "theta_N = " << join<int>(cfg.noise.theta_N, [](const int& v) { return std::to_string(v); }) << "\n";
    os << "band = " << cfg.noise.band << "\n";
  }
  const auto& st = cfg.study;
  os << "\n[study]\n";
  os << "paths = " << st.paths << "\n";
  os << "seed = " << st.seed << "\n";
  if (!st.nu_grid.empty()) os << "nu_grid = " << join<double>(st.nu_grid, [](const double& v) { return fmt(v); }) << "\n";
  os << "tau = " << fmt(st.tau) << "\n";
  os << "target = " << fmt(st.target) << "\n";
  os << "system = " << st.system << "\n";
  os << "comparison_C = " << (st.comparison_C ? fmt(*st.comparison_C) : std::string("auto")) << "\n";
  os << "residual_tolerance = " << fmt(st.residual_tolerance) << "\n";
  os << "ensemble_size = " << st.ensemble_size << "\n";
  if (!st.scales.empty()) os << "scales = " << join<double>(st.scales, [](const double& v) { return fmt(v); }) << "\n";
  return os.str();
}

bool command_is_stochastic(const std::string& command) {
  return command == "scaling-limit" || command == "delayed-blowup" || command == "relaxation" ||
         command == "triviality";
}

void require_noise(const Config& cfg, const std::string& command) {
  if (command_is_stochastic(command) && !cfg.noise.present) throw ConfigError("noise required");
}

StudyPlan make_plan(const Config& cfg, int threads) {
  StudyPlan p;
  p.model = cfg.model;
  p.solver = cfg.solver;
  p.initial = cfg.initial;
  p.theta_family = cfg.noise.family;
  p.theta_N = cfg.noise.theta_N;
  p.noise_band = cfg.noise.band;
  p.nu_grid = cfg.study.nu_grid;
  p.paths = cfg.study.paths;
  p.base_seed = cfg.study.seed;
  p.threads = threads;
  p.tau = cfg.study.tau;
  p.target = cfg.study.target;
  return p;
}

}  // namespace ttn
