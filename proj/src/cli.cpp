#include "ttn/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <sstream>
#include <thread>

#include "ttn/io.hpp"

#ifndef TTN_VERSION
#define TTN_VERSION "unknown"
#endif

namespace ttn {

namespace {

namespace fs = std::filesystem;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

struct Writer {
  std::string dir;
  std::vector<std::string> written;
  std::vector<std::pair<std::string, std::string>> notes;  // extra [run] entries
  void put(const std::string& name, const std::string& content) {
    atomic_write((fs::path(dir) / name).string(), content);
    written.push_back(name);
  }
};

ThetaSequence theta_for(const Config& cfg, const NoiseBasis& basis, int N) {
  return cfg.noise.family == ThetaFamily::Shell ? theta_shell(basis, N) : theta_flat(basis, N);
}

void cmd_simulate(const Config& cfg, Writer& w, const std::string& header) {
  const SpectralField u0 = build_initial(cfg.initial, cfg.model.dim, cfg.solver.N);
  Trajectory traj;
  if (cfg.noise.present) {
    if (cfg.noise.theta_N.size() != 1) throw ConfigError("simulate takes a single noise.theta_N entry");
    const NoiseBasis basis = build_basis(cfg.model.dim, cfg.noise.band);
    const ThetaSequence theta = theta_for(cfg, basis, cfg.noise.theta_N.front());
    NoiseDriver driver(cfg.study.seed);
    traj = run(u0, cfg.model, cfg.solver, NoiseSetup{&basis, &theta, &driver});
    std::ostringstream th;
    write_theta_csv(th, basis, theta);
    w.put("theta.csv", th.str());
  } else {
    traj = run(u0, cfg.model, cfg.solver);
  }
  w.put("trajectory.csv", trajectory_csv(traj));
  w.put("trajectory.meta", trajectory_meta(traj, header + "\n[code]\nversion = " TTN_VERSION "\n"));
  w.notes.emplace_back("blew_up", traj.blew_up ? "true" : "false");
  w.notes.emplace_back("tau", traj.tau ? format_double(*traj.tau) : "none");
  std::ostringstream snap;
  write_snapshot(snap, traj.final_field);
  w.put("final.ttnf", snap.str());
}

ComparisonSystem system_for(const Config& cfg) {
  const std::string& s = cfg.study.system;
  ComparisonSystem sys;
  if (s == "auto") {
    if (cfg.model.kind == ModelKind::FisherKPP) return ComparisonSystem::FisherKPP;
    if (cfg.model.kind == ModelKind::KuramotoSivashinsky) return ComparisonSystem::KSE;
    throw ConfigError("ode-check has no comparison system for model " + to_string(cfg.model.kind));
  }
  sys = parse_comparison_system(s);
  const ModelKind want = sys == ComparisonSystem::FisherKPP ? ModelKind::FisherKPP : ModelKind::KuramotoSivashinsky;
  if (cfg.model.kind != want) throw ConfigError("study.system " + s + " does not match model " + to_string(cfg.model.kind));
  return sys;
}

void cmd_ode_check(const Config& cfg, Writer& w, const std::string& header) {
  const ComparisonSystem sys = system_for(cfg);
  const bool fkpp = sys == ComparisonSystem::FisherKPP;
  const double lambda = fkpp ? fkpp_lambda(cfg.solver.nu) : kse_lambda(cfg.solver.nu);
  const double C = cfg.study.comparison_C.value_or(fkpp ? kDefaultFkppC : kDefaultKseC);
  const SpectralField u0 = build_initial(cfg.initial, cfg.model.dim, cfg.solver.N);
  const Trajectory traj = run(u0, cfg.model, cfg.solver);
  const ResidualReport rep =
      check_pde_inequality(traj, sys, lambda, C, ResidualTolerance{cfg.study.residual_tolerance, 0.0});
  w.put("trajectory.csv", trajectory_csv(traj));
  w.put("ode_check.csv", residual_csv(rep));
  std::ostringstream os;
  os << header << "\n[comparison]\n";
  os << "system = " << (fkpp ? "fkpp" : "kse") << '\n';
  os << "lambda = " << format_double(lambda) << '\n';
  os << "C = " << format_double(C) << '\n';
  os << "C_source = " << (cfg.study.comparison_C ? "config" : "calibrated stand-in") << '\n';
  os << "violated_fraction_x = " << format_double(rep.violated_fraction_x) << '\n';
  os << "violated_fraction_y = " << format_double(rep.violated_fraction_y) << '\n';
  os << "max_x_residual = " << format_double(rep.max_x_residual) << '\n';
  os << "blew_up = " << (traj.blew_up ? "true" : "false") << '\n';
  w.put("ode_check.meta", os.str());
}

void cmd_probe(const Config& cfg, Writer& w) {
  if (cfg.study.ensemble_size < 2) throw ConfigError("probe-hypotheses needs study.ensemble_size >= 2");
  if (cfg.study.scales.empty()) throw ConfigError("probe-hypotheses needs study.scales");
  std::vector<SpectralField> ensemble;
  for (int i = 0; i < cfg.study.ensemble_size; ++i) {
    const double amp = cfg.study.scales[static_cast<std::size_t>(i) % cfg.study.scales.size()];
    ensemble.push_back(random_trig(cfg.model.dim, cfg.solver.N, cfg.study.seed + static_cast<std::uint64_t>(i), amp,
                                   cfg.solver.N));
  }
  const std::string id = "random_trig_seed" + std::to_string(cfg.study.seed) + "_n" +
                         std::to_string(cfg.study.ensemble_size);
  const auto rows = hypothesis_probe(cfg.model, HypothesisParams::defaults(cfg.model.kind), ensemble, id);
  w.put("probes.csv", probe_csv(rows));
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate",   "scaling-limit", "delayed-blowup",  "relaxation",
                                              "triviality", "ode-check",     "probe-hypotheses"};
  return names;
}

int resolve_threads(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1) throw ConfigError("--threads must be at least 1");
    return *flag;
  }
  if (const char* env = std::getenv("TTN_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 4096) throw ConfigError(std::string("TTN_THREADS must be a positive integer, got '") + env + "'");
    return static_cast<int>(v);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<std::string> execute(const std::string& command, const Config& cfg, int threads,
                                 const std::string& out_dir) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end()) throw ConfigError("unknown command " + command);
  if (!cfg.run_command.empty() && cfg.run_command != command) {
    throw ConfigError("manifest was written by '" + cfg.run_command + "', not '" + command + "'");
  }
  require_noise(cfg, command);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir);

  const std::string started = utc_now();
  const std::string resolved = serialize_config(cfg);
  Writer w{out_dir, {}, {}};

  if (command == "simulate") {
    cmd_simulate(cfg, w, resolved);
  } else if (command == "ode-check") {
    cmd_ode_check(cfg, w, resolved);
  } else if (command == "probe-hypotheses") {
    cmd_probe(cfg, w);
  } else {
    const StudyPlan plan = make_plan(cfg, threads);
    Table table;
    std::string name;
    if (command == "scaling-limit") {
      table = scaling_limit_study(plan);
      name = "scaling_limit.csv";
    } else if (command == "delayed-blowup") {
      table = delayed_blowup_mc(plan);
      name = "delayed_blowup.csv";
    } else if (command == "relaxation") {
      table = relaxation_enhancing_study(plan);
      name = "relaxation.csv";
    } else {
      table = triviality_study(plan);
      name = "triviality.csv";
    }
    w.put(name, table_csv(table, "command = " + command + "\n" + resolved));
  }

  std::ostringstream m;
  m << resolved << "\n[run]\n";
  m << "command = " << command << '\n';
  m << "seed = " << cfg.study.seed << '\n';
  m << "version = " << TTN_VERSION << '\n';
  m << "started = " << started << '\n';
  m << "finished = " << utc_now() << '\n';
  m << "outputs = " << join(w.written) << '\n';
  for (const auto& [k, v] : w.notes) m << k << " = " << v << '\n';
  w.put("manifest.ini", m.str());
  return w.written;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transport-noise SPDE simulator on the periodic torus"};
  app.footer(
      "Units: space is the unit torus [0,1)^d; dt, T and tau are model time; nu, R, delta and\n"
      "thresholds are dimensionless. Config files use [model], [solver], [noise], [study];\n"
      "manifest.ini files written by a run can be passed back with --config, or to 'replay'.\n"
      "Exit codes: 0 success (blow-up in simulate included), 1 configuration error, 2 invariant violation.");
  app.require_subcommand(1, 1);

  RunOptions opt;
  std::uint64_t seed = 0;
  int threads = 0;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "configuration or manifest file")->required();
    sub->add_option("--seed", seed, "base seed (overrides study.seed)");
    sub->add_option("--threads", threads, "worker threads; wall time only (fallback TTN_THREADS)");
    sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    sub->add_flag("--print-config", opt.print_config, "print the resolved configuration and exit");
  };
  for (const auto& name : command_names()) add_common(app.add_subcommand(name, "run " + name));
  add_common(app.add_subcommand("replay", "re-run the command recorded in a manifest"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  opt.command = sub->get_name();
  if (sub->count("--seed")) opt.seed = seed;
  if (sub->count("--threads")) opt.threads = threads;

  try {
    Config cfg = parse_config(opt.config_path);
    if (opt.seed) cfg.study.seed = *opt.seed;
    if (opt.command == "replay") {
      if (cfg.run_command.empty()) throw ConfigError(opt.config_path + ": no [run] command to replay");
      opt.command = cfg.run_command;
    }
    if (opt.print_config) {
      out << serialize_config(cfg);
      return kExitOk;
    }
    const int n_threads = resolve_threads(opt.threads);
    const auto files = execute(opt.command, cfg, n_threads, opt.out_dir);
    for (const auto& f : files) out << (fs::path(opt.out_dir) / f).string() << '\n';
    return kExitOk;
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const PlanError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ModelError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NoiseError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const OdeError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInvariant;
  }
}

}  // namespace ttn
