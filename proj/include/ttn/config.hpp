#pragma once

// Line-oriented "key = value" configuration with sections [model], [solver],
// [noise], [study] (and [run] in manifests written by the CLI).
//
// Units: time quantities (dt, T, tau) are in model time on the unit torus,
// viscosity nu, R and thresholds are dimensionless.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ttn/experiments.hpp"

namespace ttn {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NoiseConfig {
  bool present = false;
  ThetaFamily family = ThetaFamily::Shell;
  std::vector<int> theta_N;
  int band = 0;  // 0: max of theta_N
};

struct StudyConfig {
  int paths = 100;
  std::uint64_t seed = 0;
  std::vector<double> nu_grid;
  double tau = 0.1;
  double target = 0.1;
  std::string system = "auto";            // ode-check: auto, fkpp, kse
  std::optional<double> comparison_C;     // ode-check: calibrated default when unset
  double residual_tolerance = 1e-3;       // ode-check absolute tolerance
  int ensemble_size = 8;                  // probe-hypotheses
  std::vector<double> scales{1.0, 2.0, 4.0, 8.0};
};

struct Config {
  ModelSpec model;
  InitialRecipe initial;
  SolverConfig solver;
  NoiseConfig noise;
  StudyConfig study;
  std::string run_command;  // from a manifest's [run] section, if any
  std::string source = "<string>";
};

/// Throws ConfigError("<source>:<line>: ...") on unknown sections or keys,
/// malformed values and inconsistent combinations.
Config parse_config_text(const std::string& text, const std::string& source = "<string>");
Config parse_config(const std::string& path);

/// Every resolved setting in canonical order and formatting.
std::string serialize_config(const Config& cfg);

/// Commands that need a [noise] section.
bool command_is_stochastic(const std::string& command);
/// Throws ConfigError("noise required") when a stochastic command has no noise.
void require_noise(const Config& cfg, const std::string& command);

StudyPlan make_plan(const Config& cfg, int threads);

}  // namespace ttn
