#pragma once

// Command-line front end. Each subcommand maps to one harness or module
// operation and writes its outputs plus a manifest.ini into --out.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ttn/config.hpp"

namespace ttn {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitInvariant = 2;

struct RunOptions {
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out_dir = ".";
  bool print_config = false;
};

const std::vector<std::string>& command_names();

/// Worker count from the flag, else TTN_THREADS, else the hardware count.
int resolve_threads(std::optional<int> flag);

/// Runs `command` on a parsed config; returns the list of files written
/// (relative to out_dir), manifest last. Throws on failure.
std::vector<std::string> execute(const std::string& command, const Config& cfg, int threads,
                                 const std::string& out_dir);

/// Full CLI: parses argv, runs, maps failures to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ttn
