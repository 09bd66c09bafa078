#pragma once

// Text and binary outputs. Every floating value is printed with 17
// significant digits so that equal runs give byte-equal files, and every file
// is written to a temporary sibling first and renamed into place.

#include <string>
#include <vector>

#include "ttn/experiments.hpp"
#include "ttn/ode_comparison.hpp"

namespace ttn {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "%.17g"; non-finite values as inf, -inf, nan.
std::string format_double(double v);

/// Writes content to path.tmp, then renames it over path.
void atomic_write(const std::string& path, const std::string& content);

std::string trajectory_csv(const Trajectory& traj);
/// key = value lines describing the run outcome, appended to `header`.
std::string trajectory_meta(const Trajectory& traj, const std::string& header);

/// `comment` is emitted line by line behind "# " before the column header.
std::string table_csv(const Table& table, const std::string& comment);
std::string residual_csv(const ResidualReport& report);
std::string probe_csv(const std::vector<ProbeRow>& rows);

}  // namespace ttn
