#include "ttn/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ttn {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write to " + tmp + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move " + tmp + " to " + path);
  }
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << "t,l2,h_minus_delta,grad_l2_sq,mean,g_R,bracket_pred,bracket_real\n";
  for (const auto& r : traj.rows) {
    os << format_double(r.t) << ',' << format_double(r.l2) << ',' << format_double(r.h_minus_delta) << ','
       << format_double(r.grad_l2_sq) << ',' << format_double(r.mean) << ',' << format_double(r.g) << ','
       << format_double(r.bracket_pred) << ',' << format_double(r.bracket_real) << '\n';
  }
  return os.str();
}

std::string trajectory_meta(const Trajectory& traj, const std::string& header) {
  std::ostringstream os;
  os << header;
  if (!header.empty() && header.back() != '\n') os << '\n';
  os << "\n[outcome]\n";
  os << "blew_up = " << (traj.blew_up ? "true" : "false") << '\n';
  os << "tau = " << (traj.tau ? format_double(*traj.tau) : std::string("none")) << '\n';
  os << "threshold = " << format_double(traj.threshold) << '\n';
  os << "delta = " << format_double(traj.delta) << '\n';
  os << "nu_eff = " << format_double(traj.nu_eff) << '\n';
  os << "steps_taken = " << traj.steps_taken << '\n';
  os << "max_l2_sq = " << format_double(traj.max_l2_sq) << '\n';
  os << "dissipation = " << format_double(traj.dissipation) << '\n';
  for (const auto& w : traj.warnings) os << "warning = " << w << '\n';
  return os.str();
}

std::string table_csv(const Table& table, const std::string& comment) {
  std::ostringstream os;
  std::istringstream lines(comment);
  std::string line;
  while (std::getline(lines, line)) os << "# " << line << '\n';
  for (std::size_t j = 0; j < table.columns.size(); ++j) os << (j ? "," : "") << table.columns[j];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << format_double(row[j]);
    os << '\n';
  }
  return os.str();
}

std::string residual_csv(const ResidualReport& report) {
  std::ostringstream os;
  os << "t,channel,lhs,rhs,violated\n";
  for (const auto& r : report.rows) {
    os << format_double(r.t) << ',' << r.channel << ',' << format_double(r.lhs) << ',' << format_double(r.rhs)
       << ',' << (r.violated ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string probe_csv(const std::vector<ProbeRow>& rows) {
  std::ostringstream os;
  os << "hypothesis,ensemble_id,max_ratio\n";
  for (const auto& r : rows) os << r.hypothesis << ',' << r.ensemble_id << ',' << format_double(r.max_ratio) << '\n';
  return os.str();
}

}  // namespace ttn
