#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nrt/cli/config.hpp"
#include "nrt/observables.hpp"

namespace nrt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct CheckResult {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool below = true;  // pass means value <= limit, or value > limit when false
  bool passed = false;
};

struct PeakRow {
  double t = 0.0;
  PeakSet peaks;
};

struct PeakTransition {
  bool single_at_start = false;
  bool stays_double = false;         // two peaks at every t >= t_star
  bool separation_increasing = false;
  double t_star = 0.0;               // first time with two peaks
  bool ok() const { return single_at_start && stays_double && separation_increasing; }
};

/// 1 -> 2 peak transition with strictly growing separation afterwards.
PeakTransition peak_transition(const std::vector<PeakRow>& rows);

struct RunResult {
  int exit_code = kExitOk;
  std::vector<CheckResult> checks;
  std::vector<PeakRow> peaks;
  std::vector<std::string> files;
  std::string report;
  std::string failure;  // name of the failing check or the error message
};

/// Runs config.command, writes profiles, report and plot script into
/// config.output_dir. Numerical errors are caught and reported with exit 3.
RunResult run(const RunConfig& config);

/// "# t x re_psi im_psi abs2" followed by one line per node, %.17g.
std::string format_profile(const GridProfile& profile);

/// Full command-line entry point; returns the process exit code.
int main_entry(int argc, char** argv);

}  // namespace nrt::cli
