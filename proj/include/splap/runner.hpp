#pragma once

// Subcommand dispatch: runs one experiment and writes
//   <out>/<subcommand>.csv            per-estimate rows
//   <out>/<subcommand>.json           summary [{quantity, value, stderr, threshold, pass}]
//   <out>/<subcommand>.manifest.json  config echo, version, timestamp, seed, files, duration

#include <filesystem>
#include <string>
#include <vector>

#include "splap/config.hpp"

namespace splap {

struct SummaryRow {
  std::string quantity;
  double value = 0.0;
  /// NaN when the quantity is not a Monte Carlo estimate.
  double std_error = 0.0;
  /// NaN for report-only quantities.
  double threshold = 0.0;
  bool pass = true;
};

struct RunResult {
  std::string subcommand;
  std::vector<SummaryRow> summary;
  std::vector<std::string> files;
  bool passed = true;
  /// Names of the failing quantities, comma separated.
  std::string failures;
  double seconds = 0.0;
};

/// Known subcommand names, in documentation order.
const std::vector<std::string>& subcommands();

/// Runs `subcommand` and writes its files into `out_dir` (created if needed).
/// Throws Error on invalid configuration, IO problems and solver failures.
RunResult run_subcommand(const std::string& subcommand, const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir);

}  // namespace splap
