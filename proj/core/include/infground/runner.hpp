#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "infground/config.hpp"

namespace infground {

enum ExitCode : int { kExitOk = 0, kExitNotConverged = 1, kExitConfigError = 2, kExitVerificationFailed = 3 };

std::string version();

struct RunSummary {
  int exit_code = kExitOk;
  std::string status;  ///< ok | not_converged | config_error | verification_failed
  std::string report;  ///< text of report.json
  std::vector<std::string> files;  ///< written files, relative to the run directory
};

/// Runs the configured command into `out_dir`, writing config.json,
/// report.json and the command's CSV/JSON artifacts. Library errors are
/// mapped to exit codes rather than thrown; report.json is written whenever
/// the directory is writable.
RunSummary run(const RunConfig& config, const std::filesystem::path& out_dir);

/// report.json for a configuration that failed to parse.
RunSummary config_error_summary(const std::string& message, const std::filesystem::path& out_dir);

}  // namespace infground
