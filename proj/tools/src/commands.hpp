#pragma once

// The three batch commands behind the `qbd` front-end.  Each returns a
// process exit code: 0 success, 1 validation failure, 2 numerical failure,
// 3 verification (acceptance) failure.

#include <iosfwd>
#include <string>

#include "scenario.hpp"

namespace qbd::cli {

/// Sweep the survival curve over the configured time grid and write the CSV
/// (plus a companion gnuplot snippet next to it).  Rows that fail
/// numerically are emitted with `nan` sentinels and turn the exit code
/// into 2.
int run_sweep(const ScenarioConfig& cfg, std::ostream& diag);

/// Fit the two asymptotic windows of a sweep CSV and write the parameter
/// report as JSON (to `outputPath`, or stdout when empty).
int run_fit(const std::string& inputPath, const std::string& outputPath,
            std::ostream& diag);

/// Run the verification battery for the scenario and emit the per-check
/// JSON report (always to stdout; also to `outputPath` when given).
int run_verify(const ScenarioConfig& cfg, const std::string& outputPath,
               std::ostream& diag);

}  // namespace qbd::cli
