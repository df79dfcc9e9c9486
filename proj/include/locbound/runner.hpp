#pragma once

#include <iosfwd>

#include "locbound/config.hpp"

namespace locbound::runner {

inline constexpr const char* kToolVersion = "locbound 1.0.0";

/// Executes the configured experiment. Writes the CSV and its metadata
/// sidecar (<out>.meta.json) for the data-producing modes; `verify` prints a
/// pass/fail table to `log` instead. Returns the process exit code:
/// 0 success, 2 numeric failure at one or more sweep points, 3 I/O failure.
int run(const config::ExperimentConfig& cfg, std::ostream& log);

}  // namespace locbound::runner
