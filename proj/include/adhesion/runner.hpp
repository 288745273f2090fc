#pragma once

#include <cstdint>
#include <string>

#include "adhesion/scenario.hpp"

namespace adhesion {

struct RunOptions {
  std::string out_dir;          // overrides the scenario's when non-empty
  std::string scenario_text;    // raw scenario bytes, hashed into the manifest
  unsigned threads = 1;
  double velocity_bias = 0.0;   // fault-injection hook (gated by the CLI)
};

// Exit codes shared with the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitInternalError = 3;

/// Cluster-state CSVs per grid time, turbulence report JSON, process-bundle
/// CSVs per sample, delta-shock geometry JSON, and a manifest with content
/// digests.
int run_simulate(const Scenario& sc, const RunOptions& opt);

/// Runs the configured checks; writes a JSON report bundle; exit status 0
/// iff every check passes.
int run_verify(const Scenario& sc, const RunOptions& opt);

/// Convergence table over the scenario's sweep sizes:
/// n, max turbulent-interval width, cumulative sup distance, runtime.
int run_sweep(const Scenario& sc, const RunOptions& opt);

}  // namespace adhesion
