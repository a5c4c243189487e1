#ifndef SUBFLOW_CLI_HPP
#define SUBFLOW_CLI_HPP

#include <filesystem>

#include "subflow/config.hpp"

namespace subflow::cli {

// Each command returns its process exit code directly:
//   0 success, 1 assertion failed, 2 configuration, 3 numerical, 4 precondition.
// Reports go to out_dir (created on demand); progress lines go to stdout.

/// Residual suites with grid refinement. Exit 0 iff every observed
/// convergence order clears its gate (or the residual sits at rounding level).
int cmd_check(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Runs the gradient flow from the configured initial data; writes the trace
/// CSV, the final field dump, and a JSON summary.
int cmd_flow(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Stability analysis of a dumped field: certificate scan, probe sweep, and
/// optional Rayleigh minimization, merged into one verdict JSON.
int cmd_stability(const RunConfig& cfg, const std::filesystem::path& field_path,
                  const std::filesystem::path& out_dir);

/// Per-axis conformal index identities plus their summed reduction.
int cmd_leung(const RunConfig& cfg, const std::filesystem::path& field_path,
              const std::filesystem::path& out_dir);

/// Argument parsing and dispatch for the `subflow` binary.
int subflow_main(int argc, const char* const* argv);

}  // namespace subflow::cli

#endif  // SUBFLOW_CLI_HPP
