#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "umblt/io/config.hpp"

namespace umblt {

/// Exit statuses of every subcommand.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2 };

struct RunArgs {
  std::string input;  ///< reconstruct: measure output directory; empty means <output_dir>/measurements
};

/// Subcommands: forward, adjoint, control, measure, reconstruct, oracle, stability.
/// Artifacts go to <output_dir>/<subcommand>/ (measure: <output_dir>/measurements/)
/// with manifest.json (config snapshot, certificate, empirical constants and the
/// artifact inventory with SHA-256) and timings.json. The snapshot leaves out
/// output_dir and workers, so the manifest depends on neither.
/// Diagnostics go to `err`; ValidationError gives 1, NumericalError gives 2.
int run(const std::string& subcommand, const RunConfig& config, const RunArgs& args, std::ostream& out,
        std::ostream& err);

/// Parses the command line (CLI11) and dispatches to run().
int run_cli(int argc, char** argv);

}  // namespace umblt
