#pragma once

#include <iosfwd>

#include "brw/config.hpp"

namespace brw {

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitWarning = 3, kExitRuntime = 4 };

/// Builds the config from an optional --config file overlaid with flags.
/// Throws UnknownCommand, BadLawSpec or BadNumeric.
ExperimentConfig parse_config(int argc, const char* const* argv);

/// Runs one command end to end and returns the exit code. Diagnostics go to
/// `err`, summaries to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Runs an already validated config; returns the exit code.
int run_experiment(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

}  // namespace brw
