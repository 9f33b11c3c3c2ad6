#pragma once

#include <iosfwd>

namespace heisfan::cli {

/// Exit statuses of the tool.
enum ExitCode : int {
  kSuccess = 0,
  kInternal = 1,
  kInvalid = 2,      ///< validation, capacity or alignment failure
  kUnverified = 3,   ///< a declared prediction or check was not met
};

/// Parses the command line, runs the subcommand and returns its exit status.
/// Results go to the configured output (stdout for "-"), diagnostics to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace heisfan::cli
