#pragma once

#include <iosfwd>

namespace stablab {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitViolation = 1, kExitUsage = 2 };

/// Entry point of the `stablab` tool: certify, stability, sweep, bounds, lowerbound.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stablab
