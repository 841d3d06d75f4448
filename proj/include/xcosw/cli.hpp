#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xcosw {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInvalid = 1,    // diagram has validation errors
  kExitInput = 2,      // usage, I/O or parse error
  kExitSimulation = 3, // run failed (non-finite values, step underflow)
};

/// Runs the tool; args[0] is the program name.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace xcosw
