#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace parisi {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitNonConvergence = 3,
  kExitBudget = 4,
};

/// Runs the command line `args` (program name excluded).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace parisi
