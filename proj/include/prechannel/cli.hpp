#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace prechannel {

/// Process exit codes; a stable contract for scripts.
enum ExitCode : int {
  kExitOk = 0,
  kExitVerificationFailed = 1,
  kExitUsage = 2,
};

/// Runs the command line `args` (without the program name). Subcommands:
/// gen-ensemble, verify, sweep, chernoff, probe-conjecture.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace prechannel
