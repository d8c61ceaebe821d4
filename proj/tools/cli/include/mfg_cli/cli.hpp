#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mfg::cli {

/// Process exit codes shared by every command.
enum ExitCode : int {
  kExitOk = 0,
  kExitDomainFailure = 1,  // failed checks or verdicts
  kExitInputError = 2,     // unreadable or malformed input, bad flags
  kExitNumericError = 3,   // rejected integration steps and similar
};

/// Runs `mfg_evolve` with `args` (without the program name). Reports go to
/// `out`, diagnostics to `err`. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string version();

}  // namespace mfg::cli
