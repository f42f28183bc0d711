#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace citedyn {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitConvergence = 3 };

/// Runs one subcommand. `args` excludes the program name. Result envelopes go
/// to --out when given, otherwise to `out`; diagnostics go to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace citedyn
