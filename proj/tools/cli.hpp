#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace groupdet::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kData = 2, kInternal = 3 };

/// Runs the command line `args` (args[0] is the program name). Normal output
/// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace groupdet::cli
