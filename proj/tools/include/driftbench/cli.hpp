#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace driftbench {

enum ExitCode : int { kExitOk = 0, kExitData = 1, kExitUsage = 2, kExitDrift = 3 };

/// Runs one CLI invocation; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace driftbench
