#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kp {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitConstraint = 1, kExitUsage = 2 };

/// Entry point of the `kplateau` tool; args excludes the program name. Reports go to out,
/// diagnostics to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kp
