#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hrtrap {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitSearchExhausted = 3,
};

/// Runs the tool with `args` (without the program name). Subcommands:
/// bounds, hr, find, certify, phi-eval.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hrtrap
