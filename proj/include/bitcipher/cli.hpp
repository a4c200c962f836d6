#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bitcipher {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
};

/// Runs `bitcipher <subcommand> ...`. `args` excludes the program name.
/// Diagnostics go to `err`, reports to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bitcipher
