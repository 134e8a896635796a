#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mwt::cli {

/// Process exit codes of the `mwt` tool.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kNumerical = 3,
  kIncompatible = 4,
};

/// Runs one subcommand. `args` excludes the program name. Diagnostics go to
/// `err`, results and progress to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mwt::cli
