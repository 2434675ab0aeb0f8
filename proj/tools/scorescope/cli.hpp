#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scorescope::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 1,         // unreadable or malformed input
  kExitPrecondition = 2,  // invalid arguments or a violated precondition
  kExitStrict = 3,        // --strict and a pathology / alert / bias finding
};

/// Runs one command. `args` excludes the program name. Reports go to `out`
/// unless --output is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace scorescope::cli
