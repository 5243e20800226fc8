#pragma once

#include <iosfwd>

namespace clockreg::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kNoSolution = 3,
  kNumericalFailure = 4,
};

/// Entry point of the `clockreg` tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace clockreg::cli
