#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace drovar::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kGapExceeded = 3,
  kInfeasibleStart = 4,
  kUnsupportedSize = 5,
};

/// Runs `drovar` with args (program name excluded). JSON goes to `out`,
/// diagnostics for failures to `err`. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Shortest decimal form of v after rounding to 12 significant digits.
double round12(double v);

}  // namespace drovar::cli
