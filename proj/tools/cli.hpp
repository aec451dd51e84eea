#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace uplift_zero::cli {

enum ExitCode { kOk = 0, kInfeasible = 1, kInputError = 2 };

/// Runs the command line with args (program name excluded). Output goes to
/// out, diagnostics to err. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace uplift_zero::cli
