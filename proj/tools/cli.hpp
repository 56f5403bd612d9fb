#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rftext::cli {

enum ExitCode : int { kSuccess = 0, kInputError = 1, kInternalError = 2 };

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rftext::cli
