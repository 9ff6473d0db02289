#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eivtls::cli {

/// Exit codes: 0 success, 1 malformed input or config, 2 solver degeneracy.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitSolver = 2;

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eivtls::cli
