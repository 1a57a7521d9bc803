#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qpspec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (without the program name) and returns the process
/// exit code: 0 on success, 1 when an experiment fails, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qpspec::cli
