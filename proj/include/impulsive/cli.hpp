#pragma once

// Command-line front-end. Exit status: 0 on success, 2 when a required
// hypothesis fails, 1 on any other error.

#include <iosfwd>
#include <string>
#include <vector>

namespace impulsive {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitHypothesis = 2;

/// `args` excludes the program name. Progress goes to `out`, errors to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace impulsive
