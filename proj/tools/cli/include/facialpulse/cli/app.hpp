#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace facialpulse::cli {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitInputError = 2;    // bad flags, unreadable or malformed files
inline constexpr int kExitComputeError = 3;  // the pipeline itself failed

// Primary results go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace facialpulse::cli
