#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace specaudit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitIncomplete = 2;

/// Runs one command line (without the program name). Result files are written
/// atomically; messages go to `out` / `err`. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace specaudit::cli
