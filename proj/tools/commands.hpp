#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mtmd::cli {

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2 };

/// Runs one invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Shortest decimal that round-trips.
std::string format_number(double v);

} // namespace mtmd::cli
