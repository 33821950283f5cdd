#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wayfind::cli {

inline constexpr const char* kVersion = "1.0.0";

/// Runs one command line (without the program name). Returns the exit
/// status: 0 ok, 1 runtime failure, 2 input error. Failures are reported on
/// `err` as a single line:
///   error: code=<n> source=<file|-> location=<line|path|-> message="<text>"
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace wayfind::cli
