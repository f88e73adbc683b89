#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace roughmix::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalError = 3 };

/// Runs one command line (without the program name). Diagnostics go to
/// `err`, usage and help text to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

}  // namespace roughmix::cli
