#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace opo::cli {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { ok = 0, validation_error = 1, runtime_error = 2 };

/// Runs one subcommand. `args` excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of `text`.
std::string sha256_hex(const std::string& text);

} // namespace opo::cli
