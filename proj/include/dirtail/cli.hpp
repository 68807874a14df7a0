#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace dirtail::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { ok = 0, validation = 2, numeric = 3 };

/// Runs one command. `args` excludes the program name, e.g.
/// {"approx", "--config", "spec.json", "--format", "json"}.
/// Tables go to --out when given, otherwise to `out`; diagnostics go to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace dirtail::cli
