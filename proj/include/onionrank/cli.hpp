#pragma once

#include <iosfwd>
#include <string_view>

namespace onionrank::cli {

inline constexpr std::string_view kVersion = "0.1.0";

enum ExitCode { kOk = 0, kUsage = 1, kData = 2 };

/// Parses `argv` and runs one subcommand. `in` feeds interactive
/// annotation; normal output goes to `out`, diagnostics to `err`.
int dispatch(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace onionrank::cli
