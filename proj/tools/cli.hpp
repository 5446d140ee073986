#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stepguard::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kUserError = 2,       // bad flags, missing or malformed input
  kIntegrityError = 3,  // checksum or invariant violation in data
  kInternalError = 4,
};

/// Parses "start:stop:step" or a comma list of reference counts.
std::vector<int> parse_sizes(const std::string& text);

/// Entry point for the `stepguard` tool; writes human-readable output to
/// `out` and diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stepguard::cli
