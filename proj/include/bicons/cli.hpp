#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace bicons::cli {

enum ExitCode { kOk = 0, kFailed = 1, kUsage = 2 };

/// Runs one subcommand (generate, verify, special, riccati). `args` excludes the program
/// name. Reports go to files named by the flags, progress to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// key = value lines, '#' comments. Throws UsageError on a malformed line.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path);

}  // namespace bicons::cli
