#pragma once

// The alphadisc command line: subcommands discrepancy, conformal, embed,
// theorem6 and oracle.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage or input failure.

#include <iosfwd>
#include <string>
#include <vector>

namespace alphadisc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

/// args excludes the program name. Reports go to the configured files or to
/// `out`; diagnostics and one-line summaries go to `err` when `out` carries
/// a report.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace alphadisc::cli
