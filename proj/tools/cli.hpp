#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sqg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Runs the `sqg` command line. args excludes the program name. Returns
/// the process exit status; never calls exit().
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Expands "10,20,...,100" style lists. A "..." token continues the
/// arithmetic progression set by the two preceding values up to the value
/// after it.
std::vector<std::size_t> parse_counts(const std::string& list);

}  // namespace sqg::cli
