#pragma once

#include <iosfwd>

namespace vrcp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Entry point of the `vrcp` tool. Subcommands:
///   run --config <file> [--out <dir>] [--seed <u64>] [--threads <n>]
///   histogram --report <csv>
/// Returns 0 on success, 2 on configuration errors, 3 on runtime failures.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vrcp::cli
