#pragma once

#include <iosfwd>

namespace balmse {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

/// Entry point of the `balmse` tool: generate, train, experiment, report,
/// config dump.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace balmse
