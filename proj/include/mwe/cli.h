#pragma once

#include <iosfwd>

namespace mwe {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Entry point of the `mwe` tool. Results go to `out`, diagnostics and
// progress to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mwe
