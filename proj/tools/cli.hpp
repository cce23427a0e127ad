#pragma once

#include <ostream>

namespace noiseflow::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Entry point of the `noiseflow` tool, with the streams injectable for tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace noiseflow::cli
