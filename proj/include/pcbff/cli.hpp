#pragma once

#include <iosfwd>

namespace pcbff::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitModel = 4;

/// Environment variable naming the default directory for output files.
inline constexpr const char* kOutputDirEnv = "PCBFF_OUTPUT_DIR";

/// Entry point of the `pcbff` tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pcbff::cli
