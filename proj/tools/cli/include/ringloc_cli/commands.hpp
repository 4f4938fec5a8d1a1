#pragma once

namespace ringloc::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitRejected = 2;
inline constexpr int kExitUsage = 64;

int run(int argc, char** argv);

}  // namespace ringloc::cli
