#pragma once

#include "ddlyap/core.hpp"

#include <iosfwd>

namespace ddlyap::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;      // other errors, failed verify gates
inline constexpr int kInvalidSystem = 2;
inline constexpr int kParse = 3;
inline constexpr int kSolver = 4;
inline constexpr int kNotStable = 5;
inline constexpr int kSizeCap = 6;

int exit_code(ErrorCode c) noexcept;

/// Runs one subcommand; data goes to `out` unless --out names a file,
/// diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ddlyap::cli
