#pragma once

#include <iosfwd>

namespace bartree {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitDegenerate = 3;

/// Entry point of `bartree simulate|estimate|gw|verify`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bartree
