#pragma once

#include <iosfwd>

namespace gridstrength::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitBracket = 3;
inline constexpr int kExitUnstable = 4;

struct Style {
    bool color = false;  // ANSI styling of verdicts
};

// Runs the command line against the given streams and returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, Style style = {});

// Color only on a terminal and only when GRIDSTRENGTH_NO_COLOR is unset.
Style detect_style();

}  // namespace gridstrength::cli
