#pragma once

#include <string>
#include <string_view>

// Locale-independent number <-> text conversion used by every file format and
// report the library emits.
namespace gridstrength::text {

// Shortest representation that round-trips to the same double.
std::string format_exact(double value);

// Fixed 6-significant-digit rendering for human-readable output.
std::string format_sig6(double value);

// Parses a decimal floating-point literal (decimal point only, no locale).
// Throws InputError naming `what` on failure or trailing garbage.
double parse_double(std::string_view text, std::string_view what);

}  // namespace gridstrength::text
