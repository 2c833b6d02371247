#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace secretsniff {

using Timestamp = std::chrono::sys_seconds;

Timestamp now_seconds();

// "2024-05-01T12:00:00Z"
std::string format_rfc3339(Timestamp t);

// Accepts "Z" or a numeric "+hh:mm" offset; fractional seconds are dropped.
// Throws std::invalid_argument on malformed input.
Timestamp parse_rfc3339(std::string_view text);

} // namespace secretsniff
