#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>

namespace survmine {

// UTC instant with second resolution, stored as seconds since the Unix epoch.
using UtcInstant = std::chrono::sys_seconds;
// UTC calendar date (midnight boundary).
using UtcDate = std::chrono::sys_days;

// Strict ISO-8601 parser for "YYYY-MM-DDTHH:MM:SSZ" (also accepts a space
// separator and a bare date, which is read as midnight). Rejects impossible
// calendar dates and out-of-range clock fields.
std::optional<UtcInstant> parse_iso8601(std::string_view text);

// Strict "YYYY-MM-DD".
std::optional<UtcDate> parse_iso_date(std::string_view text);

std::string format_iso8601(UtcInstant t);
std::string format_iso_date(UtcDate d);

// Whole days between two instants (floor of the elapsed seconds / 86400).
std::int64_t whole_days_between(UtcInstant from, UtcInstant to);

}  // namespace survmine
