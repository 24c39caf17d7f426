#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace athena {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// RFC 3339 in UTC, e.g. "2024-05-01T10:00:00Z"; milliseconds are written
/// only when nonzero.
std::string format_rfc3339(Timestamp t);

/// Accepts "YYYY-MM-DDTHH:MM:SS[.fff](Z|±HH:MM)" (a space may replace the
/// T) and plain dates "YYYY-MM-DD" as midnight UTC.
std::optional<Timestamp> parse_rfc3339(std::string_view text);

Timestamp now_utc();

}  // namespace athena
