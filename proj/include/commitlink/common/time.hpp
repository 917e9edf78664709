#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace commitlink {

/// UTC instant with seconds precision.
using Timestamp = std::chrono::sys_seconds;

inline constexpr std::int64_t kSecondsPerDay = 86'400;

/// Accepts "YYYY-MM-DDTHH:MM:SS" (or a space instead of 'T'), optional
/// fractional seconds (truncated), and an optional "Z" or "+HH:MM"/"-HH:MM"
/// offset. A missing offset means UTC.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Always "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(Timestamp t);

/// Signed (to - from) in fractional days.
double days_between(Timestamp from, Timestamp to);

inline Timestamp add_days(Timestamp t, std::int64_t days) {
    return t + std::chrono::seconds{days * kSecondsPerDay};
}

inline Timestamp from_unix(std::int64_t seconds) {
    return Timestamp{std::chrono::seconds{seconds}};
}

inline std::int64_t to_unix(Timestamp t) {
    return t.time_since_epoch().count();
}

} // namespace commitlink
