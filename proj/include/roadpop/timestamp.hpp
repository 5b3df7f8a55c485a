#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace roadpop {

/// An instant plus the UTC offset it was recorded with, so the local civil
/// time of the recording can be recovered.
struct Timestamp {
  std::int64_t utc_ms = 0;     // milliseconds since 1970-01-01T00:00:00Z
  std::int32_t offset_min = 0; // recorded UTC offset in minutes

  /// Seconds since local midnight, in [0, 86400).
  double local_seconds_of_day() const;
  int local_hour() const;

  friend bool operator==(const Timestamp&, const Timestamp&) = default;
};

/// Parses `YYYY-MM-DDThh:mm:ss[.fff](Z|±hh:mm|±hhmm)`; a missing zone means UTC.
std::optional<Timestamp> parse_iso8601(std::string_view text);

/// Formats back to ISO 8601 in the recorded local time with its offset.
std::string format_iso8601(const Timestamp& t);

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d);

}  // namespace roadpop
