#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace liststand {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::chrono::sys_seconds;

Timestamp make_timestamp(int year, unsigned month, unsigned day,
                         int hour = 0, int minute = 0, int second = 0);

/// "2002-04-01T12:00:00Z"
std::string format_iso8601(Timestamp t);

/// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM[:SS]" with an optional "Z" or
/// "+hh:mm" suffix, and a space in place of 'T'.
std::optional<Timestamp> parse_iso8601(std::string_view text);

/// RFC 5322 Date header, including the obsolete forms common in old list
/// archives (two-digit years, named zones, missing weekday or seconds).
std::optional<Timestamp> parse_rfc2822_date(std::string_view text);

/// Date carried by an mbox "From " envelope line, e.g.
/// "From a@b.c Mon Apr 01 12:00:00 2002".
std::optional<Timestamp> parse_envelope_date(std::string_view from_line);

}  // namespace liststand
