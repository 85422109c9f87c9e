// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace arisk {

/// UTC seconds since the Unix epoch.
using Instant = std::int64_t;

inline constexpr Instant kMinute = 60;
inline constexpr Instant kHour = 3600;
inline constexpr Instant kDay = 86400;
inline constexpr Instant kWeek = 7 * kDay;

/// Accepts `YYYY-MM-DDTHH:MM:SS` with an optional trailing `Z` (a space may
/// replace the `T`). Returns nullopt on anything else, including
/// out-of-range calendar fields.
std::optional<Instant> parse_iso8601(std::string_view text);

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_iso8601(Instant t);

/// Floor division that rounds toward negative infinity.
constexpr Instant floor_div(Instant a, Instant b) {
  Instant q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

constexpr Instant floor_to(Instant t, Instant step) {
  return floor_div(t, step) * step;
}

/// Minutes since midnight UTC, 0..1439.
int minute_of_day(Instant t);

/// 0 = Sunday .. 6 = Saturday.
int day_of_week(Instant t);

}  // namespace arisk
