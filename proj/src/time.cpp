// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "arterial_risk/time.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace arisk {
namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::optional<Instant> parse_iso8601(std::string_view text) {
  if (!text.empty() && (text.back() == 'Z' || text.back() == 'z')) {
    text.remove_suffix(1);
  }
  if (text.size() != 19 || text[4] != '-' || text[7] != '-' ||
      (text[10] != 'T' && text[10] != ' ') || text[13] != ':' ||
      text[16] != ':') {
    return std::nullopt;
  }
  int y, mo, d, h, mi, s;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) ||
      !parse_int(text.substr(8, 2), d) || !parse_int(text.substr(11, 2), h) ||
      !parse_int(text.substr(14, 2), mi) || !parse_int(text.substr(17, 2), s)) {
    return std::nullopt;
  }
  if (h > 23 || mi > 59 || s > 59) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  const Instant days = sys_days{ymd}.time_since_epoch().count();
  return days * kDay + h * kHour + mi * kMinute + s;
}

std::string format_iso8601(Instant t) {
  using namespace std::chrono;
  const Instant days = floor_div(t, kDay);
  const Instant rem = t - days * kDay;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(rem / kHour),
                static_cast<int>(rem % kHour / kMinute),
                static_cast<int>(rem % kMinute));
  return buf;
}

int minute_of_day(Instant t) {
  return static_cast<int>((t - floor_to(t, kDay)) / kMinute);
}

int day_of_week(Instant t) {
  // 1970-01-01 was a Thursday.
  const Instant days = floor_div(t, kDay);
  return static_cast<int>(((days % 7) + 7 + 4) % 7);
}

}  // namespace arisk
