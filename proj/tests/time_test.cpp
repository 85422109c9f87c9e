// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "arterial_risk/time.hpp"
#include "doctest.h"

using namespace arisk;

TEST_CASE("iso8601 parsing") {
  CHECK(parse_iso8601("1970-01-01T00:00:00Z") == 0);
  CHECK(parse_iso8601("2017-03-06T00:00:00Z") == 1488758400);
  CHECK(parse_iso8601("2017-03-06 00:00:00") == 1488758400);
  CHECK(parse_iso8601("2016-02-29T12:34:56") == 1456749296);
  CHECK(parse_iso8601("1969-12-31T23:59:59Z") == -1);
}

TEST_CASE("iso8601 rejects malformed or out-of-range text") {
  for (const char* bad :
       {"", "2017-03-06", "2017-03-06T00:00", "2017-13-01T00:00:00",
        "2017-02-29T00:00:00", "2017-03-06T24:00:00", "2017-03-06T00:60:00",
        "2017-03-06T00:00:00+01:00", "2017/03/06T00:00:00", "x017-03-06T00:00:00",
        "2017-03-06T00:00:00ZZ"}) {
    CHECK_MESSAGE(!parse_iso8601(bad).has_value(), bad);
  }
}

TEST_CASE("iso8601 format round-trips") {
  for (Instant t : {Instant{0}, Instant{1488758400}, Instant{1456749296},
                    Instant{-86401}, Instant{4102444799}}) {
    CHECK(parse_iso8601(format_iso8601(t)) == t);
  }
  CHECK(format_iso8601(1488758400 + 7 * 3600 + 14 * 60 + 16) ==
        "2017-03-06T07:14:16Z");
}

TEST_CASE("floor helpers round toward negative infinity") {
  CHECK(floor_div(7, 3) == 2);
  CHECK(floor_div(-7, 3) == -3);
  CHECK(floor_div(-6, 3) == -2);
  CHECK(floor_to(-1, kHour) == -kHour);
  CHECK(floor_to(3599, kHour) == 0);
}

TEST_CASE("minute of day and day of week") {
  const Instant monday = 1488758400;  // 2017-03-06
  CHECK(day_of_week(monday) == 1);
  CHECK(day_of_week(0) == 4);  // 1970-01-01 was a Thursday
  CHECK(day_of_week(-1) == 3);
  CHECK(day_of_week(monday + 6 * kDay) == 0);
  CHECK(minute_of_day(monday + 17 * kHour + 30 * kMinute + 59) == 1050);
  CHECK(minute_of_day(-60) == 1439);
}
