// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "arterial_risk/error.hpp"
#include "arterial_risk/ingest.hpp"
#include "arterial_risk/matching.hpp"
#include "arterial_risk/models.hpp"
#include "arterial_risk/time.hpp"
#include "doctest.h"

namespace testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("arisk-test-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

// Kind of the arisk::Error thrown by f; fails the test if nothing is thrown.
inline arisk::ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const arisk::Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return arisk::ErrorKind::kInvalidArgument;
}

inline arisk::Instant at(const char* iso) {
  return *arisk::parse_iso8601(iso);
}

// One 1000 m segment S1 (I1 -> I2) with full coverage for `weeks` weeks from
// Monday 2017-03-06: a detection every minute at 50 km/h, 15-minute counts of
// 90 (I1) and 60 (I2), hourly dry weather at station W1. Crashes are added by
// the caller before finalize_corpus.
inline arisk::RawCorpus uniform_corpus(int weeks = 3) {
  using namespace arisk;
  RawCorpus c;
  c.segments.push_back({"S1", 1000.0, "I1", "I2"});
  const Instant start = at("2017-03-06T00:00:00Z");
  const Instant end = start + weeks * kWeek;
  for (Instant t = start; t < end; t += kMinute) {
    c.travel_times.push_back({"S1", t, 72.0});
  }
  for (Instant q = start; q < end; q += kVolumeInterval) {
    c.volumes.push_back({"I1", q, Approach::kAll, 90});
    c.volumes.push_back({"I2", q, Approach::kAll, 60});
  }
  for (Instant h = start; h < end; h += kHour) {
    c.weather.push_back({"W1", h, 0.0, 10.0, 0});
  }
  return c;
}

// Design with random features; the case is always member 0.
inline arisk::Design random_design(std::mt19937_64& rng, std::size_t n,
                                   std::size_t members, std::size_t k,
                                   double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  arisk::Design d;
  d.n_strata = n;
  d.members = members;
  d.k = k;
  d.x.resize(n * members * k);
  for (auto& v : d.x) v = normal(rng);
  for (std::size_t i = 0; i < n; ++i) {
    d.stratum_ids.push_back(static_cast<int>(i) + 1);
    d.group.push_back(i);
    d.group_labels.push_back(std::to_string(i + 1));
  }
  d.n_groups = n;
  for (std::size_t u = 0; u < k; ++u) {
    d.feature_names.push_back("x" + std::to_string(u + 1));
  }
  return d;
}

// Matched dataset view of a design (anchors one week apart).
inline arisk::MatchedDataset dataset_from(const arisk::Design& d) {
  arisk::MatchedDataset ds;
  ds.m = d.members - 1;
  ds.k = d.k;
  ds.feature_names = d.feature_names;
  const arisk::Instant base = at("2017-03-06T08:00:00Z");
  for (std::size_t i = 0; i < d.n_strata; ++i) {
    arisk::Stratum s;
    s.stratum_id = static_cast<int>(i) + 1;
    s.key = arisk::MatchKey::of("S1", base);
    s.crash_id = "C" + std::to_string(i + 1);
    for (std::size_t j = 0; j < d.members; ++j) {
      arisk::Observation o;
      o.stratum_id = s.stratum_id;
      o.is_crash = j == 0 ? 1 : 0;
      o.anchor = base + static_cast<arisk::Instant>(j) * arisk::kWeek;
      const auto row = d.row(i, j);
      o.x.assign(row.begin(), row.end());
      if (j == 0) {
        s.case_obs = o;
      } else {
        s.controls.push_back(o);
      }
    }
    ds.strata.push_back(std::move(s));
  }
  return ds;
}

}  // namespace testing
