// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "arterial_risk/ingest.hpp"

namespace arisk {

struct CorpusIndex {
  struct Detection {
    Instant t;
    double speed_kmh;
  };

  std::unordered_map<std::string, std::size_t> segment_pos;
  // Sorted by (t, speed) so every aggregate is independent of file order.
  std::unordered_map<std::string, std::vector<Detection>> detections;
  // intersection -> interval_start -> vehicles per 15 minutes
  std::unordered_map<std::string, std::map<Instant, double>> volume;
  // intersection -> disjoint, sorted green intervals (union over phases)
  std::unordered_map<std::string, std::vector<std::pair<Instant, Instant>>>
      green;
  std::string station;
  std::map<Instant, WeatherRecord> weather;
  // segment -> sorted crash instants
  std::unordered_map<std::string, std::vector<Instant>> crash_times;
};

const CorpusIndex& require_index(const RawCorpus& corpus);

}  // namespace arisk
