// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

// Raw multi-source corpus (crashes, Bluetooth travel times, 15-minute signal
// controller volumes, signal phases, hourly weather, segment metadata) and
// its aggregation into the four 5-minute slices preceding an anchor instant.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "arterial_risk/time.hpp"

namespace arisk {

inline constexpr Instant kSliceLength = 5 * kMinute;
inline constexpr int kSliceCount = 4;
inline constexpr Instant kLeadWindow = kSliceCount * kSliceLength;  // 20 min
inline constexpr Instant kVolumeInterval = 15 * kMinute;

struct CrashEvent {
  std::string crash_id;
  std::string segment_id;
  Instant timestamp = 0;
};

struct TravelTimeRecord {
  std::string segment_id;
  Instant timestamp = 0;  // detection completion time
  double travel_time = 0.0;  // seconds
};

enum class Approach { kThrough, kLeft, kRight, kAll };
const char* to_string(Approach a);
std::optional<Approach> parse_approach(std::string_view s);

struct VolumeRecord {
  std::string intersection_id;
  Instant interval_start = 0;
  Approach approach = Approach::kAll;
  std::int64_t volume = 0;  // vehicles per 15 minutes
};

struct PhaseRecord {
  std::string intersection_id;
  std::string phase_id;
  Instant green_start = 0;
  Instant green_end = 0;
};

struct WeatherRecord {
  std::string station_id;
  Instant hour_start = 0;
  double precipitation = 0.0;  // inches per hour
  double visibility = 0.0;  // miles
  int rainy = 0;
};

struct SegmentMeta {
  std::string segment_id;
  double length = 0.0;  // meters
  std::string upstream_intersection_id;
  std::string downstream_intersection_id;
};

/// Half-open [start, end).
struct TimeRange {
  Instant start = 0;
  Instant end = 0;
};

struct SourceCounts {
  std::size_t crashes = 0;
  std::size_t travel_times = 0;
  std::size_t volumes = 0;
  std::size_t phases = 0;
  std::size_t weather = 0;
  std::size_t segments = 0;
};

struct IngestOptions {
  /// 15-minute counts are spread uniformly: a 5-minute slice fully inside one
  /// interval receives volume / volume_divisor.
  double volume_divisor = 3.0;
  /// Minimum detections for cv_speed.
  int min_speed_sample = 2;
  /// Weather station to use; empty selects the first station in the file.
  std::string weather_station;
};

struct CorpusIndex;

/// Validated, immutable after `finalize_corpus`.
struct RawCorpus {
  std::vector<CrashEvent> crashes;
  std::vector<TravelTimeRecord> travel_times;
  std::vector<VolumeRecord> volumes;
  std::vector<PhaseRecord> phases;
  std::vector<WeatherRecord> weather;
  std::vector<SegmentMeta> segments;

  IngestOptions options;
  TimeRange range;
  std::shared_ptr<const CorpusIndex> index;

  SourceCounts counts() const;
  const SegmentMeta* find_segment(const std::string& id) const;
};

struct CorpusPaths {
  std::filesystem::path crashes;
  std::filesystem::path bluetooth;
  std::filesystem::path volumes;
  std::filesystem::path phases;
  std::filesystem::path weather;
  std::filesystem::path segments;

  /// The six canonical file names inside `dir`.
  static CorpusPaths in_directory(const std::filesystem::path& dir);
};

/// Parses and validates all six sources. Row order is preserved per source.
RawCorpus load_corpus(const CorpusPaths& paths, IngestOptions options = {});

/// Validates referential integrity, derives the time range and builds lookup
/// indices. Called by `load_corpus`; in-memory builders call it directly.
void finalize_corpus(RawCorpus& corpus);

/// Writes the six CSV files using the canonical headers.
void write_corpus(const RawCorpus& corpus, const std::filesystem::path& dir);

struct SliceAggregate {
  int slice_index = 0;  // 1 = [anchor-5min, anchor)
  Instant window_start = 0;
  Instant window_end = 0;
  std::optional<double> avg_speed;  // km/h
  std::optional<double> cv_speed;
  std::optional<double> up_vol;  // 5-minute equivalent
  std::optional<double> down_vol;
  std::optional<double> green_ratio;
  int vehicle_count = 0;
};

std::array<SliceAggregate, kSliceCount> slice_aggregates(
    const RawCorpus& corpus, const std::string& segment_id, Instant anchor);

struct WeatherFeatures {
  int rainy = 0;
  double visibility = 0.0;
  double precipitation = 0.0;
};

WeatherFeatures attach_weather(const RawCorpus& corpus, Instant anchor);

}  // namespace arisk
