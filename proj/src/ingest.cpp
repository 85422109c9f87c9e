// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "arterial_risk/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_set>

#include "arterial_risk/error.hpp"
#include "arterial_risk/text_io.hpp"
#include "corpus_index.hpp"

namespace arisk {

const char* to_string(Approach a) {
  switch (a) {
    case Approach::kThrough: return "through";
    case Approach::kLeft: return "left";
    case Approach::kRight: return "right";
    case Approach::kAll: return "all";
  }
  return "all";
}

std::optional<Approach> parse_approach(std::string_view s) {
  s = trim(s);
  if (s == "through") return Approach::kThrough;
  if (s == "left") return Approach::kLeft;
  if (s == "right") return Approach::kRight;
  if (s == "all") return Approach::kAll;
  return std::nullopt;
}

SourceCounts RawCorpus::counts() const {
  return {crashes.size(), travel_times.size(), volumes.size(),
          phases.size(),  weather.size(),      segments.size()};
}

const SegmentMeta* RawCorpus::find_segment(const std::string& id) const {
  if (index) {
    auto it = index->segment_pos.find(id);
    return it == index->segment_pos.end() ? nullptr : &segments[it->second];
  }
  for (const auto& s : segments) {
    if (s.segment_id == id) return &s;
  }
  return nullptr;
}

CorpusPaths CorpusPaths::in_directory(const std::filesystem::path& dir) {
  return {dir / "crashes.csv", dir / "bluetooth.csv", dir / "volumes.csv",
          dir / "phases.csv",  dir / "weather.csv",   dir / "segments.csv"};
}

namespace {

// Column-name lookup over one parsed source, reporting errors against it.
class SourceReader {
 public:
  SourceReader(const std::filesystem::path& path, std::string source,
               std::vector<std::string> columns)
      : source_(std::move(source)) {
    if (!std::filesystem::exists(path)) {
      fail(ErrorKind::kIo, "missing " + source_ + " file: " + path.string());
    }
    table_ = parse_csv(read_file(path), source_);
    for (const auto& c : columns) {
      auto idx = table_.column(c);
      if (!idx) fail_missing_column(source_, c);
      positions_.push_back(*idx);
    }
  }

  const std::vector<CsvRow>& rows() const { return table_.rows; }

  // Field for the i-th requested column, trimmed.
  std::string_view field(const CsvRow& row, std::size_t i) const {
    const std::size_t pos = positions_[i];
    if (pos >= row.fields.size() ||
        row.fields.size() != table_.header.size()) {
      fail_bad_row(source_, row.line, "field count");
    }
    return trim(row.fields[pos]);
  }

  std::string text(const CsvRow& row, std::size_t i, const char* name) const {
    auto v = field(row, i);
    if (v.empty()) bad(row, name);
    return std::string(v);
  }

  Instant instant(const CsvRow& row, std::size_t i, const char* name) const {
    auto t = parse_iso8601(field(row, i));
    if (!t) bad(row, name);
    return *t;
  }

  double number(const CsvRow& row, std::size_t i, const char* name) const {
    auto v = parse_double(field(row, i));
    if (!v || !std::isfinite(*v)) bad(row, name);
    return *v;
  }

  [[noreturn]] void bad(const CsvRow& row, const char* reason) const {
    fail_bad_row(source_, row.line, reason);
  }

 private:
  std::string source_;
  CsvTable table_;
  std::vector<std::size_t> positions_;
};

void load_segments(const std::filesystem::path& path, RawCorpus& c) {
  SourceReader r(path, "segments",
                 {"segment_id", "length_m", "upstream_intersection_id",
                  "downstream_intersection_id"});
  std::unordered_set<std::string> seen;
  for (const auto& row : r.rows()) {
    SegmentMeta s;
    s.segment_id = r.text(row, 0, "segment_id");
    if (!seen.insert(s.segment_id).second) r.bad(row, "duplicate segment_id");
    s.length = r.number(row, 1, "length_m");
    if (s.length <= 0) r.bad(row, "length_m");
    s.upstream_intersection_id = r.text(row, 2, "upstream_intersection_id");
    s.downstream_intersection_id =
        r.text(row, 3, "downstream_intersection_id");
    c.segments.push_back(std::move(s));
  }
}

void load_crashes(const std::filesystem::path& path, RawCorpus& c) {
  SourceReader r(path, "crashes", {"crash_id", "segment_id", "timestamp"});
  std::unordered_set<std::string> seen;
  for (const auto& row : r.rows()) {
    CrashEvent e;
    e.crash_id = r.text(row, 0, "crash_id");
    if (!seen.insert(e.crash_id).second) r.bad(row, "duplicate crash_id");
    e.segment_id = r.text(row, 1, "segment_id");
    e.timestamp = r.instant(row, 2, "timestamp");
    c.crashes.push_back(std::move(e));
  }
}

void load_bluetooth(const std::filesystem::path& path, RawCorpus& c) {
  SourceReader r(path, "bluetooth",
                 {"segment_id", "timestamp", "travel_time_s"});
  for (const auto& row : r.rows()) {
    TravelTimeRecord t;
    t.segment_id = r.text(row, 0, "segment_id");
    t.timestamp = r.instant(row, 1, "timestamp");
    t.travel_time = r.number(row, 2, "travel_time_s");
    if (t.travel_time <= 0) r.bad(row, "travel_time_s");
    c.travel_times.push_back(std::move(t));
  }
}

void load_volumes(const std::filesystem::path& path, RawCorpus& c) {
  SourceReader r(path, "volumes",
                 {"intersection_id", "interval_start", "approach", "volume"});
  for (const auto& row : r.rows()) {
    VolumeRecord v;
    v.intersection_id = r.text(row, 0, "intersection_id");
    v.interval_start = r.instant(row, 1, "interval_start");
    if (v.interval_start % kVolumeInterval != 0) {
      r.bad(row, "interval_start");
    }
    auto a = parse_approach(r.field(row, 2));
    if (!a) r.bad(row, "approach");
    v.approach = *a;
    auto vol = parse_int64(r.field(row, 3));
    if (!vol || *vol < 0) r.bad(row, "volume");
    v.volume = *vol;
    c.volumes.push_back(std::move(v));
  }
}

void load_phases(const std::filesystem::path& path, RawCorpus& c) {
  SourceReader r(path, "phases",
                 {"intersection_id", "phase_id", "green_start", "green_end"});
  for (const auto& row : r.rows()) {
    PhaseRecord p;
    p.intersection_id = r.text(row, 0, "intersection_id");
    p.phase_id = r.text(row, 1, "phase_id");
    p.green_start = r.instant(row, 2, "green_start");
    p.green_end = r.instant(row, 3, "green_end");
    if (p.green_end <= p.green_start) r.bad(row, "green_end");
    c.phases.push_back(std::move(p));
  }
}

void load_weather(const std::filesystem::path& path, RawCorpus& c) {
  SourceReader r(path, "weather",
                 {"station_id", "hour_start", "precip_in", "visibility_mi",
                  "rainy"});
  for (const auto& row : r.rows()) {
    WeatherRecord w;
    w.station_id = r.text(row, 0, "station_id");
    w.hour_start = r.instant(row, 1, "hour_start");
    if (w.hour_start % kHour != 0) r.bad(row, "hour_start");
    w.precipitation = r.number(row, 2, "precip_in");
    if (w.precipitation < 0) r.bad(row, "precip_in");
    w.visibility = r.number(row, 3, "visibility_mi");
    if (w.visibility < 0) r.bad(row, "visibility_mi");
    auto rainy = parse_int64(r.field(row, 4));
    if (!rainy || (*rainy != 0 && *rainy != 1)) r.bad(row, "rainy");
    w.rainy = static_cast<int>(*rainy);
    c.weather.push_back(std::move(w));
  }
}

std::vector<std::pair<Instant, Instant>> merge_intervals(
    std::vector<std::pair<Instant, Instant>> v) {
  std::sort(v.begin(), v.end());
  std::vector<std::pair<Instant, Instant>> out;
  for (const auto& iv : v) {
    if (!out.empty() && iv.first <= out.back().second) {
      out.back().second = std::max(out.back().second, iv.second);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

}  // namespace

const CorpusIndex& require_index(const RawCorpus& corpus) {
  if (!corpus.index) {
    fail(ErrorKind::kInvalidArgument, "corpus has not been finalized");
  }
  return *corpus.index;
}

void finalize_corpus(RawCorpus& c) {
  auto idx = std::make_shared<CorpusIndex>();

  std::unordered_set<std::string> intersections;
  for (std::size_t i = 0; i < c.segments.size(); ++i) {
    const auto& s = c.segments[i];
    if (!idx->segment_pos.emplace(s.segment_id, i).second) {
      fail_bad_row("segments", static_cast<long>(i) + 2,
                   "duplicate segment_id");
    }
    intersections.insert(s.upstream_intersection_id);
    intersections.insert(s.downstream_intersection_id);
  }
  for (const auto& e : c.crashes) {
    if (!idx->segment_pos.count(e.segment_id)) {
      fail_dangling("segment", e.segment_id);
    }
  }
  for (const auto& t : c.travel_times) {
    if (!idx->segment_pos.count(t.segment_id)) {
      fail_dangling("segment", t.segment_id);
    }
  }
  for (const auto& v : c.volumes) {
    if (!intersections.count(v.intersection_id)) {
      fail_dangling("intersection", v.intersection_id);
    }
  }
  for (const auto& p : c.phases) {
    if (!intersections.count(p.intersection_id)) {
      fail_dangling("intersection", p.intersection_id);
    }
  }

  Instant lo = std::numeric_limits<Instant>::max();
  Instant hi = std::numeric_limits<Instant>::min();
  auto extend = [&](Instant a, Instant b) {
    lo = std::min(lo, a);
    hi = std::max(hi, b);
  };

  for (const auto& t : c.travel_times) {
    const auto& seg = c.segments[idx->segment_pos.at(t.segment_id)];
    idx->detections[t.segment_id].push_back(
        {t.timestamp, seg.length / t.travel_time * 3.6});
    extend(t.timestamp, t.timestamp + 1);
  }
  for (auto& [id, v] : idx->detections) {
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
      return a.t != b.t ? a.t < b.t : a.speed_kmh < b.speed_kmh;
    });
  }

  // 'all' rows take precedence over the sum of movement rows.
  std::unordered_map<std::string, std::map<Instant, double>> all_rows;
  std::unordered_map<std::string, std::map<Instant, double>> movement_rows;
  for (const auto& v : c.volumes) {
    auto& target = v.approach == Approach::kAll ? all_rows : movement_rows;
    target[v.intersection_id][v.interval_start] +=
        static_cast<double>(v.volume);
    extend(v.interval_start, v.interval_start + kVolumeInterval);
  }
  idx->volume = std::move(movement_rows);
  for (auto& [id, m] : all_rows) {
    for (auto& [t, vol] : m) idx->volume[id][t] = vol;
  }

  std::unordered_map<std::string, std::vector<std::pair<Instant, Instant>>>
      green;
  for (const auto& p : c.phases) {
    green[p.intersection_id].emplace_back(p.green_start, p.green_end);
    extend(p.green_start, p.green_end);
  }
  for (auto& [id, v] : green) idx->green[id] = merge_intervals(std::move(v));

  idx->station = c.options.weather_station;
  if (idx->station.empty() && !c.weather.empty()) {
    idx->station = c.weather.front().station_id;
  }
  for (std::size_t i = 0; i < c.weather.size(); ++i) {
    const auto& w = c.weather[i];
    if (w.station_id != idx->station) continue;
    if (!idx->weather.emplace(w.hour_start, w).second) {
      fail_bad_row("weather", static_cast<long>(i) + 2, "duplicate hour_start");
    }
    extend(w.hour_start, w.hour_start + kHour);
  }

  if (lo > hi) {
    // No time-series data at all; the range collapses onto the crashes.
    for (const auto& e : c.crashes) extend(e.timestamp, e.timestamp + 1);
    if (lo > hi) lo = hi = 0;
  }
  c.range = {lo, hi};

  for (std::size_t i = 0; i < c.crashes.size(); ++i) {
    const auto& e = c.crashes[i];
    if (e.timestamp < lo || e.timestamp > hi) {
      fail_bad_row("crashes", static_cast<long>(i) + 2,
                   "timestamp outside corpus range");
    }
    idx->crash_times[e.segment_id].push_back(e.timestamp);
  }
  for (auto& [id, v] : idx->crash_times) std::sort(v.begin(), v.end());

  c.index = std::move(idx);
}

RawCorpus load_corpus(const CorpusPaths& paths, IngestOptions options) {
  RawCorpus c;
  c.options = std::move(options);
  load_segments(paths.segments, c);
  load_crashes(paths.crashes, c);
  load_bluetooth(paths.bluetooth, c);
  load_volumes(paths.volumes, c);
  load_phases(paths.phases, c);
  load_weather(paths.weather, c);
  finalize_corpus(c);
  return c;
}

void write_corpus(const RawCorpus& c, const std::filesystem::path& dir) {
  const auto p = CorpusPaths::in_directory(dir);
  std::string out = "crash_id,segment_id,timestamp\n";
  for (const auto& e : c.crashes) {
    out += csv_join({e.crash_id, e.segment_id, format_iso8601(e.timestamp)});
    out += '\n';
  }
  write_file(p.crashes, out);

  out = "segment_id,timestamp,travel_time_s\n";
  for (const auto& t : c.travel_times) {
    out += csv_join({t.segment_id, format_iso8601(t.timestamp),
                     format_double(t.travel_time)});
    out += '\n';
  }
  write_file(p.bluetooth, out);

  out = "intersection_id,interval_start,approach,volume\n";
  for (const auto& v : c.volumes) {
    out += csv_join({v.intersection_id, format_iso8601(v.interval_start),
                     to_string(v.approach), std::to_string(v.volume)});
    out += '\n';
  }
  write_file(p.volumes, out);

  out = "intersection_id,phase_id,green_start,green_end\n";
  for (const auto& ph : c.phases) {
    out += csv_join({ph.intersection_id, ph.phase_id,
                     format_iso8601(ph.green_start),
                     format_iso8601(ph.green_end)});
    out += '\n';
  }
  write_file(p.phases, out);

  out = "station_id,hour_start,precip_in,visibility_mi,rainy\n";
  for (const auto& w : c.weather) {
    out += csv_join({w.station_id, format_iso8601(w.hour_start),
                     format_double(w.precipitation),
                     format_double(w.visibility), std::to_string(w.rainy)});
    out += '\n';
  }
  write_file(p.weather, out);

  out = "segment_id,length_m,upstream_intersection_id,"
        "downstream_intersection_id\n";
  for (const auto& s : c.segments) {
    out += csv_join({s.segment_id, format_double(s.length),
                     s.upstream_intersection_id,
                     s.downstream_intersection_id});
    out += '\n';
  }
  write_file(p.segments, out);
}

namespace {

std::optional<double> slice_volume(const CorpusIndex& idx,
                                   const std::string& intersection,
                                   Instant start, Instant end, double divisor) {
  auto it = idx.volume.find(intersection);
  if (it == idx.volume.end()) return std::nullopt;
  double total = 0.0;
  for (Instant q = floor_to(start, kVolumeInterval); q < end;
       q += kVolumeInterval) {
    auto v = it->second.find(q);
    if (v == it->second.end()) return std::nullopt;
    const Instant overlap = std::min(end, q + kVolumeInterval) -
                            std::max(start, q);
    total += v->second * static_cast<double>(overlap) /
             static_cast<double>(kSliceLength);
  }
  return total / divisor;
}

std::optional<double> slice_green_ratio(const CorpusIndex& idx,
                                        const std::string& intersection,
                                        Instant start, Instant end) {
  auto it = idx.green.find(intersection);
  if (it == idx.green.end()) return std::nullopt;
  Instant green = 0;
  for (const auto& [a, b] : it->second) {
    if (b <= start) continue;
    if (a >= end) break;
    green += std::min(b, end) - std::max(a, start);
  }
  return static_cast<double>(green) / static_cast<double>(end - start);
}

}  // namespace

std::array<SliceAggregate, kSliceCount> slice_aggregates(
    const RawCorpus& corpus, const std::string& segment_id, Instant anchor) {
  const auto& idx = require_index(corpus);
  const SegmentMeta* seg = corpus.find_segment(segment_id);
  if (!seg) fail(ErrorKind::kUnknownSegment, "unknown segment: " + segment_id);
  if (anchor - kLeadWindow < corpus.range.start || anchor > corpus.range.end) {
    fail(ErrorKind::kInsufficientCoverage,
         "slice windows before " + format_iso8601(anchor) +
             " fall outside the corpus time range");
  }

  static const std::vector<CorpusIndex::Detection> kNone;
  auto det_it = idx.detections.find(segment_id);
  const auto& detections =
      det_it == idx.detections.end() ? kNone : det_it->second;

  std::array<SliceAggregate, kSliceCount> out;
  for (int i = 1; i <= kSliceCount; ++i) {
    SliceAggregate& s = out[static_cast<std::size_t>(i - 1)];
    s.slice_index = i;
    s.window_end = anchor - (i - 1) * kSliceLength;
    s.window_start = anchor - i * kSliceLength;

    auto lo = std::lower_bound(
        detections.begin(), detections.end(), s.window_start,
        [](const CorpusIndex::Detection& d, Instant t) { return d.t < t; });
    auto hi = std::lower_bound(
        lo, detections.end(), s.window_end,
        [](const CorpusIndex::Detection& d, Instant t) { return d.t < t; });
    const auto n = static_cast<int>(hi - lo);
    s.vehicle_count = n;
    if (n > 0) {
      double sum = 0.0;
      for (auto d = lo; d != hi; ++d) sum += d->speed_kmh;
      const double mean = sum / n;
      s.avg_speed = mean;
      if (n >= corpus.options.min_speed_sample && n >= 2) {
        double ss = 0.0;
        for (auto d = lo; d != hi; ++d) {
          ss += (d->speed_kmh - mean) * (d->speed_kmh - mean);
        }
        s.cv_speed = std::sqrt(ss / (n - 1)) / mean;
      }
    }
    s.up_vol = slice_volume(idx, seg->upstream_intersection_id,
                            s.window_start, s.window_end,
                            corpus.options.volume_divisor);
    s.down_vol = slice_volume(idx, seg->downstream_intersection_id,
                              s.window_start, s.window_end,
                              corpus.options.volume_divisor);
    s.green_ratio = slice_green_ratio(idx, seg->downstream_intersection_id,
                                      s.window_start, s.window_end);
  }
  return out;
}

WeatherFeatures attach_weather(const RawCorpus& corpus, Instant anchor) {
  const auto& idx = require_index(corpus);
  auto it = idx.weather.find(floor_to(anchor, kHour));
  if (it == idx.weather.end()) {
    fail(ErrorKind::kNoWeatherCoverage,
         "NoWeatherCoverage(" + format_iso8601(anchor) + ")");
  }
  const WeatherRecord& w = it->second;
  WeatherFeatures f;
  f.rainy = (w.precipitation > 0.0 || w.rainy == 1) ? 1 : 0;
  f.visibility = w.visibility;
  f.precipitation = w.precipitation;
  return f;
}

}  // namespace arisk
