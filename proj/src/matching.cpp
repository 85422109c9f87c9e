// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "arterial_risk/matching.hpp"

#include <cmath>
#include <algorithm>
#include <map>
#include <set>

#include "arterial_risk/error.hpp"
#include "arterial_risk/random.hpp"
#include "arterial_risk/text_io.hpp"
#include "corpus_index.hpp"

namespace arisk {
namespace {

struct BaseName {
  const char* name;
  FeatureBase base;
  bool per_slice;
};

constexpr BaseName kBases[] = {
    {"avg_speed", FeatureBase::kAvgSpeed, true},
    {"cv_speed", FeatureBase::kCvSpeed, true},
    {"up_vol", FeatureBase::kUpVol, true},
    {"down_vol", FeatureBase::kDownVol, true},
    {"green_ratio", FeatureBase::kGreenRatio, true},
    {"rainy", FeatureBase::kRainy, false},
    {"visibility", FeatureBase::kVisibility, false},
    {"precipitation", FeatureBase::kPrecipitation, false},
};

FeatureRef parse_feature(const std::string& raw) {
  const std::string name(trim(raw));
  for (const auto& b : kBases) {
    if (!b.per_slice) {
      if (name == b.name) return {b.base, 0, name};
      continue;
    }
    const std::string prefix = std::string(b.name) + "_s";
    if (name.size() == prefix.size() + 1 && name.rfind(prefix, 0) == 0) {
      const char d = name.back();
      if (d >= '1' && d <= '4') return {b.base, d - '0', name};
    }
  }
  fail(ErrorKind::kUnknownFeature, "UnknownFeature(\"" + name + "\")");
}

}  // namespace

FeatureSpec FeatureSpec::parse(const std::vector<std::string>& names) {
  FeatureSpec spec;
  std::set<std::string> seen;
  for (const auto& n : names) {
    FeatureRef f = parse_feature(n);
    if (!seen.insert(f.name).second) {
      fail(ErrorKind::kInvalidArgument, "duplicate feature: " + f.name);
    }
    spec.features.push_back(std::move(f));
  }
  if (spec.features.empty()) {
    fail(ErrorKind::kInvalidArgument, "feature list is empty");
  }
  return spec;
}

FeatureSpec FeatureSpec::parse(const std::string& list) {
  std::vector<std::string> names;
  for (auto& s : split(list, ',')) {
    if (!trim(s).empty()) names.push_back(std::string(trim(s)));
  }
  return parse(names);
}

std::vector<std::string> FeatureSpec::names() const {
  std::vector<std::string> out;
  for (const auto& f : features) out.push_back(f.name);
  return out;
}

std::optional<std::vector<double>> extract_features(const RawCorpus& corpus,
                                                    const std::string& segment,
                                                    Instant anchor,
                                                    const FeatureSpec& spec) {
  bool need_slices = false;
  bool need_weather = false;
  for (const auto& f : spec.features) {
    (f.slice > 0 ? need_slices : need_weather) = true;
  }

  std::array<SliceAggregate, kSliceCount> slices{};
  WeatherFeatures weather{};
  try {
    if (need_slices) slices = slice_aggregates(corpus, segment, anchor);
    if (need_weather) weather = attach_weather(corpus, anchor);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInsufficientCoverage ||
        e.kind() == ErrorKind::kNoWeatherCoverage) {
      return std::nullopt;
    }
    throw;
  }

  std::vector<double> x;
  x.reserve(spec.size());
  for (const auto& f : spec.features) {
    std::optional<double> v;
    const SliceAggregate* s =
        f.slice > 0 ? &slices[static_cast<std::size_t>(f.slice - 1)] : nullptr;
    switch (f.base) {
      case FeatureBase::kAvgSpeed: v = s->avg_speed; break;
      case FeatureBase::kCvSpeed: v = s->cv_speed; break;
      case FeatureBase::kUpVol: v = s->up_vol; break;
      case FeatureBase::kDownVol: v = s->down_vol; break;
      case FeatureBase::kGreenRatio: v = s->green_ratio; break;
      case FeatureBase::kRainy: v = weather.rainy; break;
      case FeatureBase::kVisibility: v = weather.visibility; break;
      case FeatureBase::kPrecipitation: v = weather.precipitation; break;
    }
    if (!v) return std::nullopt;
    x.push_back(*v);
  }
  return x;
}

MatchKey MatchKey::of(const std::string& segment_id, Instant anchor) {
  return {segment_id, minute_of_day(anchor), arisk::day_of_week(anchor)};
}

void MatchedDataset::validate() const {
  auto bad = [](const std::string& what) {
    fail(ErrorKind::kInvalidArgument, "malformed matched dataset: " + what);
  };
  if (strata.empty()) bad("no strata");
  if (m < 1) bad("m < 1");
  if (feature_names.size() != k) bad("feature name count differs from k");
  for (const auto& s : strata) {
    if (s.controls.size() != m) bad("stratum without exactly m controls");
    if (s.case_obs.is_crash != 1) bad("case without is_crash=1");
    std::set<Instant> anchors;
    for (std::size_t j = 0; j < s.size(); ++j) {
      const auto& o = s.member(j);
      if (j > 0 && o.is_crash != 0) bad("control with is_crash=1");
      if (o.x.size() != k) bad("observation with wrong dimension");
      if (o.stratum_id != s.stratum_id) bad("observation in wrong stratum");
      if (!anchors.insert(o.anchor).second) bad("duplicate anchor in stratum");
    }
  }
}

std::vector<Instant> candidate_anchors(const RawCorpus& corpus,
                                       const CrashEvent& crash) {
  const auto& idx = require_index(corpus);
  static const std::vector<Instant> kNone;
  auto it = idx.crash_times.find(crash.segment_id);
  const auto& crashes = it == idx.crash_times.end() ? kNone : it->second;

  auto contaminated = [&](Instant t) {
    auto lo = std::lower_bound(crashes.begin(), crashes.end(),
                               t - kLeadWindow);
    return lo != crashes.end() && *lo <= t + kLeadWindow;
  };

  std::vector<Instant> out;
  const Instant t0 = crash.timestamp;
  // Earliest same-weekday, same-minute anchor not before the range start.
  const Instant first =
      t0 - floor_div(t0 - corpus.range.start, kWeek) * kWeek;
  for (Instant t = first; t <= corpus.range.end; t += kWeek) {
    if (t == t0) continue;
    if (!contaminated(t)) out.push_back(t);
  }
  return out;
}

MatchedDataset build_matched_dataset(const RawCorpus& corpus, std::size_t m,
                                     const FeatureSpec& features,
                                     std::uint64_t seed) {
  if (m < 1) fail(ErrorKind::kInvalidArgument, "m must be >= 1");
  MatchedDataset ds;
  ds.m = m;
  ds.k = features.size();
  ds.feature_names = features.names();
  ds.seed = seed;

  for (std::size_t ci = 0; ci < corpus.crashes.size(); ++ci) {
    const CrashEvent& crash = corpus.crashes[ci];
    auto case_x =
        extract_features(corpus, crash.segment_id, crash.timestamp, features);
    if (!case_x) {
      ds.dropped.push_back({crash.crash_id, "case features unavailable"});
      continue;
    }
    std::vector<std::pair<Instant, std::vector<double>>> viable;
    for (Instant t : candidate_anchors(corpus, crash)) {
      if (auto x = extract_features(corpus, crash.segment_id, t, features)) {
        viable.emplace_back(t, std::move(*x));
      }
    }
    if (viable.size() < m) {
      ds.dropped.push_back(
          {crash.crash_id, std::to_string(viable.size()) +
                               " viable controls, need " + std::to_string(m)});
      continue;
    }

    Rng rng(substream_seed(seed, ci));
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, viable.size() - 1);
      std::swap(viable[i], viable[pick(rng)]);
    }
    viable.resize(m);
    std::sort(viable.begin(), viable.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    Stratum s;
    s.stratum_id = static_cast<int>(ds.strata.size()) + 1;
    s.key = MatchKey::of(crash.segment_id, crash.timestamp);
    s.crash_id = crash.crash_id;
    s.case_obs = {s.stratum_id, 1, crash.timestamp, std::move(*case_x)};
    for (auto& [t, x] : viable) {
      s.controls.push_back({s.stratum_id, 0, t, std::move(x)});
    }
    ds.strata.push_back(std::move(s));
  }

  if (ds.strata.empty()) {
    fail(ErrorKind::kNoViableStrata,
         "NoViableStrata: all " + std::to_string(corpus.crashes.size()) +
             " crashes dropped at m=" + std::to_string(m));
  }
  return ds;
}

std::filesystem::path manifest_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".manifest");
  return p;
}

std::string dataset_csv(const MatchedDataset& ds) {
  std::vector<std::string> header = {"stratum_id", "is_crash", "anchor"};
  header.insert(header.end(), ds.feature_names.begin(), ds.feature_names.end());
  std::string out = csv_join(header) + "\n";
  for (const auto& s : ds.strata) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      const auto& o = s.member(j);
      out += std::to_string(o.stratum_id);
      out += ',';
      out += std::to_string(o.is_crash);
      out += ',';
      out += format_iso8601(o.anchor);
      for (double v : o.x) {
        out += ',';
        out += format_double(v);
      }
      out += '\n';
    }
  }
  return out;
}

std::string dataset_hash(const MatchedDataset& ds) {
  return hex64(fnv1a64(dataset_csv(ds)));
}

namespace {

std::string join(const std::vector<std::string>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(sep);
    out += v[i];
  }
  return out;
}

}  // namespace

void write_dataset(const MatchedDataset& ds, const std::filesystem::path& csv) {
  const std::string body = dataset_csv(ds);
  std::vector<std::string> segments, crash_ids, dropped;
  for (const auto& s : ds.strata) {
    segments.push_back(s.key.segment_id);
    crash_ids.push_back(s.crash_id);
  }
  for (const auto& d : ds.dropped) dropped.push_back(d.crash_id);

  KeyValues kv = {
      {"format", "arterial-risk-matched-dataset/1"},
      {"m", std::to_string(ds.m)},
      {"k", std::to_string(ds.k)},
      {"seed", std::to_string(ds.seed)},
      {"features", join(ds.feature_names, ',')},
      {"n_strata", std::to_string(ds.n_strata())},
      {"dropped_crash_count", std::to_string(ds.dropped.size())},
      {"dropped_crashes", join(dropped, ',')},
      {"stratum_segments", join(segments, ',')},
      {"stratum_crash_ids", join(crash_ids, ',')},
      {"csv_hash", hex64(fnv1a64(body))},
  };
  write_file(csv, body);
  write_file(manifest_path(csv), render_key_values(kv));
}

MatchedDataset read_dataset(const std::filesystem::path& csv) {
  const auto mpath = manifest_path(csv);
  if (!std::filesystem::exists(csv)) {
    fail(ErrorKind::kIo, "missing dataset file: " + csv.string());
  }
  if (!std::filesystem::exists(mpath)) {
    fail(ErrorKind::kIo, "missing dataset manifest: " + mpath.string());
  }
  const KeyValues kv = parse_key_values(read_file(mpath), "manifest");
  auto need = [&](const char* key) {
    auto v = lookup(kv, key);
    if (!v) fail_missing_column("manifest", key);
    return *v;
  };

  MatchedDataset ds;
  const auto m = parse_uint64(need("m"));
  const auto seed = parse_uint64(need("seed"));
  if (!m || *m < 1) fail_bad_row("manifest", 0, "m");
  if (!seed) fail_bad_row("manifest", 0, "seed");
  ds.m = *m;
  ds.seed = *seed;
  ds.feature_names = FeatureSpec::parse(need("features")).names();
  ds.k = ds.feature_names.size();
  std::vector<std::string> segments;
  std::vector<std::string> crash_ids;
  if (auto v = lookup(kv, "stratum_segments"); v && !v->empty()) {
    segments = split(*v, ',');
  }
  if (auto v = lookup(kv, "stratum_crash_ids"); v && !v->empty()) {
    crash_ids = split(*v, ',');
  }
  if (auto v = lookup(kv, "dropped_crashes"); v && !v->empty()) {
    for (auto& id : split(*v, ',')) ds.dropped.push_back({id, ""});
  } else if (auto n = lookup(kv, "dropped_crash_count")) {
    const auto count = parse_uint64(*n).value_or(0);
    for (std::uint64_t i = 0; i < count; ++i) ds.dropped.push_back({"", ""});
  }

  const CsvTable table = parse_csv(read_file(csv), "dataset");
  const std::vector<std::string> fixed = {"stratum_id", "is_crash", "anchor"};
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (table.header.size() <= i || table.header[i] != fixed[i]) {
      fail_missing_column("dataset", fixed[i]);
    }
  }
  for (std::size_t u = 0; u < ds.k; ++u) {
    if (table.header.size() <= 3 + u ||
        table.header[3 + u] != ds.feature_names[u]) {
      fail_missing_column("dataset", ds.feature_names[u]);
    }
  }

  std::map<int, Stratum> by_id;
  std::vector<int> order;
  for (const auto& row : table.rows) {
    if (row.fields.size() != 3 + ds.k) {
      fail_bad_row("dataset", row.line, "field count");
    }
    Observation o;
    auto sid = parse_int64(row.fields[0]);
    if (!sid) fail_bad_row("dataset", row.line, "stratum_id");
    o.stratum_id = static_cast<int>(*sid);
    auto y = parse_int64(row.fields[1]);
    if (!y || (*y != 0 && *y != 1)) fail_bad_row("dataset", row.line, "is_crash");
    o.is_crash = static_cast<int>(*y);
    auto t = parse_iso8601(trim(row.fields[2]));
    if (!t) fail_bad_row("dataset", row.line, "anchor");
    o.anchor = *t;
    for (std::size_t u = 0; u < ds.k; ++u) {
      auto v = parse_double(row.fields[3 + u]);
      if (!v || !std::isfinite(*v)) {
        fail_bad_row("dataset", row.line, ds.feature_names[u]);
      }
      o.x.push_back(*v);
    }
    auto [it, inserted] = by_id.try_emplace(o.stratum_id);
    Stratum& s = it->second;
    if (inserted) {
      s.stratum_id = o.stratum_id;
      s.case_obs.is_crash = -1;
      order.push_back(o.stratum_id);
    }
    if (o.is_crash == 1) {
      if (s.case_obs.is_crash == 1) {
        fail_bad_row("dataset", row.line, "second crash in stratum");
      }
      s.case_obs = std::move(o);
    } else {
      s.controls.push_back(std::move(o));
    }
  }

  for (std::size_t i = 0; i < order.size(); ++i) {
    Stratum& s = by_id.at(order[i]);
    if (s.case_obs.is_crash != 1) {
      fail(ErrorKind::kInvalidArgument,
           "stratum " + std::to_string(s.stratum_id) + " has no crash");
    }
    const std::string seg = i < segments.size() ? segments[i] : "";
    s.key = MatchKey::of(seg, s.case_obs.anchor);
    s.crash_id = i < crash_ids.size() ? crash_ids[i] : "";
    ds.strata.push_back(std::move(s));
  }
  ds.validate();
  return ds;
}

}  // namespace arisk
