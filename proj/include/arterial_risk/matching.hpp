// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

// Matched case-control construction: every crash window is paired with m
// non-crash windows on the same segment at the same minute of day and day of
// week, and each window is reduced to a feature vector.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "arterial_risk/ingest.hpp"

namespace arisk {

enum class FeatureBase {
  kAvgSpeed,
  kCvSpeed,
  kUpVol,
  kDownVol,
  kGreenRatio,
  kRainy,
  kVisibility,
  kPrecipitation,
};

/// One selectable feature. Slice features are named `<base>_s<slice>`
/// (e.g. `avg_speed_s2`); weather features carry no slice suffix.
struct FeatureRef {
  FeatureBase base = FeatureBase::kAvgSpeed;
  int slice = 0;  // 1..4 for slice features, 0 for weather
  std::string name;
};

/// The three predictors of the final conditional model.
inline constexpr const char* kDefaultFeatures = "avg_speed_s2,up_vol_s2,rainy";

struct FeatureSpec {
  std::vector<FeatureRef> features;

  /// Parses a comma-separated list. Throws Error(kUnknownFeature).
  static FeatureSpec parse(const std::string& list);
  static FeatureSpec parse(const std::vector<std::string>& names);
  std::vector<std::string> names() const;
  std::size_t size() const { return features.size(); }
};

/// Evaluates `spec` for one window; nullopt when any feature is missing.
std::optional<std::vector<double>> extract_features(const RawCorpus& corpus,
                                                    const std::string& segment,
                                                    Instant anchor,
                                                    const FeatureSpec& spec);

struct MatchKey {
  std::string segment_id;
  int time_of_day = 0;  // minute of day
  int day_of_week = 0;  // 0 = Sunday

  static MatchKey of(const std::string& segment_id, Instant anchor);
  bool operator==(const MatchKey&) const = default;
};

struct Observation {
  int stratum_id = 0;
  int is_crash = 0;
  Instant anchor = 0;
  std::vector<double> x;
};

struct Stratum {
  int stratum_id = 0;
  MatchKey key;
  std::string crash_id;
  Observation case_obs;
  std::vector<Observation> controls;

  std::size_t size() const { return controls.size() + 1; }
  /// Member j, with j = 0 the case.
  const Observation& member(std::size_t j) const {
    return j == 0 ? case_obs : controls[j - 1];
  }
};

struct DroppedCrash {
  std::string crash_id;
  std::string reason;
};

struct MatchedDataset {
  std::vector<Stratum> strata;
  std::size_t m = 0;
  std::size_t k = 0;
  std::vector<std::string> feature_names;

  std::uint64_t seed = 0;
  std::vector<DroppedCrash> dropped;

  std::size_t n_strata() const { return strata.size(); }
  std::size_t n_observations() const { return strata.size() * (m + 1); }

  /// Throws Error(kInvalidArgument) if any structural invariant fails.
  void validate() const;
};

/// Anchors at the crash's minute of day and day of week on the crash's
/// segment, on other dates inside the corpus range, excluding anchors within
/// 20 minutes of any crash on that segment. Sorted ascending.
std::vector<Instant> candidate_anchors(const RawCorpus& corpus,
                                       const CrashEvent& crash);

/// Samples m viable controls per crash without replacement. Crashes that
/// lack features or have fewer than m viable candidates are dropped and
/// listed in `dropped`. Throws Error(kNoViableStrata) when nothing is left.
MatchedDataset build_matched_dataset(const RawCorpus& corpus, std::size_t m,
                                     const FeatureSpec& features,
                                     std::uint64_t seed);

/// Writes the flat CSV (stratum_id,is_crash,anchor,<features>) and the
/// key=value manifest returned by `manifest_path`.
void write_dataset(const MatchedDataset& ds, const std::filesystem::path& csv);
MatchedDataset read_dataset(const std::filesystem::path& csv);
std::filesystem::path manifest_path(const std::filesystem::path& csv);
std::string dataset_csv(const MatchedDataset& ds);
/// Content hash of the dataset CSV, used to tie coefficient files to data.
std::string dataset_hash(const MatchedDataset& ds);

struct McmcConfig;

struct SweepRow {
  std::size_t m = 0;
  std::size_t n_strata = 0;
  std::size_t dropped = 0;
  double auc = 0.0;
  double dic = 0.0;
  double p_d = 0.0;
};

/// Builds, fits (conditional model) and scores one dataset per ratio.
std::vector<SweepRow> ratio_sweep(const RawCorpus& corpus,
                                  const std::vector<std::size_t>& ratios,
                                  const FeatureSpec& features,
                                  const McmcConfig& mcmc, std::uint64_t seed);

}  // namespace arisk
