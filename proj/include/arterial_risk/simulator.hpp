// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

// Synthetic data with known coefficients, for parameter-recovery checks.
//
// Matched mode draws each stratum's m + 1 feature vectors and picks the case
// with probability softmax(true_beta . x) over the members, which is exactly
// the within-stratum law the conditional likelihood models.
//
// Corpus mode emits a complete raw corpus (segments, Bluetooth detections,
// 15-minute volumes, hourly weather, optional signal phases) and places
// crashes by thinning: every 5-minute candidate window on every segment
// becomes a crash with probability logistic(intercept + true_beta . x), with
// x extracted from the generated data exactly as ingest would.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "arterial_risk/ingest.hpp"
#include "arterial_risk/matching.hpp"
#include "arterial_risk/text_io.hpp"

namespace arisk {

struct FeatureDistribution {
  enum class Kind { kNormal, kPoisson, kBernoulli };
  Kind kind = Kind::kNormal;
  double a = 0.0;  // normal mean, poisson rate, bernoulli p
  double b = 1.0;  // normal sd
  /// Draw once per stratum and share across its members.
  bool stratum_shared = false;

  static FeatureDistribution normal(double mean, double sd);
  static FeatureDistribution poisson(double rate);
  static FeatureDistribution bernoulli(double p);
  std::string describe() const;
};

/// A plausible marginal for a named feature (speed ~ N(40, 10), volume ~
/// Poisson(100), rainy ~ Bernoulli(0.3), ...). Throws Error(kUnknownFeature).
FeatureDistribution default_feature_distribution(const std::string& name);

enum class SimMode { kMatched, kCorpus };

struct SimConfig {
  std::vector<std::string> feature_names = {"avg_speed_s2", "up_vol_s2",
                                            "rainy"};
  std::vector<double> true_beta = {-0.03, 0.01, 0.8};
  std::vector<FeatureDistribution> feature_model = {
      FeatureDistribution::normal(40.0, 10.0),
      FeatureDistribution::poisson(100.0),
      FeatureDistribution::bernoulli(0.3)};
  std::size_t n_strata = 113;
  std::size_t m = 8;
  std::uint64_t seed = 0;
  SimMode mode = SimMode::kMatched;

  // Corpus mode.
  std::size_t n_segments = 4;
  std::size_t weeks = 12;
  double crash_intercept = -6.0;
  double detection_rate = 6.0;  // Bluetooth detections per 5 minutes
  bool with_phases = false;
  Instant start = 1488758400;  // 2017-03-06T00:00:00Z, a Monday

  std::size_t k() const { return true_beta.size(); }
  /// Throws Error(kInvalidConfig).
  void validate() const;
};

struct SimResult {
  std::optional<MatchedDataset> dataset;
  std::optional<RawCorpus> corpus;
  KeyValues truth;
};

SimResult simulate_matched(const SimConfig& config);
SimResult simulate_corpus(const SimConfig& config);

/// Writes dataset.csv + dataset.manifest (matched) or the six corpus CSVs
/// (corpus), plus truth.txt, into `dir`.
void write_sim_result(const SimResult& result, const std::filesystem::path& dir);

}  // namespace arisk
