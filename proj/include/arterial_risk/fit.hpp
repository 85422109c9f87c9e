// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

// End-to-end Bayesian fit of one model on one matched dataset: sampler setup,
// posterior summary, convergence check, DIC and in-sample AUC.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "arterial_risk/diagnostics.hpp"
#include "arterial_risk/models.hpp"
#include "arterial_risk/sampler.hpp"

namespace arisk {

struct FitConfig {
  ModelKind kind = ModelKind::kConditional;
  Grouping grouping = Grouping::kStratum;
  McmcConfig mcmc;
  PriorSpec prior;
};

struct FitResult {
  ModelKind kind = ModelKind::kConditional;
  Grouping grouping = Grouping::kStratum;
  std::vector<std::string> feature_names;
  std::size_t n_strata = 0;
  std::size_t m = 0;
  std::string dataset_hash;
  PriorSpec prior;

  ChainSet chains;  // natural parameterization (tau, not log tau)
  PosteriorSummary summary;
  RhatReport rhat;
  DicResult dic;
  ScoreSet scores;  // normalized, at the posterior mean
  AucResult auc;
  std::optional<MleResult> mle;  // starting point when one exists
  std::vector<std::string> warnings;

  /// Posterior means of the fixed effects: [beta] or [alpha, beta].
  std::vector<double> fixed_effect_means() const;
};

FitResult fit_model(const MatchedDataset& ds, const FitConfig& config);

/// Sampler and in-sample scoring for a prepared design (no dataset hash).
FitResult fit_design(const Design& d, const FitConfig& config);

/// key=value coefficient file: model_kind, prior, dataset hash, then one
/// `<parameter>=<posterior mean>` line per fixed effect.
struct CoefficientFile {
  ModelKind kind = ModelKind::kConditional;
  std::vector<std::pair<std::string, double>> coefficients;
  std::string dataset_hash;
  PriorSpec prior;
};

std::string render_coefficients(const FitResult& fit);
void write_coefficients(const FitResult& fit, const std::filesystem::path& p);
CoefficientFile read_coefficients(const std::filesystem::path& p);

/// Applies a coefficient file to a dataset: relative odds for conditional
/// coefficients, exp(alpha + beta . x) for pooled ones. Normalized.
ScoreSet score_dataset(const CoefficientFile& coef, const MatchedDataset& ds);

/// CSV with columns chain,iteration,<param names>.
std::string render_draws(const ChainSet& chains);

}  // namespace arisk
