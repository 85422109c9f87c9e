// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

// Model comparison and prediction: hazard ratios, deviance and DIC, relative
// odds-ratio scoring, score normalization and ROC/AUC.

#pragma once

#include <span>
#include <vector>

#include "arterial_risk/models.hpp"
#include "arterial_risk/sampler.hpp"

namespace arisk {

/// exp(posterior mean) for every parameter in the summary.
std::vector<double> hazard_ratios(const PosteriorSummary& summary);

/// -2 x data log-likelihood (priors and latent densities excluded).
double deviance(ModelKind kind, std::span<const double> theta,
                const Design& d);

struct DicResult {
  double d_bar = 0.0;
  double d_hat = 0.0;
  double p_d = 0.0;
  double dic = 0.0;
  bool negative_p_d = false;
};

/// d_bar over all kept draws, d_hat at the posterior mean,
/// p_d = d_bar - d_hat, dic = d_bar + p_d. Throws Error(kTooFewDraws).
DicResult dic(const ChainSet& chains, ModelKind kind, const Design& d);

struct Score {
  int stratum_id = 0;
  int is_crash = 0;
  double raw_odds = 1.0;
  double normalized = 1.0;
};

struct ScoreSet {
  std::vector<Score> scores;
  bool is_normalized = false;
};

/// Relative odds of x1 against x2: exp(beta . (x1 - x2)).
double relative_odds(std::span<const double> beta, std::span<const double> x1,
                     std::span<const double> x2);

/// For every observation, exp(beta . (x - mean of the stratum's controls)).
ScoreSet predict_relative_odds(std::span<const double> beta,
                               const Design& d);
ScoreSet predict_relative_odds(std::span<const double> beta,
                               const MatchedDataset& ds);

/// Odds exp(eta) under a pooled model: logistic [alpha, beta] or ranef
/// [alpha, beta, u, tau] (the group intercept is included).
ScoreSet predict_model_odds(ModelKind kind, std::span<const double> theta,
                            const Design& d);

/// Divides raw odds by their maximum. Throws Error(kEmptyScores).
ScoreSet normalize_scores(const ScoreSet& scores);

struct RocPoint {
  double threshold = 0.0;  // classify as crash when score >= threshold
  double fpr = 0.0;
  double tpr = 0.0;
};

struct AucResult {
  double auc = 0.5;
  std::vector<RocPoint> curve;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

/// Mann-Whitney AUC with half credit for ties; curve points at every distinct
/// score. Throws Error(kSingleClass) unless both classes are present.
AucResult roc_auc(std::span<const double> scores, std::span<const int> labels);
/// Uses normalized scores when present, raw odds otherwise.
AucResult roc_auc(const ScoreSet& scores);

/// Trapezoidal area under an ROC curve.
double trapezoid_area(const std::vector<RocPoint>& curve);

}  // namespace arisk
