// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "arterial_risk/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "arterial_risk/error.hpp"

namespace arisk {

std::vector<double> hazard_ratios(const PosteriorSummary& summary) {
  std::vector<double> out;
  out.reserve(summary.params.size());
  for (const auto& p : summary.params) out.push_back(std::exp(p.mean));
  return out;
}

double deviance(ModelKind kind, std::span<const double> theta,
                const Design& d) {
  return -2.0 * data_log_likelihood(kind, theta, d);
}

DicResult dic(const ChainSet& chains, ModelKind kind, const Design& d) {
  if (chains.kept < kMinDrawsPerChain) {
    fail(ErrorKind::kTooFewDraws,
         "TooFewDraws: DIC needs >= 100 kept draws per chain");
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < chains.chains; ++c) {
    for (std::size_t i = 0; i < chains.kept; ++i) {
      sum += deviance(kind, chains.draw(c, i), d);
    }
  }
  DicResult r;
  r.d_bar = sum / static_cast<double>(chains.total_draws());
  r.d_hat = deviance(kind, chains.mean(), d);
  r.p_d = r.d_bar - r.d_hat;
  r.dic = r.d_bar + r.p_d;
  r.negative_p_d = r.p_d < 0.0;
  return r;
}

double relative_odds(std::span<const double> beta, std::span<const double> x1,
                     std::span<const double> x2) {
  if (beta.size() != x1.size() || beta.size() != x2.size()) {
    fail(ErrorKind::kDimensionMismatch, "DimensionMismatch: relative odds");
  }
  double s = 0.0;
  for (std::size_t u = 0; u < beta.size(); ++u) s += beta[u] * (x1[u] - x2[u]);
  return std::exp(s);
}

ScoreSet predict_relative_odds(std::span<const double> beta,
                               const Design& d) {
  if (beta.size() != d.k) {
    fail(ErrorKind::kDimensionMismatch,
         "DimensionMismatch: beta has " + std::to_string(beta.size()) +
             " entries, expected " + std::to_string(d.k));
  }
  ScoreSet out;
  out.scores.reserve(d.n_rows());
  std::vector<double> control_mean(d.k);
  const double m = static_cast<double>(d.members - 1);
  for (std::size_t i = 0; i < d.n_strata; ++i) {
    std::fill(control_mean.begin(), control_mean.end(), 0.0);
    for (std::size_t j = 1; j < d.members; ++j) {
      const auto x = d.row(i, j);
      for (std::size_t u = 0; u < d.k; ++u) control_mean[u] += x[u];
    }
    for (auto& v : control_mean) v /= m;
    for (std::size_t j = 0; j < d.members; ++j) {
      Score s;
      s.stratum_id = d.stratum_ids.empty() ? static_cast<int>(i + 1)
                                           : d.stratum_ids[i];
      s.is_crash = j == 0 ? 1 : 0;
      s.raw_odds = relative_odds(beta, d.row(i, j), control_mean);
      s.normalized = s.raw_odds;
      out.scores.push_back(s);
    }
  }
  return out;
}

ScoreSet predict_relative_odds(std::span<const double> beta,
                               const MatchedDataset& ds) {
  return predict_relative_odds(beta, make_design(ds));
}

ScoreSet predict_model_odds(ModelKind kind, std::span<const double> theta,
                            const Design& d) {
  if (kind == ModelKind::kConditional) {
    return predict_relative_odds(theta, d);
  }
  double alpha = 0.0;
  std::vector<double> beta;
  std::vector<double> u;
  if (kind == ModelKind::kLogistic) {
    auto p = unpack_logistic(theta, d.k);
    alpha = p.alpha;
    beta = std::move(p.beta);
  } else {
    auto p = unpack_ranef(theta, d.k, d.n_groups);
    alpha = p.alpha;
    beta = std::move(p.beta);
    u = std::move(p.u);
  }
  ScoreSet out;
  for (std::size_t i = 0; i < d.n_strata; ++i) {
    const double offset = alpha + (u.empty() ? 0.0 : u[d.group[i]]);
    for (std::size_t j = 0; j < d.members; ++j) {
      const auto x = d.row(i, j);
      double eta = offset;
      for (std::size_t v = 0; v < d.k; ++v) eta += beta[v] * x[v];
      Score s;
      s.stratum_id = d.stratum_ids.empty() ? static_cast<int>(i + 1)
                                           : d.stratum_ids[i];
      s.is_crash = j == 0 ? 1 : 0;
      s.raw_odds = std::exp(eta);
      s.normalized = s.raw_odds;
      out.scores.push_back(s);
    }
  }
  return out;
}

ScoreSet normalize_scores(const ScoreSet& scores) {
  if (scores.scores.empty()) {
    fail(ErrorKind::kEmptyScores, "EmptyScores: nothing to normalize");
  }
  double top = 0.0;
  for (const auto& s : scores.scores) top = std::max(top, s.raw_odds);
  if (!(top > 0.0) || !std::isfinite(top)) {
    fail(ErrorKind::kInvalidArgument,
         "raw odds must be positive and finite to normalize");
  }
  ScoreSet out = scores;
  for (auto& s : out.scores) s.normalized = s.raw_odds / top;
  out.is_normalized = true;
  return out;
}

AucResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    fail(ErrorKind::kDimensionMismatch, "scores and labels differ in length");
  }
  AucResult r;
  for (int y : labels) (y ? r.n_pos : r.n_neg)++;
  if (r.n_pos == 0 || r.n_neg == 0) {
    fail(ErrorKind::kSingleClass,
         "SingleClass: ROC needs at least one crash and one non-crash");
  }

  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Mid-ranks over tie groups; sums of half-integers stay exact in double.
  double rank_sum_pos = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    std::size_t pos_in_group = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      pos_in_group += labels[order[j]] ? 1 : 0;
      ++j;
    }
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    rank_sum_pos += mid_rank * static_cast<double>(pos_in_group);
    i = j;
  }
  const double np = static_cast<double>(r.n_pos);
  const double nn = static_cast<double>(r.n_neg);
  const double u_stat = rank_sum_pos - np * (np + 1.0) / 2.0;
  r.auc = u_stat / (np * nn);

  r.curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = n; i > 0;) {
    std::size_t j = i;
    const double threshold = scores[order[i - 1]];
    while (j > 0 && scores[order[j - 1]] == threshold) {
      (labels[order[j - 1]] ? tp : fp)++;
      --j;
    }
    r.curve.push_back({threshold, static_cast<double>(fp) / nn,
                       static_cast<double>(tp) / np});
    i = j;
  }
  return r;
}

AucResult roc_auc(const ScoreSet& scores) {
  std::vector<double> values;
  std::vector<int> labels;
  values.reserve(scores.scores.size());
  labels.reserve(scores.scores.size());
  for (const auto& s : scores.scores) {
    values.push_back(scores.is_normalized ? s.normalized : s.raw_odds);
    labels.push_back(s.is_crash);
  }
  return roc_auc(values, labels);
}

double trapezoid_area(const std::vector<RocPoint>& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) *
            (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  }
  return area;
}

}  // namespace arisk
