// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

// Likelihoods, priors and posteriors for the three compared models:
//
//   conditional  within-stratum conditional logit; stratum intercepts cancel
//                and only beta is estimated.
//   logistic     pooled Bernoulli-logit with one intercept.
//   ranef        logistic plus Normal(0, 1/tau) intercepts per group.
//
// Parameter vectors are flat. Layouts:
//   conditional  [beta_1..beta_k]
//   logistic     [alpha, beta_1..beta_k]
//   ranef        [alpha, beta_1..beta_k, u_1..u_G, tau]

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arterial_risk/matching.hpp"

namespace arisk {

enum class ModelKind { kConditional, kLogistic, kRanef };
enum class Grouping { kStratum, kSegment };

const char* to_string(ModelKind kind);
const char* to_string(Grouping g);
std::optional<ModelKind> parse_model_kind(std::string_view s);
std::optional<Grouping> parse_grouping(std::string_view s);

/// Flattened view of a MatchedDataset for likelihood evaluation. Rows are
/// stratum-major with the case first in every stratum.
struct Design {
  std::size_t n_strata = 0;
  std::size_t members = 0;  // m + 1
  std::size_t k = 0;
  std::vector<double> x;  // (n_strata * members) x k, row-major
  std::vector<int> stratum_ids;
  std::vector<std::size_t> group;  // per stratum
  std::size_t n_groups = 0;
  std::vector<std::string> group_labels;
  std::vector<std::string> feature_names;

  std::size_t n_rows() const { return n_strata * members; }
  std::span<const double> row(std::size_t r) const {
    return {x.data() + r * k, k};
  }
  std::span<const double> row(std::size_t stratum, std::size_t j) const {
    return row(stratum * members + j);
  }
  /// Outcome of row r (1 for the first member of each stratum).
  int y(std::size_t r) const { return r % members == 0 ? 1 : 0; }
};

Design make_design(const MatchedDataset& ds,
                   Grouping grouping = Grouping::kStratum);

struct PriorSpec {
  double beta_mean = 0.0;
  double beta_variance = 1000.0;
  double alpha_mean = 0.0;
  double alpha_variance = 1000.0;
  double tau_shape = 0.001;
  double tau_rate = 0.001;

  void validate() const;
};

/// Number of parameters in the flat layout.
std::size_t parameter_count(ModelKind kind, const Design& d);
std::vector<std::string> parameter_names(ModelKind kind, const Design& d);

// ---- conditional model -----------------------------------------------------

/// Sum over strata of log l_i(beta); always <= 0.
double cond_log_likelihood(std::span<const double> beta, const Design& d);
double cond_log_likelihood(std::span<const double> beta,
                           const MatchedDataset& ds);

std::vector<double> cond_gradient(std::span<const double> beta,
                                  const Design& d);
std::vector<double> cond_gradient(std::span<const double> beta,
                                  const MatchedDataset& ds);

/// Analytic Hessian (k x k, row-major); negative semidefinite.
std::vector<double> cond_hessian(std::span<const double> beta,
                                 const Design& d);

// ---- logistic / random-effect models --------------------------------------

struct LogisticParams {
  double alpha = 0.0;
  std::vector<double> beta;
};

struct RanefLogisticParams {
  double alpha = 0.0;
  std::vector<double> beta;
  std::vector<double> u;
  double tau = 1.0;
};

double logistic_log_likelihood(const LogisticParams& p, const Design& d);
double logistic_log_likelihood(const LogisticParams& p,
                               const MatchedDataset& ds);

/// Bernoulli part plus the latent Normal(0, 1/tau) density of u.
double ranef_log_likelihood(const RanefLogisticParams& p, const Design& d);
double ranef_log_likelihood(const RanefLogisticParams& p,
                            const MatchedDataset& ds, Grouping grouping);
/// Sum over groups of log Normal(u_g | 0, 1/tau).
double ranef_latent_log_density(std::span<const double> u, double tau);

LogisticParams unpack_logistic(std::span<const double> theta, std::size_t k);
RanefLogisticParams unpack_ranef(std::span<const double> theta, std::size_t k,
                                 std::size_t n_groups);

// ---- generic entry points over the flat layout ----------------------------

/// Model log-likelihood (ranef includes the latent term).
double log_likelihood(ModelKind kind, std::span<const double> theta,
                      const Design& d);
/// Data log-likelihood only (ranef excludes the latent term); the basis of
/// the deviance.
double data_log_likelihood(ModelKind kind, std::span<const double> theta,
                           const Design& d);
double log_prior(ModelKind kind, std::span<const double> theta, std::size_t k,
                 const PriorSpec& spec);
double log_posterior(ModelKind kind, std::span<const double> theta,
                     const Design& d, const PriorSpec& spec);

// ---- Newton maximum likelihood ---------------------------------------------

struct MleResult {
  std::vector<double> beta;
  std::vector<double> std_errors;
  std::vector<double> covariance;  // inverse observed information, row-major
  double log_likelihood = 0.0;
  int iterations = 0;
};

struct MleOptions {
  double tol = 1e-8;
  int max_iter = 100;
  /// Penalize with this prior (maximum a posteriori); nullopt for plain MLE.
  std::optional<PriorSpec> prior;
};

/// Newton-Raphson on the conditional log-likelihood. Throws Error(kSeparation)
/// when the likelihood has no finite maximizer, Error(kNoConvergence) on
/// iteration exhaustion or a singular information matrix.
MleResult mle_fit(const Design& d, const MleOptions& opts = {});
MleResult mle_fit(const MatchedDataset& ds, const MleOptions& opts = {});

/// Newton-Raphson for the pooled logistic model; returns [alpha, beta].
MleResult logistic_mle_fit(const Design& d, const MleOptions& opts = {});

}  // namespace arisk
