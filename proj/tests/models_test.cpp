// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <random>

#include "arterial_risk/error.hpp"
#include "arterial_risk/models.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace arisk;
using testing::kind_of;

namespace {

const double kLn2Pi = std::log(2.0 * std::numbers::pi);

// k = 1, two members. `agree` strata have the case at x = 1 and the control
// at x = 0; `disagree` strata the reverse.
Design pairs_design(std::size_t agree, std::size_t disagree) {
  Design d;
  d.n_strata = agree + disagree;
  d.members = 2;
  d.k = 1;
  for (std::size_t i = 0; i < d.n_strata; ++i) {
    const bool a = i < agree;
    d.x.push_back(a ? 1.0 : 0.0);
    d.x.push_back(a ? 0.0 : 1.0);
    d.stratum_ids.push_back(static_cast<int>(i) + 1);
    d.group.push_back(i);
    d.group_labels.push_back(std::to_string(i + 1));
  }
  d.n_groups = d.n_strata;
  d.feature_names = {"x"};
  return d;
}

double brute_cond(const std::vector<double>& beta, const Design& d) {
  double total = 0.0;
  for (std::size_t i = 0; i < d.n_strata; ++i) {
    double denom = 0.0;
    double num = 0.0;
    for (std::size_t j = 0; j < d.members; ++j) {
      double eta = 0.0;
      for (std::size_t u = 0; u < d.k; ++u) eta += beta[u] * d.row(i, j)[u];
      denom += std::exp(eta);
      if (j == 0) num = std::exp(eta);
    }
    total += std::log(num / denom);
  }
  return total;
}

}  // namespace

TEST_CASE("names and layouts") {
  CHECK(parse_model_kind("ranef") == ModelKind::kRanef);
  CHECK_FALSE(parse_model_kind("probit").has_value());
  CHECK(parse_grouping("segment") == Grouping::kSegment);
  CHECK_FALSE(parse_grouping("day").has_value());
  CHECK(std::string(to_string(ModelKind::kConditional)) == "conditional");

  const Design d = pairs_design(2, 1);
  CHECK(parameter_count(ModelKind::kConditional, d) == 1);
  CHECK(parameter_count(ModelKind::kLogistic, d) == 2);
  CHECK(parameter_count(ModelKind::kRanef, d) == 6);
  CHECK(parameter_names(ModelKind::kRanef, d) ==
        std::vector<std::string>{"intercept", "x", "u[1]", "u[2]", "u[3]", "tau"});
}

TEST_CASE("conditional likelihood: hand values") {
  const Design d = pairs_design(1, 0);
  const std::vector<double> b{std::log(3.0)};
  CHECK(cond_log_likelihood(b, d) == doctest::Approx(std::log(0.75)));
  CHECK(cond_log_likelihood(b, d) == doctest::Approx(-0.28768).epsilon(1e-5));

  std::mt19937_64 rng(1);
  const Design nine = testing::random_design(rng, 3, 9, 2);
  const std::vector<double> zero{0.0, 0.0};
  CHECK(cond_log_likelihood(zero, nine) == doctest::Approx(-3.0 * std::log(9.0)));
  CHECK(-2.0 * cond_log_likelihood(zero, nine) == doctest::Approx(13.183).epsilon(1e-4));
}

TEST_CASE("conditional likelihood matches a direct evaluation") {
  std::mt19937_64 rng(2);
  const Design d = testing::random_design(rng, 40, 5, 3, 1.5);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> b{normal(rng), normal(rng), normal(rng)};
    CHECK(cond_log_likelihood(b, d) == doctest::Approx(brute_cond(b, d)).epsilon(1e-10));
    CHECK(cond_log_likelihood(b, d) <= 0.0);
  }
  // The MatchedDataset overload agrees with the Design one.
  const auto ds = testing::dataset_from(d);
  const std::vector<double> b{0.3, -0.2, 0.1};
  CHECK(cond_log_likelihood(b, ds) == doctest::Approx(cond_log_likelihood(b, d)));
}

TEST_CASE("conditional likelihood is stable for large linear predictors") {
  std::mt19937_64 rng(3);
  const Design d = testing::random_design(rng, 5, 4, 1, 100.0);
  const std::vector<double> b{20.0};
  const double ll = cond_log_likelihood(b, d);
  CHECK(std::isfinite(ll));
  CHECK(ll <= 0.0);
}

TEST_CASE("conditional likelihood ignores stratum-constant shifts") {
  std::mt19937_64 rng(4);
  Design d = testing::random_design(rng, 20, 4, 2);
  const std::vector<double> b{0.7, -1.1};
  const double before = cond_log_likelihood(b, d);
  std::normal_distribution<double> normal(0.0, 5.0);
  for (std::size_t i = 0; i < d.n_strata; ++i) {
    const double s0 = normal(rng), s1 = normal(rng);
    for (std::size_t j = 0; j < d.members; ++j) {
      d.x[(i * d.members + j) * 2 + 0] += s0;
      d.x[(i * d.members + j) * 2 + 1] += s1;
    }
  }
  CHECK(cond_log_likelihood(b, d) == doctest::Approx(before).epsilon(1e-9));
}

TEST_CASE("conditional gradient and Hessian match finite differences") {
  std::mt19937_64 rng(5);
  const Design d = testing::random_design(rng, 30, 4, 3);
  const std::vector<double> b{0.2, -0.4, 0.9};
  const auto g = cond_gradient(b, d);
  const auto h = cond_hessian(b, d);
  const double eps = 1e-5;
  for (std::size_t u = 0; u < 3; ++u) {
    auto hi = b, lo = b;
    hi[u] += eps;
    lo[u] -= eps;
    const double fd = (cond_log_likelihood(hi, d) - cond_log_likelihood(lo, d)) / (2 * eps);
    CHECK(g[u] == doctest::Approx(fd).epsilon(1e-6));
    const auto gh = cond_gradient(hi, d);
    const auto gl = cond_gradient(lo, d);
    for (std::size_t v = 0; v < 3; ++v) {
      CHECK(h[v * 3 + u] == doctest::Approx((gh[v] - gl[v]) / (2 * eps)).epsilon(1e-5));
    }
  }
  // Negative semidefinite: z' H z <= 0 for random directions.
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 20; ++rep) {
    double q = 0.0;
    std::vector<double> z{normal(rng), normal(rng), normal(rng)};
    for (std::size_t u = 0; u < 3; ++u) {
      for (std::size_t v = 0; v < 3; ++v) q += z[u] * h[u * 3 + v] * z[v];
    }
    CHECK(q <= 1e-12);
  }
}

TEST_CASE("logistic likelihood: hand values") {
  std::mt19937_64 rng(6);
  const Design d = testing::random_design(rng, 2, 9, 2);
  CHECK(logistic_log_likelihood({0.0, {0.0, 0.0}}, d) ==
        doctest::Approx(-18.0 * std::log(2.0)));
  CHECK(-2.0 * logistic_log_likelihood({0.0, {0.0, 0.0}}, d) ==
        doctest::Approx(24.953).epsilon(1e-4));
  // p = 1/9 for everyone: each stratum adds ln(1/9) + 8 ln(8/9).
  const double a = -std::log(8.0);
  CHECK(logistic_log_likelihood({a, {0.0, 0.0}}, d) ==
        doctest::Approx(2.0 * (std::log(1.0 / 9) + 8.0 * std::log(8.0 / 9))));
  const auto ds = testing::dataset_from(d);
  CHECK(logistic_log_likelihood({0.1, {0.2, 0.3}}, ds) ==
        doctest::Approx(logistic_log_likelihood({0.1, {0.2, 0.3}}, d)));
}

TEST_CASE("random-effect likelihood: hand values") {
  CHECK(ranef_latent_log_density(std::vector<double>{1.0, -1.0}, 1.0) ==
        doctest::Approx(2.0 * (-0.5 * kLn2Pi) - 1.0));
  CHECK(ranef_latent_log_density(std::vector<double>{2.0}, 4.0) ==
        doctest::Approx(0.5 * std::log(4.0) - 0.5 * kLn2Pi - 8.0));
  CHECK(kind_of([] { ranef_latent_log_density(std::vector<double>{0.0}, 0.0); }) ==
        ErrorKind::kNonPositiveTau);

  // Two strata of two members, x = 0 everywhere, u = (1, -1).
  Design z;
  z.n_strata = 2;
  z.members = 2;
  z.k = 1;
  z.x.assign(4, 0.0);
  z.group = {0, 1};
  z.n_groups = 2;
  z.group_labels = {"1", "2"};
  z.feature_names = {"x"};
  const auto sig = [](double e) { return 1.0 / (1.0 + std::exp(-e)); };
  const double data = std::log(sig(1)) + std::log(1 - sig(1)) +
                      std::log(sig(-1)) + std::log(1 - sig(-1));
  const RanefLogisticParams p{0.0, {0.0}, {1.0, -1.0}, 1.0};
  CHECK(ranef_log_likelihood(p, z) == doctest::Approx(data - kLn2Pi - 1.0));
  const std::vector<double> theta{0.0, 0.0, 1.0, -1.0, 1.0};
  CHECK(log_likelihood(ModelKind::kRanef, theta, z) == doctest::Approx(data - kLn2Pi - 1.0));
  CHECK(data_log_likelihood(ModelKind::kRanef, theta, z) == doctest::Approx(data));

  // With u = 0 the data part equals the pooled logistic likelihood.
  const std::vector<double> flat{0.4, 0.0, 0.0, 0.0, 2.0};
  CHECK(data_log_likelihood(ModelKind::kRanef, flat, z) ==
        doctest::Approx(logistic_log_likelihood({0.4, {0.0}}, z)));
}

TEST_CASE("segment grouping shares intercepts across strata") {
  std::mt19937_64 rng(7);
  auto ds = testing::dataset_from(testing::random_design(rng, 4, 3, 1));
  ds.strata[0].key.segment_id = "A";
  ds.strata[1].key.segment_id = "B";
  ds.strata[2].key.segment_id = "A";
  ds.strata[3].key.segment_id = "C";
  const Design d = make_design(ds, Grouping::kSegment);
  CHECK(d.n_groups == 3);
  CHECK(d.group == std::vector<std::size_t>{0, 1, 0, 2});
  CHECK(d.group_labels == std::vector<std::string>{"A", "B", "C"});
  CHECK(make_design(ds).n_groups == 4);

  ds.strata[1].key.segment_id.clear();
  CHECK(kind_of([&] { make_design(ds, Grouping::kSegment); }) == ErrorKind::kUnknownGrouping);
}

TEST_CASE("priors") {
  const PriorSpec prior;
  const double vague = -0.5 * (kLn2Pi + std::log(1000.0));
  CHECK(log_prior(ModelKind::kConditional, std::vector<double>{0.0, 0.0}, 2, prior) ==
        doctest::Approx(2 * vague));
  CHECK(log_prior(ModelKind::kConditional, std::vector<double>{10.0}, 1, prior) ==
        doctest::Approx(vague - 100.0 / 2000.0));
  // Gamma(a, b) density of tau, with a = 2, b = 3: log(9 tau e^{-3 tau}).
  PriorSpec g;
  g.tau_shape = 2.0;
  g.tau_rate = 3.0;
  const std::vector<double> theta{0.0, 0.0, 0.0, 0.5};
  CHECK(log_prior(ModelKind::kRanef, theta, 1, g) ==
        doctest::Approx(2 * vague + std::log(9.0 * 0.5) - 1.5));
  CHECK(kind_of([&] {
          log_prior(ModelKind::kRanef, std::vector<double>{0.0, 0.0, 0.0, -1.0}, 1, g);
        }) == ErrorKind::kNonPositiveTau);

  PriorSpec bad;
  bad.beta_variance = 0.0;
  CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::kInvalidConfig);

  const Design d = pairs_design(2, 1);
  CHECK(log_posterior(ModelKind::kConditional, std::vector<double>{0.5}, d, prior) ==
        doctest::Approx(cond_log_likelihood(std::vector<double>{0.5}, d) +
                        log_prior(ModelKind::kConditional, std::vector<double>{0.5}, 1, prior)));
  CHECK(kind_of([&] {
          log_posterior(ModelKind::kLogistic, std::vector<double>{0.5}, d, prior);
        }) == ErrorKind::kDimensionMismatch);
}

TEST_CASE("conditional MLE: closed form for paired binary exposure") {
  // l = n1 b - (n1 + n2) log(1 + e^b), maximized at b = log(n1 / n2).
  const Design d = pairs_design(30, 10);
  const auto fit = mle_fit(d);
  REQUIRE(fit.beta.size() == 1);
  CHECK(fit.beta[0] == doctest::Approx(std::log(3.0)).epsilon(1e-8));
  // Information (n1 + n2) p (1 - p) with p = 3/4.
  CHECK(fit.std_errors[0] == doctest::Approx(std::sqrt(1.0 / 7.5)).epsilon(1e-6));
  CHECK(fit.log_likelihood == doctest::Approx(30 * std::log(0.75) + 10 * std::log(0.25)));
  CHECK(fit.iterations > 0);

  // The prior pulls the MAP toward zero.
  MleOptions opts;
  opts.prior = PriorSpec{};
  const auto map = mle_fit(d, opts);
  CHECK(map.beta[0] < fit.beta[0]);
  CHECK(map.beta[0] > fit.beta[0] - 0.01);
}

TEST_CASE("conditional MLE recovers simulated coefficients") {
  std::mt19937_64 rng(8);
  std::size_t n = 3000, members = 5;
  Design d = testing::random_design(rng, n, members, 2);
  const std::vector<double> truth{0.8, -0.5};
  std::uniform_real_distribution<double> unif;
  // Re-order each stratum so the case is drawn from the conditional model.
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> w(members);
    double total = 0.0;
    for (std::size_t j = 0; j < members; ++j) {
      w[j] = std::exp(truth[0] * d.row(i, j)[0] + truth[1] * d.row(i, j)[1]);
      total += w[j];
    }
    double r = unif(rng) * total;
    std::size_t pick = 0;
    while (pick + 1 < members && r > w[pick]) r -= w[pick++];
    for (std::size_t u = 0; u < 2; ++u) {
      std::swap(d.x[(i * members) * 2 + u], d.x[(i * members + pick) * 2 + u]);
    }
  }
  const auto fit = mle_fit(d);
  for (std::size_t u = 0; u < 2; ++u) {
    CHECK(std::abs(fit.beta[u] - truth[u]) < 4.0 * fit.std_errors[u]);
  }
}

TEST_CASE("conditional MLE detects separation") {
  CHECK(kind_of([] { mle_fit(pairs_design(10, 0)); }) == ErrorKind::kSeparation);
  // With a proper prior the MAP still exists.
  MleOptions opts;
  opts.prior = PriorSpec{};
  CHECK(std::isfinite(mle_fit(pairs_design(10, 0), opts).beta[0]));
}

TEST_CASE("logistic MLE: closed form for a binary covariate") {
  // Rows with x = 1: 30 cases, 10 controls; x = 0: 10 cases, 30 controls.
  const Design d = pairs_design(30, 10);
  const auto fit = logistic_mle_fit(d);
  REQUIRE(fit.beta.size() == 2);
  CHECK(fit.beta[0] == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-8));
  CHECK(fit.beta[1] == doctest::Approx(std::log(9.0)).epsilon(1e-8));
  // Var(alpha) = 1/(40 * 1/4 * 3/4) for the x = 0 cell.
  CHECK(fit.std_errors[0] == doctest::Approx(std::sqrt(1.0 / 7.5)).epsilon(1e-6));
  CHECK(fit.std_errors[1] == doctest::Approx(std::sqrt(2.0 / 7.5)).epsilon(1e-6));
}
