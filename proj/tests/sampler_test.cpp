// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "arterial_risk/error.hpp"
#include "arterial_risk/sampler.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace arisk;
using testing::kind_of;

namespace {

ChainSet manual_chains(const std::vector<std::vector<double>>& per_chain) {
  ChainSet cs;
  cs.chains = per_chain.size();
  cs.kept = per_chain[0].size();
  cs.dim = 1;
  for (const auto& c : per_chain) cs.draws.insert(cs.draws.end(), c.begin(), c.end());
  cs.param_names = {"b"};
  return cs;
}

// Correlated bivariate normal: mean (1, -2), sd (0.5, 2), correlation 0.6.
double bivariate(std::span<const double> t) {
  const double z1 = (t[0] - 1.0) / 0.5;
  const double z2 = (t[1] + 2.0) / 2.0;
  const double r = 0.6;
  return -(z1 * z1 - 2 * r * z1 * z2 + z2 * z2) / (2 * (1 - r * r));
}

}  // namespace

TEST_CASE("quantiles interpolate between order statistics") {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(quantile_sorted(v, 0.025) == doctest::Approx(3.475));
  CHECK(quantile_sorted(v, 0.975) == doctest::Approx(97.525));
  CHECK(quantile_sorted(v, 0.5) == doctest::Approx(50.5));
  CHECK(quantile_sorted(v, 0.0) == 1.0);
  CHECK(quantile_sorted(v, 1.0) == 100.0);
  CHECK(quantile_sorted(std::vector<double>{7.0}, 0.3) == 7.0);
  CHECK(kind_of([] { quantile_sorted(std::vector<double>{}, 0.5); }) == ErrorKind::kTooFewDraws);
}

TEST_CASE("config validation") {
  McmcConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.kept() == 15000);
  c.thin = 4;
  CHECK(c.kept() == 3750);
  auto invalid = [](McmcConfig cfg) {
    return kind_of([&] { cfg.validate(); }) == ErrorKind::kInvalidConfig;
  };
  McmcConfig one;
  one.chains = 1;
  CHECK(invalid(one));
  McmcConfig burn;
  burn.burn_in = burn.iterations;
  CHECK(invalid(burn));
  McmcConfig thin;
  thin.thin = 0;
  CHECK(invalid(thin));
  McmcConfig step;
  step.initial_step = 0.0;
  CHECK(invalid(step));
}

TEST_CASE("random-walk chains sample a correlated normal") {
  McmcConfig cfg;
  cfg.chains = 3;
  cfg.iterations = 30000;
  cfg.burn_in = 5000;
  cfg.initial_step = 0.5;
  cfg.seed = 11;
  const ChainSet cs = run_chains(bivariate, 2, cfg);
  CHECK(cs.chains == 3);
  CHECK(cs.kept == 25000);
  CHECK(cs.draws.size() == 3 * 25000 * 2);
  CHECK(cs.log_target.size() == 3 * 25000);
  for (double a : cs.acceptance_rate) {
    CHECK(a > 0.1);
    CHECK(a < 0.5);
  }
  const auto s = summarize(cs);
  REQUIRE(s.params.size() == 2);
  CHECK(s.params[0].mean == doctest::Approx(1.0).epsilon(0.05));
  CHECK(s.params[1].mean == doctest::Approx(-2.0).epsilon(0.1));
  CHECK(s.params[0].sd == doctest::Approx(0.5).epsilon(0.1));
  CHECK(s.params[1].sd == doctest::Approx(2.0).epsilon(0.1));
  // Normal quantiles: mean +- 1.96 sd.
  CHECK(s.params[0].q025 == doctest::Approx(1.0 - 1.96 * 0.5).epsilon(0.1));
  CHECK(s.params[1].q975 == doctest::Approx(-2.0 + 1.96 * 2.0).epsilon(0.15));
  CHECK(s.params[0].sig_05);
  CHECK_FALSE(s.params[1].sig_05);
  CHECK(s.params[0].name == "theta[0]");

  const auto r = gelman_rubin(cs);
  CHECK_FALSE(r.warn);
  for (double v : r.rhat) CHECK(v < 1.02);
}

TEST_CASE("chains are reproducible and independent of threading") {
  McmcConfig cfg;
  cfg.chains = 2;
  cfg.iterations = 2000;
  cfg.burn_in = 500;
  cfg.seed = 5;
  const ChainSet a = run_chains(bivariate, 2, cfg);
  cfg.parallel = false;
  const ChainSet b = run_chains(bivariate, 2, cfg);
  CHECK(a.draws == b.draws);
  CHECK(a.log_target == b.log_target);
  cfg.seed = 6;
  CHECK(run_chains(bivariate, 2, cfg).draws != a.draws);
  // The two chains are distinct streams.
  CHECK(a.at(0, 100, 0) != a.at(1, 100, 0));
}

TEST_CASE("preconditioning and starting point are honored") {
  McmcConfig cfg;
  cfg.chains = 2;
  cfg.iterations = 5000;
  cfg.burn_in = 1000;
  cfg.seed = 3;
  cfg.initial = {1.0, -2.0};
  // Cholesky factor of the target covariance.
  const double r = 0.6;
  cfg.proposal_factor = {0.5, 0.0, 2.0 * r, 2.0 * std::sqrt(1 - r * r)};
  cfg.initial_step = 2.38 / std::sqrt(2.0);
  const ChainSet cs = run_chains(bivariate, 2, cfg);
  for (double a : cs.acceptance_rate) CHECK(a > 0.15);
  const auto s = summarize(cs);
  CHECK(s.params[0].mean == doctest::Approx(1.0).epsilon(0.1));

  McmcConfig bad = cfg;
  bad.initial = {1.0};
  CHECK(kind_of([&] { run_chains(bivariate, 2, bad); }) == ErrorKind::kDimensionMismatch);
  bad = cfg;
  bad.proposal_factor = {1.0};
  CHECK(kind_of([&] { run_chains(bivariate, 2, bad); }) == ErrorKind::kDimensionMismatch);
}

TEST_CASE("sampler failures") {
  McmcConfig cfg;
  cfg.chains = 2;
  cfg.iterations = 1000;
  cfg.burn_in = 200;
  const LogTarget nowhere = [](std::span<const double>) {
    return -std::numeric_limits<double>::infinity();
  };
  CHECK(kind_of([&] { run_chains(nowhere, 1, cfg); }) == ErrorKind::kNonFiniteTarget);
  const LogTarget nan = [](std::span<const double>) { return std::nan(""); };
  CHECK(kind_of([&] { run_chains(nan, 1, cfg); }) == ErrorKind::kNonFiniteTarget);

  // Finite only at the origin: every proposal is rejected.
  const LogTarget point = [](std::span<const double> t) {
    return t[0] == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  };
  CHECK(kind_of([&] { run_chains(point, 1, cfg); }) == ErrorKind::kZeroAcceptance);
  CHECK(kind_of([&] { run_chains(bivariate, 0, cfg); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("summaries need enough draws") {
  std::vector<double> few(99, 1.0);
  CHECK(kind_of([&] { summarize(manual_chains({few, few})); }) == ErrorKind::kTooFewDraws);
  std::vector<double> enough(100, 1.0);
  CHECK_NOTHROW(summarize(manual_chains({enough, enough})));
}

TEST_CASE("significance marks follow the interval bounds") {
  // 0..199 shifted: q025 = 4.975 + shift, q05 = 9.95 + shift.
  auto shifted = [](double shift) {
    std::vector<double> a, b;
    for (int i = 0; i < 200; ++i) (i % 2 ? a : b).push_back(i + shift);
    return manual_chains({a, b});
  };
  auto s = summarize(shifted(-7.0)).params[0];
  CHECK(s.q025 == doctest::Approx(-2.025));
  CHECK(s.q05 == doctest::Approx(2.95));
  CHECK_FALSE(s.sig_05);
  CHECK(s.sig_10);
  s = summarize(shifted(-2.0)).params[0];
  CHECK(s.sig_05);
  s = summarize(shifted(-100.0)).params[0];
  CHECK_FALSE(s.sig_10);
  CHECK(s.mean == doctest::Approx(-0.5));
}

TEST_CASE("split R-hat") {
  // Halves [1,2] [3,4] [5,6] [7,8]: W = 0.5, B = 2 * var(1.5, 3.5, 5.5, 7.5).
  const auto r = gelman_rubin(manual_chains({{1, 2, 3, 4}, {5, 6, 7, 8}}));
  const double w = 0.5, b = 2.0 * 20.0 / 3.0;
  CHECK(r.rhat[0] == doctest::Approx(std::sqrt((0.5 * w + b / 2.0) / w)));
  CHECK(r.rhat[0] == doctest::Approx(3.7193).epsilon(1e-4));
  CHECK(r.warn);

  CHECK(gelman_rubin(manual_chains({{2, 2, 2, 2}, {2, 2, 2, 2}})).rhat[0] == 1.0);
  CHECK(std::isinf(gelman_rubin(manual_chains({{1, 1, 1, 1}, {2, 2, 2, 2}})).rhat[0]));
  CHECK(kind_of([] { gelman_rubin(manual_chains({{1, 2, 3, 4}})); }) ==
        ErrorKind::kSingleChain);

  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  std::vector<double> c1(2000), c2(2000);
  for (auto& v : c1) v = normal(rng);
  for (auto& v : c2) v = normal(rng);
  const auto iid = gelman_rubin(manual_chains({c1, c2}));
  CHECK(iid.rhat[0] < 1.01);
  CHECK_FALSE(iid.warn);
  for (auto& v : c2) v += 1.0;
  CHECK(gelman_rubin(manual_chains({c1, c2})).warn);
}
