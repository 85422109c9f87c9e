// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

// Adaptive random-walk Metropolis over an arbitrary log density, run as
// several independent chains, plus posterior summaries and split-chain
// potential scale reduction.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace arisk {

using LogTarget = std::function<double(std::span<const double>)>;

struct McmcConfig {
  int chains = 3;
  int iterations = 20000;  // including burn-in
  int burn_in = 5000;
  int thin = 1;
  double initial_step = 0.1;
  std::uint64_t seed = 0;
  int adapt_window = 50;
  double target_acceptance = 0.234;

  /// Starting point shared by all chains; empty means the origin.
  std::vector<double> initial;
  /// Optional lower-triangular factor L (dim x dim, row-major). Proposals are
  /// theta + step * L z with z ~ N(0, I); empty means L = I.
  std::vector<double> proposal_factor;
  /// Run chains on separate threads. Results do not depend on this flag.
  bool parallel = true;

  void validate() const;
  std::size_t kept() const {
    return static_cast<std::size_t>((iterations - burn_in) / thin);
  }
};

struct ChainSet {
  std::size_t chains = 0;
  std::size_t kept = 0;
  std::size_t dim = 0;
  std::vector<double> draws;  // [chain][iteration][dim]
  std::vector<double> log_target;  // [chain][iteration]
  std::vector<double> acceptance_rate;  // per chain, post burn-in
  std::vector<double> step_size;  // per chain, frozen after burn-in
  std::vector<std::string> param_names;
  int burn_in = 0;
  int thin = 1;

  double at(std::size_t c, std::size_t i, std::size_t p) const {
    return draws[(c * kept + i) * dim + p];
  }
  std::span<const double> draw(std::size_t c, std::size_t i) const {
    return {draws.data() + (c * kept + i) * dim, dim};
  }
  std::size_t total_draws() const { return chains * kept; }
  /// Posterior mean over all kept draws of all chains.
  std::vector<double> mean() const;
};

/// Throws Error(kNonFiniteTarget) if the target is not finite at the start
/// and Error(kZeroAcceptance) if a chain accepts < 1% after burn-in.
ChainSet run_chains(const LogTarget& log_target, std::size_t dim,
                    const McmcConfig& config);

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
  double q975 = 0.0;
  bool sig_05 = false;  // 95% interval excludes 0
  bool sig_10 = false;  // 90% interval excludes 0
};

struct PosteriorSummary {
  std::vector<ParameterSummary> params;

  const ParameterSummary* find(std::string_view name) const;
};

inline constexpr std::size_t kMinDrawsPerChain = 100;

/// Quantile of sorted data by linear interpolation between order statistics:
/// h = (n - 1) p, q = x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
double quantile_sorted(std::span<const double> sorted, double p);

/// Pools all chains. Throws Error(kTooFewDraws) below 100 kept draws/chain.
PosteriorSummary summarize(const ChainSet& chains);

struct RhatReport {
  std::vector<double> rhat;
  bool warn = false;  // any R-hat > 1.1
};

/// Split-chain R-hat. Zero within- and between-chain variance gives 1.0.
/// Throws Error(kSingleChain) for fewer than two chains.
RhatReport gelman_rubin(const ChainSet& chains);

}  // namespace arisk
