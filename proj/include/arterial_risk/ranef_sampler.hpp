// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

// Metropolis-within-Gibbs for the random-effect logistic model. Each sweep
// makes a joint random-walk move on (alpha, beta), a univariate random-walk
// move on every u_g using only that group's rows, and a conjugate draw
// tau | u ~ Gamma(a + G/2, b + sum u^2 / 2).

#pragma once

#include <vector>

#include "arterial_risk/models.hpp"
#include "arterial_risk/sampler.hpp"

namespace arisk {

struct RanefSamplerSetup {
  /// Starting point [alpha, beta, u, tau]; empty means zeros with tau = 1.
  std::vector<double> initial;
  /// Lower-triangular factor for the (alpha, beta) block, row-major; empty
  /// means identity.
  std::vector<double> fixed_factor;
  /// Per-group proposal scale for u; empty means 1.
  std::vector<double> u_scale;
  double u_target_acceptance = 0.44;
};

/// Draws in the layout [alpha, beta, u, tau]. acceptance_rate and step_size
/// refer to the (alpha, beta) block. Same error contract as run_chains.
ChainSet run_ranef_chains(const Design& d, const PriorSpec& prior,
                          const McmcConfig& config,
                          const RanefSamplerSetup& setup);

}  // namespace arisk
