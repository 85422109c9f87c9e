// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "arterial_risk/ranef_sampler.hpp"

#include <cmath>
#include <exception>
#include <thread>

#include "arterial_risk/error.hpp"
#include "arterial_risk/random.hpp"

namespace arisk {
namespace {

double log1pexp(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double bernoulli_logit(int y, double eta) {
  return (y ? eta : 0.0) - log1pexp(eta);
}

struct Adapter {
  double log_step = 0.0;
  double target = 0.234;
  int window = 50;
  long accepts = 0;
  long tries = 0;
  int batches = 0;

  void record(bool accepted) {
    accepts += accepted;
    ++tries;
  }
  // Called once per sweep during burn-in.
  void maybe_adapt(int sweeps_in_window) {
    if (sweeps_in_window % window != 0 || tries == 0) return;
    ++batches;
    const double rate = static_cast<double>(accepts) / static_cast<double>(tries);
    log_step += (rate - target) / std::pow(batches, 0.6);
    accepts = 0;
    tries = 0;
  }
};

struct ChainOutput {
  double acceptance = 0.0;
  double step = 0.0;
};

class RanefChain {
 public:
  RanefChain(const Design& d, const PriorSpec& prior, const McmcConfig& cfg,
             const RanefSamplerSetup& setup)
      : d_(d), prior_(prior), cfg_(cfg), setup_(setup) {
    fixed_ = d.k + 1;
    groups_.assign(d.n_groups, {});
    for (std::size_t i = 0; i < d.n_strata; ++i) groups_[d.group[i]].push_back(i);
  }

  ChainOutput run(std::size_t chain, double* draws, double* trace) {
    const std::size_t dim = fixed_ + d_.n_groups + 1;
    Rng rng(cfg_.seed + chain);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    std::vector<double> theta = setup_.initial;
    if (theta.empty()) {
      theta.assign(dim, 0.0);
      theta.back() = 1.0;
    }
    std::vector<double> fixed(theta.begin(), theta.begin() + fixed_);
    std::vector<double> u(theta.begin() + fixed_, theta.end() - 1);
    double tau = theta.back();

    std::vector<double> eta(d_.n_rows());
    compute_eta(fixed, eta);
    double fixed_lp = fixed_block_log_target(fixed, eta, u);
    if (!std::isfinite(fixed_lp) || !(tau > 0)) {
      fail(ErrorKind::kNonFiniteTarget,
           "NonFiniteTarget: log target is not finite at the initial point");
    }

    Adapter fixed_adapt{std::log(cfg_.initial_step), cfg_.target_acceptance,
                        cfg_.adapt_window};
    Adapter u_adapt{std::log(cfg_.initial_step), setup_.u_target_acceptance,
                    cfg_.adapt_window};
    std::vector<double> z(fixed_), proposal(fixed_), eta_new(d_.n_rows());
    long kept_accepts = 0;
    std::size_t kept_index = 0;
    const bool has_factor = !setup_.fixed_factor.empty();

    for (int t = 0; t < cfg_.iterations; ++t) {
      // (alpha, beta) block.
      const double step = std::exp(fixed_adapt.log_step);
      for (auto& v : z) v = normal(rng);
      for (std::size_t a = 0; a < fixed_; ++a) {
        double delta = 0.0;
        if (has_factor) {
          const double* row = setup_.fixed_factor.data() + a * fixed_;
          for (std::size_t b = 0; b <= a; ++b) delta += row[b] * z[b];
        } else {
          delta = z[a];
        }
        proposal[a] = fixed[a] + step * delta;
      }
      compute_eta(proposal, eta_new);
      const double lp_new = fixed_block_log_target(proposal, eta_new, u);
      const bool accept =
          std::isfinite(lp_new) && std::log(uniform(rng)) < lp_new - fixed_lp;
      if (accept) {
        fixed.swap(proposal);
        eta.swap(eta_new);
        fixed_lp = lp_new;
      }

      // Random effects, one group at a time.
      const double u_step = std::exp(u_adapt.log_step);
      for (std::size_t g = 0; g < d_.n_groups; ++g) {
        const double scale = setup_.u_scale.empty() ? 1.0 : setup_.u_scale[g];
        const double cur = u[g];
        const double next = cur + u_step * scale * normal(rng);
        double delta = -0.5 * tau * (next * next - cur * cur);
        for (std::size_t i : groups_[g]) {
          for (std::size_t j = 0; j < d_.members; ++j) {
            const std::size_t r = i * d_.members + j;
            const int y = j == 0 ? 1 : 0;
            delta += bernoulli_logit(y, eta[r] + next) -
                     bernoulli_logit(y, eta[r] + cur);
          }
        }
        const bool ok = std::isfinite(delta) && std::log(uniform(rng)) < delta;
        if (ok) u[g] = next;
        if (t < cfg_.burn_in) u_adapt.record(ok);
      }
      fixed_lp = fixed_block_log_target(fixed, eta, u);

      // Precision, conjugate.
      double ss = 0.0;
      for (double v : u) ss += v * v;
      const double shape = prior_.tau_shape + 0.5 * static_cast<double>(u.size());
      const double rate = prior_.tau_rate + 0.5 * ss;
      tau = std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
      if (!(tau > 0)) tau = std::numeric_limits<double>::min();

      if (t < cfg_.burn_in) {
        fixed_adapt.record(accept);
        fixed_adapt.maybe_adapt(t + 1);
        u_adapt.maybe_adapt(t + 1);
        continue;
      }
      kept_accepts += accept;
      if ((t - cfg_.burn_in + 1) % cfg_.thin == 0) {
        double* out = draws + kept_index * dim;
        std::copy(fixed.begin(), fixed.end(), out);
        std::copy(u.begin(), u.end(), out + fixed_);
        out[dim - 1] = tau;
        trace[kept_index] = log_posterior(
            ModelKind::kRanef, std::span<const double>(out, dim), d_, prior_);
        ++kept_index;
      }
    }

    ChainOutput o;
    o.acceptance = static_cast<double>(kept_accepts) /
                   static_cast<double>(cfg_.iterations - cfg_.burn_in);
    o.step = std::exp(fixed_adapt.log_step);
    return o;
  }

 private:
  void compute_eta(const std::vector<double>& fixed,
                   std::vector<double>& eta) const {
    for (std::size_t r = 0; r < d_.n_rows(); ++r) {
      const auto x = d_.row(r);
      double e = fixed[0];
      for (std::size_t v = 0; v < d_.k; ++v) e += fixed[v + 1] * x[v];
      eta[r] = e;
    }
  }

  // Log density of (alpha, beta) given u: Bernoulli terms plus Normal priors.
  double fixed_block_log_target(const std::vector<double>& fixed,
                                const std::vector<double>& eta,
                                const std::vector<double>& u) const {
    double total = 0.0;
    for (std::size_t r = 0; r < d_.n_rows(); ++r) {
      total += bernoulli_logit(d_.y(r), eta[r] + u[d_.group[r / d_.members]]);
    }
    auto normal_term = [](double v, double mean, double var) {
      return -0.5 * (v - mean) * (v - mean) / var;
    };
    total += normal_term(fixed[0], prior_.alpha_mean, prior_.alpha_variance);
    for (std::size_t v = 1; v < fixed_; ++v) {
      total += normal_term(fixed[v], prior_.beta_mean, prior_.beta_variance);
    }
    return total;
  }

  const Design& d_;
  const PriorSpec& prior_;
  const McmcConfig& cfg_;
  const RanefSamplerSetup& setup_;
  std::size_t fixed_ = 0;
  std::vector<std::vector<std::size_t>> groups_;
};

}  // namespace

ChainSet run_ranef_chains(const Design& d, const PriorSpec& prior,
                          const McmcConfig& config,
                          const RanefSamplerSetup& setup) {
  config.validate();
  prior.validate();
  const std::size_t fixed = d.k + 1;
  const std::size_t dim = fixed + d.n_groups + 1;
  if (d.n_groups == 0) {
    fail(ErrorKind::kInvalidArgument, "random-effect model needs groups");
  }
  if (!setup.initial.empty() && setup.initial.size() != dim) {
    fail(ErrorKind::kDimensionMismatch, "initial point has wrong dimension");
  }
  if (!setup.fixed_factor.empty() && setup.fixed_factor.size() != fixed * fixed) {
    fail(ErrorKind::kDimensionMismatch, "proposal factor has wrong size");
  }
  if (!setup.u_scale.empty() && setup.u_scale.size() != d.n_groups) {
    fail(ErrorKind::kDimensionMismatch, "u scale has wrong size");
  }

  ChainSet cs;
  cs.chains = static_cast<std::size_t>(config.chains);
  cs.kept = config.kept();
  cs.dim = dim;
  cs.burn_in = config.burn_in;
  cs.thin = config.thin;
  cs.draws.assign(cs.chains * cs.kept * dim, 0.0);
  cs.log_target.assign(cs.chains * cs.kept, 0.0);
  cs.acceptance_rate.assign(cs.chains, 0.0);
  cs.step_size.assign(cs.chains, 0.0);

  std::vector<std::exception_ptr> errors(cs.chains);
  auto work = [&](std::size_t c) {
    try {
      RanefChain chain(d, prior, config, setup);
      const ChainOutput out = chain.run(c, cs.draws.data() + c * cs.kept * dim,
                                        cs.log_target.data() + c * cs.kept);
      cs.acceptance_rate[c] = out.acceptance;
      cs.step_size[c] = out.step;
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  if (config.parallel && cs.chains > 1) {
    std::vector<std::thread> threads;
    for (std::size_t c = 0; c < cs.chains; ++c) threads.emplace_back(work, c);
    for (auto& t : threads) t.join();
  } else {
    for (std::size_t c = 0; c < cs.chains; ++c) work(c);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (std::size_t c = 0; c < cs.chains; ++c) {
    if (cs.acceptance_rate[c] < 0.01) {
      fail(ErrorKind::kZeroAcceptance,
           "ZeroAcceptance: chain " + std::to_string(c) + " accepted " +
               std::to_string(cs.acceptance_rate[c]) + " after burn-in");
    }
  }
  return cs;
}

}  // namespace arisk
