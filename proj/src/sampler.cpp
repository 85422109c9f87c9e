// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "arterial_risk/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "arterial_risk/error.hpp"
#include "arterial_risk/random.hpp"

namespace arisk {

void McmcConfig::validate() const {
  if (chains < 2) fail(ErrorKind::kInvalidConfig, "chains must be >= 2");
  if (iterations <= 0 || burn_in < 0 || burn_in >= iterations) {
    fail(ErrorKind::kInvalidConfig, "require 0 <= burn_in < iterations");
  }
  if (thin < 1) fail(ErrorKind::kInvalidConfig, "thin must be >= 1");
  if (!(initial_step > 0)) {
    fail(ErrorKind::kInvalidConfig, "initial_step must be > 0");
  }
  if (adapt_window < 1) {
    fail(ErrorKind::kInvalidConfig, "adapt_window must be >= 1");
  }
  if (kept() == 0) fail(ErrorKind::kInvalidConfig, "no draws would be kept");
}

std::vector<double> ChainSet::mean() const {
  std::vector<double> m(dim, 0.0);
  for (std::size_t c = 0; c < chains; ++c) {
    for (std::size_t i = 0; i < kept; ++i) {
      const auto d = draw(c, i);
      for (std::size_t p = 0; p < dim; ++p) m[p] += d[p];
    }
  }
  const double n = static_cast<double>(total_draws());
  for (auto& v : m) v /= n;
  return m;
}

namespace {

struct ChainOutput {
  double acceptance = 0.0;
  double step = 0.0;
};

ChainOutput run_one_chain(const LogTarget& target, std::size_t dim,
                          const McmcConfig& cfg, std::size_t chain,
                          double* draws, double* trace) {
  Rng rng(cfg.seed + chain);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  std::vector<double> theta = cfg.initial;
  if (theta.empty()) theta.assign(dim, 0.0);
  double lp = target(theta);
  if (!std::isfinite(lp)) {
    fail(ErrorKind::kNonFiniteTarget,
         "NonFiniteTarget: log target is not finite at the initial point");
  }

  const bool has_factor = !cfg.proposal_factor.empty();
  std::vector<double> z(dim), proposal(dim);
  double log_step = std::log(cfg.initial_step);
  int window_accepts = 0;
  int window_count = 0;
  int batches = 0;
  long kept_accepts = 0;
  std::size_t kept_index = 0;

  for (int t = 0; t < cfg.iterations; ++t) {
    const double step = std::exp(log_step);
    for (auto& v : z) v = normal(rng);
    for (std::size_t a = 0; a < dim; ++a) {
      double delta = 0.0;
      if (has_factor) {
        const double* row = cfg.proposal_factor.data() + a * dim;
        for (std::size_t b = 0; b <= a; ++b) delta += row[b] * z[b];
      } else {
        delta = z[a];
      }
      proposal[a] = theta[a] + step * delta;
    }
    const double lp_new = target(proposal);
    const double log_u = std::log(uniform(rng));
    const bool accept = std::isfinite(lp_new) && log_u < lp_new - lp;
    if (accept) {
      theta.swap(proposal);
      lp = lp_new;
    }

    if (t < cfg.burn_in) {
      window_accepts += accept;
      if (++window_count == cfg.adapt_window) {
        ++batches;
        const double rate = static_cast<double>(window_accepts) / window_count;
        log_step += (rate - cfg.target_acceptance) / std::pow(batches, 0.6);
        window_accepts = 0;
        window_count = 0;
      }
      continue;
    }
    kept_accepts += accept;
    if ((t - cfg.burn_in + 1) % cfg.thin == 0) {
      std::copy(theta.begin(), theta.end(), draws + kept_index * dim);
      trace[kept_index] = lp;
      ++kept_index;
    }
  }

  ChainOutput out;
  out.acceptance = static_cast<double>(kept_accepts) /
                   static_cast<double>(cfg.iterations - cfg.burn_in);
  out.step = std::exp(log_step);
  return out;
}

}  // namespace

ChainSet run_chains(const LogTarget& log_target, std::size_t dim,
                    const McmcConfig& config) {
  config.validate();
  if (dim == 0) fail(ErrorKind::kInvalidArgument, "dimension must be >= 1");
  if (!config.initial.empty() && config.initial.size() != dim) {
    fail(ErrorKind::kDimensionMismatch, "initial point has wrong dimension");
  }
  if (!config.proposal_factor.empty() &&
      config.proposal_factor.size() != dim * dim) {
    fail(ErrorKind::kDimensionMismatch, "proposal factor has wrong size");
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
      const ChainOutput out =
          run_one_chain(log_target, dim, config, c,
                        cs.draws.data() + c * cs.kept * dim,
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

const ParameterSummary* PosteriorSummary::find(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) fail(ErrorKind::kTooFewDraws, "quantile of no draws");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

PosteriorSummary summarize(const ChainSet& chains) {
  if (chains.kept < kMinDrawsPerChain || chains.chains == 0) {
    fail(ErrorKind::kTooFewDraws,
         "TooFewDraws: " + std::to_string(chains.kept) +
             " kept draws per chain, need " +
             std::to_string(kMinDrawsPerChain));
  }
  PosteriorSummary out;
  const std::size_t n = chains.total_draws();
  std::vector<double> values(n);
  for (std::size_t p = 0; p < chains.dim; ++p) {
    for (std::size_t c = 0, r = 0; c < chains.chains; ++c) {
      for (std::size_t i = 0; i < chains.kept; ++i) {
        values[r++] = chains.at(c, i, p);
      }
    }
    ParameterSummary s;
    s.name = p < chains.param_names.size() ? chains.param_names[p]
                                           : "theta[" + std::to_string(p) + "]";
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    std::sort(values.begin(), values.end());
    s.q025 = quantile_sorted(values, 0.025);
    s.q05 = quantile_sorted(values, 0.05);
    s.q95 = quantile_sorted(values, 0.95);
    s.q975 = quantile_sorted(values, 0.975);
    s.sig_05 = s.q025 > 0.0 || s.q975 < 0.0;
    s.sig_10 = s.q05 > 0.0 || s.q95 < 0.0;
    out.params.push_back(std::move(s));
  }
  return out;
}

RhatReport gelman_rubin(const ChainSet& chains) {
  if (chains.chains < 2) {
    fail(ErrorKind::kSingleChain, "SingleChain: R-hat needs >= 2 chains");
  }
  const std::size_t half = chains.kept / 2;
  if (half < 2) fail(ErrorKind::kTooFewDraws, "too few draws for split R-hat");
  const std::size_t sequences = chains.chains * 2;
  const double len = static_cast<double>(half);

  RhatReport report;
  for (std::size_t p = 0; p < chains.dim; ++p) {
    std::vector<double> means, vars;
    for (std::size_t c = 0; c < chains.chains; ++c) {
      for (std::size_t part = 0; part < 2; ++part) {
        // Second half is aligned to the end so odd lengths drop the middle.
        const std::size_t start = part == 0 ? 0 : chains.kept - half;
        double sum = 0.0;
        for (std::size_t i = 0; i < half; ++i) sum += chains.at(c, start + i, p);
        const double mean = sum / len;
        double ss = 0.0;
        for (std::size_t i = 0; i < half; ++i) {
          const double d = chains.at(c, start + i, p) - mean;
          ss += d * d;
        }
        means.push_back(mean);
        vars.push_back(ss / (len - 1.0));
      }
    }
    double w = 0.0, grand = 0.0;
    for (std::size_t s = 0; s < sequences; ++s) {
      w += vars[s];
      grand += means[s];
    }
    w /= static_cast<double>(sequences);
    grand /= static_cast<double>(sequences);
    double b = 0.0;
    for (double m : means) b += (m - grand) * (m - grand);
    b *= len / static_cast<double>(sequences - 1);

    double rhat = 1.0;
    if (w > 0.0) {
      const double var_plus = (len - 1.0) / len * w + b / len;
      rhat = std::sqrt(var_plus / w);
    } else if (b > 0.0) {
      rhat = std::numeric_limits<double>::infinity();
    }
    report.rhat.push_back(rhat);
    if (rhat > 1.1) report.warn = true;
  }
  return report;
}

}  // namespace arisk
