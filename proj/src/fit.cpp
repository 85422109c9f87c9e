// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "arterial_risk/fit.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "arterial_risk/error.hpp"
#include "arterial_risk/ranef_sampler.hpp"
#include "arterial_risk/text_io.hpp"

namespace arisk {
namespace {

using Mat = Eigen::MatrixXd;

// Lower Cholesky factor of a covariance; falls back to its diagonal.
Mat proposal_factor_from(const std::vector<double>& cov, std::size_t n) {
  const auto dim = static_cast<Eigen::Index>(n);
  Mat c = Eigen::Map<const Mat>(cov.data(), dim, dim);
  if (c.allFinite()) {
    Eigen::LLT<Mat> llt(c);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  Mat l = Mat::Identity(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double v = c(i, i);
    if (std::isfinite(v) && v > 0) l(i, i) = std::sqrt(v);
  }
  return l;
}

std::vector<double> row_major(const Mat& m) {
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
    }
  }
  return out;
}

}  // namespace

std::vector<double> FitResult::fixed_effect_means() const {
  const std::size_t n = kind == ModelKind::kConditional
                            ? feature_names.size()
                            : feature_names.size() + 1;
  std::vector<double> out;
  for (std::size_t i = 0; i < n && i < summary.params.size(); ++i) {
    out.push_back(summary.params[i].mean);
  }
  return out;
}

FitResult fit_design(const Design& d, const FitConfig& config) {
  config.prior.validate();
  config.mcmc.validate();

  FitResult fit;
  fit.kind = config.kind;
  fit.grouping = config.grouping;
  fit.feature_names = d.feature_names;
  fit.n_strata = d.n_strata;
  fit.m = d.members - 1;
  fit.prior = config.prior;

  const std::size_t dim = parameter_count(config.kind, d);
  McmcConfig mcmc = config.mcmc;
  LogTarget target;
  const PriorSpec prior = config.prior;

  switch (config.kind) {
    case ModelKind::kConditional: {
      try {
        fit.mle = mle_fit(d);
        if (mcmc.initial.empty()) mcmc.initial = fit.mle->beta;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kSeparation &&
            e.kind() != ErrorKind::kNoConvergence) {
          throw;
        }
        fit.warnings.push_back(std::string("no conditional MLE (") + e.what() +
                               "); chains start at the origin");
      }
      if (mcmc.proposal_factor.empty()) {
        // Curvature of the posterior at its mode sets the proposal shape.
        try {
          MleOptions map;
          map.prior = prior;
          const MleResult mode = mle_fit(d, map);
          mcmc.proposal_factor =
              row_major(proposal_factor_from(mode.covariance, dim));
        } catch (const Error&) {
        }
      }
      target = [&d, prior](std::span<const double> theta) {
        return log_posterior(ModelKind::kConditional, theta, d, prior);
      };
      break;
    }
    case ModelKind::kLogistic: {
      try {
        MleOptions map;
        map.prior = prior;
        fit.mle = logistic_mle_fit(d, map);
        if (mcmc.initial.empty()) mcmc.initial = fit.mle->beta;
        if (mcmc.proposal_factor.empty()) {
          mcmc.proposal_factor =
              row_major(proposal_factor_from(fit.mle->covariance, dim));
        }
      } catch (const Error& e) {
        fit.warnings.push_back(std::string("no logistic mode (") + e.what() +
                               ")");
      }
      target = [&d, prior](std::span<const double> theta) {
        return log_posterior(ModelKind::kLogistic, theta, d, prior);
      };
      break;
    }
    case ModelKind::kRanef: {
      const std::size_t fixed = d.k + 1;
      const double tau0 = 10.0;
      RanefSamplerSetup setup;
      setup.initial.assign(dim, 0.0);
      setup.initial.back() = tau0;
      try {
        MleOptions map;
        map.prior = prior;
        fit.mle = logistic_mle_fit(d, map);
        std::copy(fit.mle->beta.begin(), fit.mle->beta.end(),
                  setup.initial.begin());
        setup.fixed_factor =
            row_major(proposal_factor_from(fit.mle->covariance, fixed));
      } catch (const Error& e) {
        fit.warnings.push_back(std::string("no logistic mode (") + e.what() +
                               ")");
      }
      const double p_bar = 1.0 / static_cast<double>(d.members);
      std::vector<double> group_rows(d.n_groups, 0.0);
      for (std::size_t i = 0; i < d.n_strata; ++i) {
        group_rows[d.group[i]] += static_cast<double>(d.members);
      }
      for (double n : group_rows) {
        setup.u_scale.push_back(1.0 / std::sqrt(n * p_bar * (1.0 - p_bar) + tau0));
      }
      if (!mcmc.initial.empty()) setup.initial = mcmc.initial;
      if (!mcmc.proposal_factor.empty()) setup.fixed_factor = mcmc.proposal_factor;
      fit.chains = run_ranef_chains(d, prior, mcmc, setup);
      break;
    }
  }

  if (config.kind != ModelKind::kRanef) fit.chains = run_chains(target, dim, mcmc);
  fit.chains.param_names = parameter_names(config.kind, d);

  fit.summary = summarize(fit.chains);
  fit.rhat = gelman_rubin(fit.chains);
  if (fit.rhat.warn) {
    for (std::size_t p = 0; p < fit.rhat.rhat.size(); ++p) {
      if (fit.rhat.rhat[p] > 1.1) {
        fit.warnings.push_back("R-hat " + format_fixed(fit.rhat.rhat[p], 3) +
                               " > 1.1 for " + fit.chains.param_names[p]);
      }
    }
  }
  fit.dic = dic(fit.chains, config.kind, d);
  if (fit.dic.negative_p_d) {
    fit.warnings.push_back("negative effective parameter count p_D = " +
                           format_fixed(fit.dic.p_d, 3));
  }
  const std::vector<double> mean = fit.chains.mean();
  fit.scores = normalize_scores(predict_model_odds(config.kind, mean, d));
  fit.auc = roc_auc(fit.scores);
  return fit;
}

FitResult fit_model(const MatchedDataset& ds, const FitConfig& config) {
  const Design d = make_design(ds, config.grouping);
  FitResult fit = fit_design(d, config);
  fit.dataset_hash = dataset_hash(ds);
  return fit;
}

namespace {

constexpr const char* kReservedKeys[] = {
    "format",          "model_kind",     "grouping",
    "dataset_hash",    "prior.beta_mean", "prior.beta_variance",
    "prior.alpha_mean", "prior.alpha_variance", "prior.tau_shape",
    "prior.tau_rate",  "n_strata",       "m"};

bool reserved(const std::string& key) {
  for (const char* r : kReservedKeys) {
    if (key == r) return true;
  }
  return false;
}

}  // namespace

std::string render_coefficients(const FitResult& fit) {
  KeyValues kv = {
      {"format", "arterial-risk-coefficients/1"},
      {"model_kind", to_string(fit.kind)},
      {"grouping", to_string(fit.grouping)},
      {"dataset_hash", fit.dataset_hash},
      {"n_strata", std::to_string(fit.n_strata)},
      {"m", std::to_string(fit.m)},
      {"prior.beta_mean", format_double(fit.prior.beta_mean)},
      {"prior.beta_variance", format_double(fit.prior.beta_variance)},
      {"prior.alpha_mean", format_double(fit.prior.alpha_mean)},
      {"prior.alpha_variance", format_double(fit.prior.alpha_variance)},
      {"prior.tau_shape", format_double(fit.prior.tau_shape)},
      {"prior.tau_rate", format_double(fit.prior.tau_rate)},
  };
  const auto means = fit.fixed_effect_means();
  for (std::size_t i = 0; i < means.size(); ++i) {
    kv.emplace_back(fit.summary.params[i].name, format_double(means[i]));
  }
  return render_key_values(kv);
}

void write_coefficients(const FitResult& fit, const std::filesystem::path& p) {
  write_file(p, render_coefficients(fit));
}

CoefficientFile read_coefficients(const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) {
    fail(ErrorKind::kIo, "missing coefficient file: " + p.string());
  }
  const KeyValues kv = parse_key_values(read_file(p), "coefficients");
  CoefficientFile c;
  const auto kind = lookup(kv, "model_kind");
  if (!kind) fail_missing_column("coefficients", "model_kind");
  const auto parsed = parse_model_kind(*kind);
  if (!parsed) fail_bad_row("coefficients", 0, "model_kind");
  c.kind = *parsed;
  c.dataset_hash = lookup(kv, "dataset_hash").value_or("");
  auto num = [&](const char* key, double fallback) {
    auto v = lookup(kv, key);
    if (!v) return fallback;
    auto d = parse_double(*v);
    if (!d) fail_bad_row("coefficients", 0, key);
    return *d;
  };
  c.prior.beta_mean = num("prior.beta_mean", c.prior.beta_mean);
  c.prior.beta_variance = num("prior.beta_variance", c.prior.beta_variance);
  c.prior.alpha_mean = num("prior.alpha_mean", c.prior.alpha_mean);
  c.prior.alpha_variance = num("prior.alpha_variance", c.prior.alpha_variance);
  c.prior.tau_shape = num("prior.tau_shape", c.prior.tau_shape);
  c.prior.tau_rate = num("prior.tau_rate", c.prior.tau_rate);
  for (const auto& [key, value] : kv) {
    if (reserved(key)) continue;
    auto d = parse_double(value);
    if (!d) fail_bad_row("coefficients", 0, key);
    c.coefficients.emplace_back(key, *d);
  }
  return c;
}

ScoreSet score_dataset(const CoefficientFile& coef, const MatchedDataset& ds) {
  const Design d = make_design(ds);
  auto value_of = [&](const std::string& name) {
    for (const auto& [k, v] : coef.coefficients) {
      if (k == name) return v;
    }
    fail(ErrorKind::kDimensionMismatch,
         "DimensionMismatch: coefficient file has no entry for " + name);
  };
  std::vector<double> beta;
  for (const auto& f : d.feature_names) beta.push_back(value_of(f));
  const std::size_t expected =
      d.k + (coef.kind == ModelKind::kConditional ? 0 : 1);
  if (coef.coefficients.size() != expected) {
    fail(ErrorKind::kDimensionMismatch,
         "DimensionMismatch: coefficient file has " +
             std::to_string(coef.coefficients.size()) +
             " coefficients, dataset needs " + std::to_string(expected));
  }
  if (coef.kind == ModelKind::kConditional) {
    return normalize_scores(predict_relative_odds(beta, d));
  }
  std::vector<double> theta = {value_of("intercept")};
  theta.insert(theta.end(), beta.begin(), beta.end());
  return normalize_scores(predict_model_odds(ModelKind::kLogistic, theta, d));
}

std::string render_draws(const ChainSet& chains) {
  std::vector<std::string> header = {"chain", "iteration"};
  header.insert(header.end(), chains.param_names.begin(),
                chains.param_names.end());
  std::string out = csv_join(header) + "\n";
  for (std::size_t c = 0; c < chains.chains; ++c) {
    for (std::size_t i = 0; i < chains.kept; ++i) {
      out += std::to_string(c);
      out += ',';
      out += std::to_string(chains.burn_in + (i + 1) * chains.thin);
      for (double v : chains.draw(c, i)) {
        out += ',';
        out += format_double(v);
      }
      out += '\n';
    }
  }
  return out;
}

}  // namespace arisk
