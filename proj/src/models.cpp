// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "arterial_risk/models.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "arterial_risk/error.hpp"

namespace arisk {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kConditional: return "conditional";
    case ModelKind::kLogistic: return "logistic";
    case ModelKind::kRanef: return "ranef";
  }
  return "conditional";
}

const char* to_string(Grouping g) {
  return g == Grouping::kStratum ? "stratum" : "segment";
}

std::optional<ModelKind> parse_model_kind(std::string_view s) {
  if (s == "conditional") return ModelKind::kConditional;
  if (s == "logistic") return ModelKind::kLogistic;
  if (s == "ranef") return ModelKind::kRanef;
  return std::nullopt;
}

std::optional<Grouping> parse_grouping(std::string_view s) {
  if (s == "stratum") return Grouping::kStratum;
  if (s == "segment") return Grouping::kSegment;
  return std::nullopt;
}

Design make_design(const MatchedDataset& ds, Grouping grouping) {
  ds.validate();
  Design d;
  d.n_strata = ds.n_strata();
  d.members = ds.m + 1;
  d.k = ds.k;
  d.feature_names = ds.feature_names;
  d.x.reserve(d.n_rows() * d.k);
  std::map<std::string, std::size_t> segment_groups;
  for (const auto& s : ds.strata) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      const auto& x = s.member(j).x;
      d.x.insert(d.x.end(), x.begin(), x.end());
    }
    d.stratum_ids.push_back(s.stratum_id);
    if (grouping == Grouping::kStratum) {
      d.group.push_back(d.group_labels.size());
      d.group_labels.push_back(std::to_string(s.stratum_id));
    } else {
      if (s.key.segment_id.empty()) {
        fail(ErrorKind::kUnknownGrouping,
             "segment grouping requires stratum segment ids");
      }
      auto [it, inserted] =
          segment_groups.emplace(s.key.segment_id, d.group_labels.size());
      if (inserted) d.group_labels.push_back(s.key.segment_id);
      d.group.push_back(it->second);
    }
  }
  d.n_groups = d.group_labels.size();
  return d;
}

void PriorSpec::validate() const {
  if (!(beta_variance > 0) || !(alpha_variance > 0) || !(tau_shape > 0) ||
      !(tau_rate > 0)) {
    fail(ErrorKind::kInvalidConfig, "prior variances and tau hyperparameters "
                                    "must be positive");
  }
}

std::size_t parameter_count(ModelKind kind, const Design& d) {
  switch (kind) {
    case ModelKind::kConditional: return d.k;
    case ModelKind::kLogistic: return d.k + 1;
    case ModelKind::kRanef: return d.k + 2 + d.n_groups;
  }
  return d.k;
}

std::vector<std::string> parameter_names(ModelKind kind, const Design& d) {
  std::vector<std::string> names;
  if (kind != ModelKind::kConditional) names.push_back("intercept");
  names.insert(names.end(), d.feature_names.begin(), d.feature_names.end());
  if (kind == ModelKind::kRanef) {
    for (const auto& g : d.group_labels) names.push_back("u[" + g + "]");
    names.push_back("tau");
  }
  return names;
}

namespace {

void check_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    fail(ErrorKind::kDimensionMismatch,
         std::string("DimensionMismatch: ") + what + " has " +
             std::to_string(got) + " entries, expected " +
             std::to_string(want));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// log(1 + exp(z)) without overflow.
double log1pexp(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double normal_logpdf(double x, double mean, double variance) {
  const double r = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) -
         r * r / (2.0 * variance);
}

// Softmax weights of the linear predictor over one stratum. Returns the
// stratum log-likelihood eta_case - logsumexp(eta).
double stratum_weights(std::span<const double> beta, const Design& d,
                       std::size_t i, std::vector<double>& w) {
  w.resize(d.members);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < d.members; ++j) {
    w[j] = dot(beta, d.row(i, j));
    top = std::max(top, w[j]);
  }
  const double eta_case = w[0];
  double z = 0.0;
  for (std::size_t j = 0; j < d.members; ++j) {
    w[j] = std::exp(w[j] - top);
    z += w[j];
  }
  for (auto& v : w) v /= z;
  return eta_case - (top + std::log(z));
}

}  // namespace

double cond_log_likelihood(std::span<const double> beta, const Design& d) {
  check_dim(beta.size(), d.k, "beta");
  std::vector<double> eta(d.members);
  double total = 0.0;
  for (std::size_t i = 0; i < d.n_strata; ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < d.members; ++j) {
      eta[j] = dot(beta, d.row(i, j));
      top = std::max(top, eta[j]);
    }
    double z = 0.0;
    for (double e : eta) z += std::exp(e - top);
    total += eta[0] - (top + std::log(z));
  }
  return total;
}

double cond_log_likelihood(std::span<const double> beta,
                           const MatchedDataset& ds) {
  return cond_log_likelihood(beta, make_design(ds));
}

std::vector<double> cond_gradient(std::span<const double> beta,
                                  const Design& d) {
  check_dim(beta.size(), d.k, "beta");
  std::vector<double> g(d.k, 0.0);
  std::vector<double> w;
  for (std::size_t i = 0; i < d.n_strata; ++i) {
    stratum_weights(beta, d, i, w);
    const auto xc = d.row(i, 0);
    for (std::size_t u = 0; u < d.k; ++u) {
      double mean = 0.0;
      for (std::size_t j = 0; j < d.members; ++j) {
        mean += w[j] * d.row(i, j)[u];
      }
      g[u] += xc[u] - mean;
    }
  }
  return g;
}

std::vector<double> cond_gradient(std::span<const double> beta,
                                  const MatchedDataset& ds) {
  return cond_gradient(beta, make_design(ds));
}

std::vector<double> cond_hessian(std::span<const double> beta,
                                 const Design& d) {
  check_dim(beta.size(), d.k, "beta");
  const std::size_t k = d.k;
  std::vector<double> h(k * k, 0.0);
  std::vector<double> w, mean(k), diff(k);
  for (std::size_t i = 0; i < d.n_strata; ++i) {
    stratum_weights(beta, d, i, w);
    // Center on the case row; the weighted covariance is shift invariant.
    const auto x0 = d.row(i, 0);
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t j = 0; j < d.members; ++j) {
      const auto xj = d.row(i, j);
      for (std::size_t u = 0; u < k; ++u) mean[u] += w[j] * (xj[u] - x0[u]);
    }
    for (std::size_t j = 0; j < d.members; ++j) {
      const auto xj = d.row(i, j);
      for (std::size_t u = 0; u < k; ++u) diff[u] = xj[u] - x0[u] - mean[u];
      for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
          h[a * k + b] -= w[j] * diff[a] * diff[b];
        }
      }
    }
  }
  return h;
}

double logistic_log_likelihood(const LogisticParams& p, const Design& d) {
  check_dim(p.beta.size(), d.k, "beta");
  double total = 0.0;
  for (std::size_t r = 0; r < d.n_rows(); ++r) {
    const double eta = p.alpha + dot(p.beta, d.row(r));
    total += (d.y(r) ? eta : 0.0) - log1pexp(eta);
  }
  return total;
}

double logistic_log_likelihood(const LogisticParams& p,
                               const MatchedDataset& ds) {
  return logistic_log_likelihood(p, make_design(ds));
}

double ranef_latent_log_density(std::span<const double> u, double tau) {
  if (!(tau > 0)) fail(ErrorKind::kNonPositiveTau, "NonPositiveTau");
  const double c = 0.5 * std::log(tau / (2.0 * std::numbers::pi));
  double total = 0.0;
  for (double v : u) total += c - 0.5 * tau * v * v;
  return total;
}

namespace {

double ranef_data_log_likelihood(const RanefLogisticParams& p,
                                 const Design& d) {
  check_dim(p.beta.size(), d.k, "beta");
  check_dim(p.u.size(), d.n_groups, "u");
  double total = 0.0;
  for (std::size_t i = 0; i < d.n_strata; ++i) {
    const double offset = p.alpha + p.u[d.group[i]];
    for (std::size_t j = 0; j < d.members; ++j) {
      const double eta = offset + dot(p.beta, d.row(i, j));
      total += (j == 0 ? eta : 0.0) - log1pexp(eta);
    }
  }
  return total;
}

}  // namespace

double ranef_log_likelihood(const RanefLogisticParams& p, const Design& d) {
  return ranef_data_log_likelihood(p, d) + ranef_latent_log_density(p.u, p.tau);
}

double ranef_log_likelihood(const RanefLogisticParams& p,
                            const MatchedDataset& ds, Grouping grouping) {
  return ranef_log_likelihood(p, make_design(ds, grouping));
}

LogisticParams unpack_logistic(std::span<const double> theta, std::size_t k) {
  check_dim(theta.size(), k + 1, "logistic parameter vector");
  return {theta[0], std::vector<double>(theta.begin() + 1, theta.end())};
}

RanefLogisticParams unpack_ranef(std::span<const double> theta, std::size_t k,
                                 std::size_t n_groups) {
  check_dim(theta.size(), k + n_groups + 2, "random-effect parameter vector");
  RanefLogisticParams p;
  p.alpha = theta[0];
  p.beta.assign(theta.begin() + 1, theta.begin() + 1 + k);
  p.u.assign(theta.begin() + 1 + k, theta.begin() + 1 + k + n_groups);
  p.tau = theta.back();
  return p;
}

double log_likelihood(ModelKind kind, std::span<const double> theta,
                      const Design& d) {
  switch (kind) {
    case ModelKind::kConditional: return cond_log_likelihood(theta, d);
    case ModelKind::kLogistic:
      return logistic_log_likelihood(unpack_logistic(theta, d.k), d);
    case ModelKind::kRanef:
      return ranef_log_likelihood(unpack_ranef(theta, d.k, d.n_groups), d);
  }
  return 0.0;
}

double data_log_likelihood(ModelKind kind, std::span<const double> theta,
                           const Design& d) {
  if (kind == ModelKind::kRanef) {
    return ranef_data_log_likelihood(unpack_ranef(theta, d.k, d.n_groups), d);
  }
  return log_likelihood(kind, theta, d);
}

double log_prior(ModelKind kind, std::span<const double> theta, std::size_t k,
                 const PriorSpec& spec) {
  spec.validate();
  std::size_t pos = 0;
  double total = 0.0;
  if (kind != ModelKind::kConditional) {
    check_dim(theta.size() >= 1 ? 1 : 0, 1, "intercept");
    total += normal_logpdf(theta[pos++], spec.alpha_mean, spec.alpha_variance);
  }
  if (theta.size() < pos + k) check_dim(theta.size(), pos + k, "beta");
  for (std::size_t u = 0; u < k; ++u) {
    total += normal_logpdf(theta[pos++], spec.beta_mean, spec.beta_variance);
  }
  if (kind == ModelKind::kRanef) {
    if (theta.size() < pos + 1) check_dim(theta.size(), pos + 1, "tau");
    const double tau = theta.back();
    if (!(tau > 0)) fail(ErrorKind::kNonPositiveTau, "NonPositiveTau");
    const double a = spec.tau_shape;
    const double b = spec.tau_rate;
    total += a * std::log(b) - std::lgamma(a) + (a - 1.0) * std::log(tau) -
             b * tau;
  } else if (theta.size() != pos) {
    check_dim(theta.size(), pos, "parameter vector");
  }
  return total;
}

double log_posterior(ModelKind kind, std::span<const double> theta,
                     const Design& d, const PriorSpec& spec) {
  check_dim(theta.size(), parameter_count(kind, d), "parameter vector");
  return log_likelihood(kind, theta, d) + log_prior(kind, theta, d.k, spec);
}

// ---- Newton-Raphson --------------------------------------------------------

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Objective {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;
};

constexpr double kDivergenceNorm = 1e3;

MleResult newton_maximize(const Objective& obj, Vec x, const MleOptions& opts) {
  double fx = obj.value(x);
  if (!std::isfinite(fx)) {
    fail(ErrorKind::kNoConvergence, "objective is not finite at the start");
  }
  Vec last_step = Vec::Zero(x.size());
  for (int it = 0; it <= opts.max_iter; ++it) {
    const Vec g = obj.gradient(x);
    if (g.lpNorm<Eigen::Infinity>() < opts.tol) {
      if (it > 0 && last_step.norm() > 0) {
        // A recession direction keeps the likelihood from decreasing however
        // far we move; a finite maximizer makes it collapse.
        const Vec probe = x + kDivergenceNorm * last_step.normalized();
        const double fp = obj.value(probe);
        if (std::isfinite(fp) && fp >= fx - 1e-9) {
          fail(ErrorKind::kSeparation,
               "Separation: likelihood increases without bound along the "
               "Newton direction");
        }
      }
      const Mat h = obj.hessian(x);
      Eigen::LDLT<Mat> info(-h);
      MleResult r;
      r.beta.assign(x.data(), x.data() + x.size());
      r.log_likelihood = fx;
      r.iterations = it;
      const auto n = static_cast<Eigen::Index>(x.size());
      Mat cov = Mat::Constant(n, n, std::numeric_limits<double>::infinity());
      if (info.info() == Eigen::Success && info.isPositive() &&
          (info.vectorD().array() > 0).all()) {
        cov = info.solve(Mat::Identity(n, n));
      }
      r.covariance.assign(cov.data(), cov.data() + cov.size());
      for (Eigen::Index i = 0; i < n; ++i) {
        r.std_errors.push_back(std::sqrt(cov(i, i)));
      }
      return r;
    }
    if (it == opts.max_iter) break;

    const Mat h = obj.hessian(x);
    Eigen::LDLT<Mat> ldlt(-h);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        !(ldlt.vectorD().array() > 1e-300).all()) {
      fail(ErrorKind::kNoConvergence,
           "NoConvergence: singular information matrix (a feature may be "
           "constant within every stratum)");
    }
    Vec step = ldlt.solve(g);
    double t = 1.0;
    Vec next = x + step;
    double fn = obj.value(next);
    const double slack = 1e-12 * (1.0 + std::abs(fx));
    while (!(std::isfinite(fn) && fn >= fx - slack) && t > 1e-10) {
      t *= 0.5;
      next = x + t * step;
      fn = obj.value(next);
    }
    if (!std::isfinite(fn)) {
      fail(ErrorKind::kNoConvergence, "NoConvergence: line search failed");
    }
    last_step = next - x;
    x = std::move(next);
    fx = fn;
    if (x.norm() > kDivergenceNorm) {
      fail(ErrorKind::kSeparation,
           "Separation: coefficient norm exceeded 1e3 during Newton "
           "iterations");
    }
  }
  fail(ErrorKind::kNoConvergence,
       "NoConvergence: gradient still above tolerance after " +
           std::to_string(opts.max_iter) + " iterations");
}

std::span<const double> as_span(const Vec& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

MleResult mle_fit(const Design& d, const MleOptions& opts) {
  const auto k = static_cast<Eigen::Index>(d.k);
  std::optional<PriorSpec> prior = opts.prior;
  if (prior) prior->validate();
  Objective obj;
  obj.value = [&](const Vec& b) {
    double v = cond_log_likelihood(as_span(b), d);
    if (prior) v += log_prior(ModelKind::kConditional, as_span(b), d.k, *prior);
    return v;
  };
  obj.gradient = [&](const Vec& b) {
    Vec g = to_vec(cond_gradient(as_span(b), d));
    if (prior) {
      g.array() -= (b.array() - prior->beta_mean) / prior->beta_variance;
    }
    return g;
  };
  obj.hessian = [&](const Vec& b) {
    Mat h = Eigen::Map<const Mat>(cond_hessian(as_span(b), d).data(), k, k);
    if (prior) h.diagonal().array() -= 1.0 / prior->beta_variance;
    return h;
  };
  return newton_maximize(obj, Vec::Zero(k), opts);
}

MleResult mle_fit(const MatchedDataset& ds, const MleOptions& opts) {
  return mle_fit(make_design(ds), opts);
}

MleResult logistic_mle_fit(const Design& d, const MleOptions& opts) {
  const auto p = static_cast<Eigen::Index>(d.k + 1);
  std::optional<PriorSpec> prior = opts.prior;
  if (prior) prior->validate();

  auto eta_of = [&](const Vec& th, std::size_t r) {
    double e = th[0];
    const auto x = d.row(r);
    for (std::size_t u = 0; u < d.k; ++u) e += th[static_cast<Eigen::Index>(u + 1)] * x[u];
    return e;
  };
  Objective obj;
  obj.value = [&](const Vec& th) {
    double v = 0.0;
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
      const double e = eta_of(th, r);
      v += (d.y(r) ? e : 0.0) - log1pexp(e);
    }
    if (prior) v += log_prior(ModelKind::kLogistic, as_span(th), d.k, *prior);
    return v;
  };
  obj.gradient = [&](const Vec& th) {
    Vec g = Vec::Zero(p);
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
      const double resid = d.y(r) - 1.0 / (1.0 + std::exp(-eta_of(th, r)));
      g[0] += resid;
      const auto x = d.row(r);
      for (std::size_t u = 0; u < d.k; ++u) g[static_cast<Eigen::Index>(u + 1)] += resid * x[u];
    }
    if (prior) {
      g[0] -= (th[0] - prior->alpha_mean) / prior->alpha_variance;
      g.tail(p - 1).array() -=
          (th.tail(p - 1).array() - prior->beta_mean) / prior->beta_variance;
    }
    return g;
  };
  obj.hessian = [&](const Vec& th) {
    Mat h = Mat::Zero(p, p);
    Vec z(p);
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
      const double pr = 1.0 / (1.0 + std::exp(-eta_of(th, r)));
      z[0] = 1.0;
      const auto x = d.row(r);
      for (std::size_t u = 0; u < d.k; ++u) z[static_cast<Eigen::Index>(u + 1)] = x[u];
      h.noalias() -= pr * (1.0 - pr) * z * z.transpose();
    }
    if (prior) {
      h(0, 0) -= 1.0 / prior->alpha_variance;
      for (Eigen::Index i = 1; i < p; ++i) h(i, i) -= 1.0 / prior->beta_variance;
    }
    return h;
  };
  return newton_maximize(obj, Vec::Zero(p), opts);
}

}  // namespace arisk
