// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "arterial_risk/arterial_risk.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <string>

#include "arterial_risk/error.hpp"
#include "arterial_risk/fit.hpp"
#include "arterial_risk/ingest.hpp"
#include "arterial_risk/matching.hpp"
#include "arterial_risk/report.hpp"
#include "arterial_risk/simulator.hpp"
#include "arterial_risk/text_io.hpp"

struct ar_corpus {
  arisk::RawCorpus corpus;
};

struct ar_dataset {
  arisk::MatchedDataset ds;
};

struct ar_fit {
  arisk::FitResult fit;
};

namespace {

static_assert(AR_ERR_INVALID_CONFIG ==
              static_cast<int>(arisk::ErrorKind::kInvalidConfig) + 1);

thread_local std::string g_last_error;

ar_status set_error(ar_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
ar_status guarded(F&& body) {
  try {
    body();
    return AR_OK;
  } catch (const arisk::Error& e) {
    return set_error(static_cast<ar_status>(static_cast<int>(e.kind()) + 1),
                     e.what());
  } catch (const std::bad_alloc&) {
    return set_error(AR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(AR_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(AR_ERR_INTERNAL, "unknown error");
  }
}

ar_status null_argument(const char* name) {
  return set_error(AR_ERR_INVALID_ARGUMENT,
                   std::string("null argument: ") + name);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

arisk::ModelKind to_kind(ar_model m) {
  switch (m) {
    case AR_MODEL_CONDITIONAL: return arisk::ModelKind::kConditional;
    case AR_MODEL_LOGISTIC: return arisk::ModelKind::kLogistic;
    case AR_MODEL_RANEF: return arisk::ModelKind::kRanef;
  }
  arisk::fail(arisk::ErrorKind::kInvalidArgument, "unknown model kind");
}

arisk::Grouping to_grouping(ar_grouping g) {
  switch (g) {
    case AR_GROUPING_STRATUM: return arisk::Grouping::kStratum;
    case AR_GROUPING_SEGMENT: return arisk::Grouping::kSegment;
  }
  arisk::fail(arisk::ErrorKind::kUnknownGrouping, "UnknownGrouping");
}

arisk::ReportFormat to_format(ar_format f) {
  return f == AR_FORMAT_MARKDOWN ? arisk::ReportFormat::kMarkdown
                                 : arisk::ReportFormat::kCsv;
}

arisk::McmcConfig to_mcmc(const ar_mcmc_config* c) {
  arisk::McmcConfig m;
  if (!c) return m;
  m.chains = c->chains;
  m.iterations = c->iterations;
  m.burn_in = c->burn_in;
  m.thin = c->thin;
  m.initial_step = c->initial_step;
  m.seed = c->seed;
  m.parallel = c->parallel != 0;
  return m;
}

arisk::FeatureSpec to_features(const char* features) {
  const std::string list =
      features && *features ? features : arisk::kDefaultFeatures;
  return arisk::FeatureSpec::parse(list);
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const auto& part : arisk::split(s, ',')) {
    const auto v = arisk::parse_double(arisk::trim(part));
    if (!v) {
      arisk::fail(arisk::ErrorKind::kInvalidConfig,
                  std::string("InvalidConfig: bad number in ") + what + ": " +
                      part);
    }
    out.push_back(*v);
  }
  return out;
}

}  // namespace

extern "C" {

const char* ar_version(void) { return "0.1.0"; }

const char* ar_last_error(void) { return g_last_error.c_str(); }

const char* ar_status_name(ar_status status) {
  if (status == AR_OK) return "Ok";
  if (status == AR_ERR_INTERNAL) return "Internal";
  const int k = static_cast<int>(status) - 1;
  if (k >= 0 && k <= static_cast<int>(arisk::ErrorKind::kInvalidConfig)) {
    return arisk::to_string(static_cast<arisk::ErrorKind>(k));
  }
  return "Unknown";
}

void ar_string_free(char* s) { std::free(s); }

ar_status ar_corpus_load(const char* dir, ar_corpus** out) {
  if (!dir) return null_argument("dir");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto c = std::make_unique<ar_corpus>();
    c->corpus = arisk::load_corpus(arisk::CorpusPaths::in_directory(dir));
    *out = c.release();
  });
}

ar_status ar_corpus_counts(const ar_corpus* corpus, ar_source_counts* out) {
  if (!corpus) return null_argument("corpus");
  if (!out) return null_argument("out");
  const auto c = corpus->corpus.counts();
  *out = {c.crashes, c.travel_times, c.volumes, c.phases, c.weather,
          c.segments};
  return AR_OK;
}

ar_status ar_corpus_range(const ar_corpus* corpus, char** start, char** end) {
  if (!corpus) return null_argument("corpus");
  if (!start || !end) return null_argument("start/end");
  return guarded([&] {
    *start = dup_string(arisk::format_iso8601(corpus->corpus.range.start));
    *end = dup_string(arisk::format_iso8601(corpus->corpus.range.end));
  });
}

void ar_corpus_free(ar_corpus* corpus) { delete corpus; }

ar_status ar_dataset_build(const ar_corpus* corpus, size_t m,
                           const char* features, uint64_t seed,
                           ar_dataset** out) {
  if (!corpus) return null_argument("corpus");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto d = std::make_unique<ar_dataset>();
    d->ds = arisk::build_matched_dataset(corpus->corpus, m,
                                         to_features(features), seed);
    *out = d.release();
  });
}

ar_status ar_dataset_load(const char* csv_path, ar_dataset** out) {
  if (!csv_path) return null_argument("csv_path");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto d = std::make_unique<ar_dataset>();
    d->ds = arisk::read_dataset(csv_path);
    *out = d.release();
  });
}

ar_status ar_dataset_save(const ar_dataset* ds, const char* csv_path) {
  if (!ds) return null_argument("ds");
  if (!csv_path) return null_argument("csv_path");
  return guarded([&] { arisk::write_dataset(ds->ds, csv_path); });
}

ar_status ar_dataset_info_get(const ar_dataset* ds, ar_dataset_info* out) {
  if (!ds) return null_argument("ds");
  if (!out) return null_argument("out");
  *out = {ds->ds.n_strata(), ds->ds.m,
          ds->ds.k,          ds->ds.n_observations(),
          ds->ds.dropped.size(), ds->ds.seed};
  return AR_OK;
}

ar_status ar_dataset_features(const ar_dataset* ds, char** out) {
  if (!ds) return null_argument("ds");
  if (!out) return null_argument("out");
  return guarded([&] {
    std::string s;
    for (const auto& n : ds->ds.feature_names) {
      if (!s.empty()) s += ',';
      s += n;
    }
    *out = dup_string(s);
  });
}

void ar_dataset_free(ar_dataset* ds) { delete ds; }

void ar_mcmc_config_default(ar_mcmc_config* out) {
  if (!out) return;
  const arisk::McmcConfig m;
  *out = {m.chains, m.iterations, m.burn_in, m.thin,
          m.initial_step, m.seed, m.parallel ? 1 : 0};
}

ar_status ar_fit_run(const ar_dataset* ds, ar_model model,
                     ar_grouping grouping, const ar_mcmc_config* mcmc,
                     ar_fit** out) {
  if (!ds) return null_argument("ds");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    arisk::FitConfig cfg;
    cfg.kind = to_kind(model);
    cfg.grouping = to_grouping(grouping);
    cfg.mcmc = to_mcmc(mcmc);
    auto f = std::make_unique<ar_fit>();
    f->fit = arisk::fit_model(ds->ds, cfg);
    *out = f.release();
  });
}

ar_status ar_fit_metrics_get(const ar_fit* fit, ar_fit_metrics* out) {
  if (!fit) return null_argument("fit");
  if (!out) return null_argument("out");
  const auto& f = fit->fit;
  double max_rhat = 0.0;
  for (double r : f.rhat.rhat) max_rhat = std::max(max_rhat, r);
  *out = {f.dic.dic, f.dic.d_bar, f.dic.d_hat, f.dic.p_d, f.auc.auc,
          max_rhat,  f.summary.params.size(), f.warnings.size()};
  return AR_OK;
}

ar_status ar_fit_param(const ar_fit* fit, size_t index,
                       ar_param_summary* out) {
  if (!fit) return null_argument("fit");
  if (!out) return null_argument("out");
  const auto& f = fit->fit;
  if (index >= f.summary.params.size()) {
    return set_error(AR_ERR_INVALID_ARGUMENT, "parameter index out of range");
  }
  const auto& p = f.summary.params[index];
  *out = {p.name.c_str(), p.mean,  p.sd,   p.q025,
          p.q05,          p.q95,   p.q975, std::exp(p.mean),
          index < f.rhat.rhat.size() ? f.rhat.rhat[index] : 0.0,
          p.sig_05 ? 1 : 0, p.sig_10 ? 1 : 0};
  return AR_OK;
}

ar_status ar_fit_warning(const ar_fit* fit, size_t index, const char** out) {
  if (!fit) return null_argument("fit");
  if (!out) return null_argument("out");
  if (index >= fit->fit.warnings.size()) {
    return set_error(AR_ERR_INVALID_ARGUMENT, "warning index out of range");
  }
  *out = fit->fit.warnings[index].c_str();
  return AR_OK;
}

ar_status ar_fit_render(const ar_fit* fit, ar_format format, char** out) {
  if (!fit) return null_argument("fit");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = dup_string(arisk::render_table(arisk::report_from_fit(fit->fit),
                                          to_format(format)));
  });
}

ar_status ar_fit_write_summary(const ar_fit* fit, ar_format format,
                               const char* path) {
  if (!fit) return null_argument("fit");
  if (!path) return null_argument("path");
  return guarded([&] {
    arisk::write_file(path, arisk::render_table(arisk::report_from_fit(fit->fit),
                                                to_format(format)));
  });
}

ar_status ar_fit_write_coefficients(const ar_fit* fit, const char* path) {
  if (!fit) return null_argument("fit");
  if (!path) return null_argument("path");
  return guarded([&] { arisk::write_coefficients(fit->fit, path); });
}

ar_status ar_fit_write_draws(const ar_fit* fit, const char* path) {
  if (!fit) return null_argument("fit");
  if (!path) return null_argument("path");
  return guarded(
      [&] { arisk::write_file(path, arisk::render_draws(fit->fit.chains)); });
}

ar_status ar_fit_write_roc(const ar_fit* fit, const char* path) {
  if (!fit) return null_argument("fit");
  if (!path) return null_argument("path");
  return guarded(
      [&] { arisk::write_file(path, arisk::render_roc(fit->fit.auc)); });
}

void ar_fit_free(ar_fit* fit) { delete fit; }

ar_status ar_compare_render(const ar_fit* const* fits, size_t n,
                            ar_format format, char** out) {
  if (!fits) return null_argument("fits");
  if (!out) return null_argument("out");
  return guarded([&] {
    std::vector<arisk::FitResult> all;
    for (size_t i = 0; i < n; ++i) {
      if (!fits[i]) {
        arisk::fail(arisk::ErrorKind::kInvalidArgument, "null fit handle");
      }
      all.push_back(fits[i]->fit);
    }
    *out = dup_string(arisk::render_comparison(all, to_format(format)));
  });
}

ar_status ar_score(const char* coefficients_path, const ar_dataset* ds,
                   const char* scores_path, const char* roc_path,
                   double* auc) {
  if (!coefficients_path) return null_argument("coefficients_path");
  if (!ds) return null_argument("ds");
  return guarded([&] {
    const auto coef = arisk::read_coefficients(coefficients_path);
    const auto scores = arisk::score_dataset(coef, ds->ds);
    const auto result = arisk::roc_auc(scores);
    if (scores_path) arisk::write_file(scores_path, arisk::render_scores(scores));
    if (roc_path) arisk::write_file(roc_path, arisk::render_roc(result));
    if (auc) *auc = result.auc;
  });
}

void ar_sim_config_default(ar_sim_config* out) {
  if (!out) return;
  const arisk::SimConfig c;
  *out = {AR_SIM_MATCHED,    c.seed,       nullptr,
          nullptr,           c.n_strata,   c.m,
          c.n_segments,      c.weeks,      c.crash_intercept,
          c.detection_rate,  c.with_phases ? 1 : 0};
}

ar_status ar_simulate(const ar_sim_config* config, const char* out_dir) {
  if (!config) return null_argument("config");
  if (!out_dir) return null_argument("out_dir");
  return guarded([&] {
    arisk::SimConfig c;
    c.seed = config->seed;
    c.n_strata = config->n_strata;
    c.m = config->m;
    c.n_segments = config->n_segments;
    c.weeks = config->weeks;
    c.crash_intercept = config->crash_intercept;
    c.detection_rate = config->detection_rate;
    c.with_phases = config->with_phases != 0;
    const bool custom_features = config->features && *config->features;
    if (custom_features) {
      c.feature_names = to_features(config->features).names();
      c.feature_model.clear();
      for (const auto& n : c.feature_names) {
        c.feature_model.push_back(arisk::default_feature_distribution(n));
      }
    }
    if (config->true_beta && *config->true_beta) {
      c.true_beta = parse_list(config->true_beta, "true_beta");
    } else if (custom_features) {
      arisk::fail(arisk::ErrorKind::kInvalidConfig,
                  "InvalidConfig: custom features need true_beta");
    }
    arisk::SimResult r;
    if (config->mode == AR_SIM_CORPUS) {
      c.mode = arisk::SimMode::kCorpus;
      r = arisk::simulate_corpus(c);
    } else {
      r = arisk::simulate_matched(c);
    }
    arisk::write_sim_result(r, out_dir);
  });
}

ar_status ar_ratio_sweep(const ar_corpus* corpus, size_t m_from, size_t m_to,
                         const char* features, const ar_mcmc_config* mcmc,
                         uint64_t seed, ar_format format, ar_sweep_row* rows,
                         char** report) {
  if (!corpus) return null_argument("corpus");
  return guarded([&] {
    if (m_from < 1 || m_to < m_from) {
      arisk::fail(arisk::ErrorKind::kInvalidArgument,
                  "ratio range must satisfy 1 <= from <= to");
    }
    std::vector<std::size_t> ratios;
    for (size_t m = m_from; m <= m_to; ++m) ratios.push_back(m);
    const auto result = arisk::ratio_sweep(corpus->corpus, ratios,
                                           to_features(features),
                                           to_mcmc(mcmc), seed);
    if (rows) {
      for (std::size_t i = 0; i < result.size(); ++i) {
        const auto& r = result[i];
        rows[i] = {r.m, r.n_strata, r.dropped, r.auc, r.dic, r.p_d};
      }
    }
    if (report) *report = dup_string(arisk::render_sweep(result, to_format(format)));
  });
}

}  // extern "C"
