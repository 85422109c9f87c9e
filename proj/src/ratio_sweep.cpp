// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "arterial_risk/error.hpp"
#include "arterial_risk/fit.hpp"
#include "arterial_risk/matching.hpp"

namespace arisk {

std::vector<SweepRow> ratio_sweep(const RawCorpus& corpus,
                                  const std::vector<std::size_t>& ratios,
                                  const FeatureSpec& features,
                                  const McmcConfig& mcmc, std::uint64_t seed) {
  if (ratios.empty()) {
    fail(ErrorKind::kInvalidArgument, "ratio sweep needs at least one ratio");
  }
  std::vector<SweepRow> rows;
  for (std::size_t m : ratios) {
    try {
      if (m < 1 || m > 10) {
        fail(ErrorKind::kInvalidArgument, "ratio must lie in 1..10");
      }
      const MatchedDataset ds = build_matched_dataset(corpus, m, features, seed);
      FitConfig cfg;
      cfg.kind = ModelKind::kConditional;
      cfg.mcmc = mcmc;
      const FitResult fit = fit_model(ds, cfg);
      rows.push_back({m, ds.n_strata(), ds.dropped.size(), fit.auc.auc,
                      fit.dic.dic, fit.dic.p_d});
    } catch (const Error& e) {
      throw Error(e.kind(), "m=" + std::to_string(m) + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace arisk
