// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

// Report tables: per-model coefficient summaries (posterior mean, 95% BCI,
// hazard ratio, significance mark), a three-model comparison, and plain CSV
// emitters for scores, ROC points and ratio sweeps.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "arterial_risk/diagnostics.hpp"
#include "arterial_risk/fit.hpp"
#include "arterial_risk/matching.hpp"

namespace arisk {

enum class ReportFormat { kCsv, kMarkdown };
std::optional<ReportFormat> parse_report_format(std::string_view s);

struct ReportRow {
  std::string parameter;
  double mean = 0.0;
  double bci_low = 0.0;
  double bci_high = 0.0;
  std::optional<double> hazard_ratio;  // none for tau
  std::string sig_mark;  // "", "*" or "bold"
};

struct ReportTable {
  std::string title;
  std::vector<ReportRow> rows;
  std::optional<double> dic;
  std::optional<double> auc;
};

/// "bold" when the 95% interval excludes 0, "*" when only the 90% one does.
std::string sig_mark(const ParameterSummary& p);
/// "m.mmm (l.lll, u.uuu)" with the mark: trailing "*" or "**...**" for bold.
std::string format_estimate(const ReportRow& row, bool markdown);

/// Fixed effects (and tau for the random-effect model), DIC and AUC footer.
ReportTable report_from_fit(const FitResult& fit, std::string title = "");

std::string render_table(const ReportTable& table, ReportFormat format);
/// Inverse of the CSV rendering.
ReportTable parse_table_csv(std::string_view csv);

/// Column group titles, in order.
std::string model_title(ModelKind kind);

/// One column group per fit; rows are the union of parameters followed by
/// DIC and AUC.
std::string render_comparison(const std::vector<FitResult>& fits,
                              ReportFormat format);

std::string render_scores(const ScoreSet& scores);
std::string render_roc(const AucResult& auc);
std::string render_sweep(const std::vector<SweepRow>& rows,
                         ReportFormat format);

}  // namespace arisk
