// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "arterial_risk/report.hpp"

#include <algorithm>
#include <cmath>

#include "arterial_risk/error.hpp"
#include "arterial_risk/text_io.hpp"

namespace arisk {

std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "markdown" || s == "md") return ReportFormat::kMarkdown;
  return std::nullopt;
}

std::string sig_mark(const ParameterSummary& p) {
  if (p.sig_05) return "bold";
  if (p.sig_10) return "*";
  return "";
}

std::string format_estimate(const ReportRow& row, bool markdown) {
  std::string s = format_fixed(row.mean, 3) + " (" +
                  format_fixed(row.bci_low, 3) + ", " +
                  format_fixed(row.bci_high, 3) + ")";
  if (row.sig_mark == "*") return s + "*";
  if (row.sig_mark == "bold") return markdown ? "**" + s + "**" : s;
  return s;
}

namespace {

std::string display_name(const std::string& parameter) {
  if (parameter == "intercept") return "Intercept";
  if (parameter == "tau") return "Random effect (tau)";
  return parameter;
}

ReportRow row_from(const ParameterSummary& p) {
  ReportRow r;
  r.parameter = display_name(p.name);
  r.mean = p.mean;
  r.bci_low = p.q025;
  r.bci_high = p.q975;
  r.hazard_ratio = std::exp(p.mean);
  r.sig_mark = sig_mark(p);
  return r;
}

std::string hr_cell(const ReportRow& r, bool full) {
  if (!r.hazard_ratio) return "";
  return full ? format_double(*r.hazard_ratio) : format_fixed(*r.hazard_ratio, 3);
}

std::string md_row(const std::vector<std::string>& cells) {
  std::string out = "|";
  for (const auto& c : cells) out += " " + c + " |";
  return out + "\n";
}

}  // namespace

ReportTable report_from_fit(const FitResult& fit, std::string title) {
  ReportTable t;
  t.title = title.empty() ? model_title(fit.kind) : std::move(title);
  const std::size_t fixed = fit.fixed_effect_means().size();
  for (std::size_t i = 0; i < fixed; ++i) {
    t.rows.push_back(row_from(fit.summary.params[i]));
  }
  if (fit.kind == ModelKind::kRanef) {
    if (const auto* tau = fit.summary.find("tau")) {
      ReportRow r = row_from(*tau);
      r.sig_mark.clear();
      r.hazard_ratio.reset();
      t.rows.push_back(r);
    }
  }
  t.dic = fit.dic.dic;
  t.auc = fit.auc.auc;
  return t;
}

std::string render_table(const ReportTable& table, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::kCsv) {
    out = "parameter,mean,bci_low,bci_high,hazard_ratio,sig\n";
    for (const auto& r : table.rows) {
      out += csv_join({r.parameter, format_double(r.mean),
                       format_double(r.bci_low), format_double(r.bci_high),
                       hr_cell(r, true), r.sig_mark}) +
             "\n";
    }
    if (table.dic) out += "DIC," + format_double(*table.dic) + ",,,,\n";
    if (table.auc) out += "AUC," + format_double(*table.auc) + ",,,,\n";
    return out;
  }
  if (!table.title.empty()) out += "### " + table.title + "\n\n";
  out += md_row({"Parameter", "Mean (95% BCI)", "Hazard ratio"});
  out += "|---|---|---|\n";
  for (const auto& r : table.rows) {
    out += md_row({r.parameter, format_estimate(r, true),
                   hr_cell(r, false)});
  }
  if (table.dic) out += md_row({"DIC", format_fixed(*table.dic, 3), ""});
  if (table.auc) out += md_row({"AUC", format_fixed(*table.auc, 3), ""});
  if (!table.rows.empty()) {
    out += "\nBold: 95% BCI excludes 0. *: 90% BCI excludes 0.\n";
  }
  return out;
}

ReportTable parse_table_csv(std::string_view csv) {
  const CsvTable t = parse_csv(csv, "report");
  const char* names[] = {"parameter", "mean", "bci_low",
                         "bci_high", "hazard_ratio", "sig"};
  std::size_t col[6];
  for (int i = 0; i < 6; ++i) {
    const auto c = t.column(names[i]);
    if (!c) fail_missing_column("report", names[i]);
    col[i] = *c;
  }
  auto number = [&](const CsvRow& row, std::size_t c, const char* name) {
    const auto v = parse_double(row.fields[c]);
    if (!v) fail_bad_row("report", row.line, name);
    return *v;
  };
  ReportTable out;
  for (const auto& row : t.rows) {
    const std::string& p = row.fields[col[0]];
    if (p == "DIC") {
      out.dic = number(row, col[1], "mean");
    } else if (p == "AUC") {
      out.auc = number(row, col[1], "mean");
    } else {
      ReportRow r;
      r.parameter = p;
      r.mean = number(row, col[1], "mean");
      r.bci_low = number(row, col[2], "bci_low");
      r.bci_high = number(row, col[3], "bci_high");
      if (!row.fields[col[4]].empty()) {
        r.hazard_ratio = number(row, col[4], "hazard_ratio");
      }
      r.sig_mark = row.fields[col[5]];
      if (r.sig_mark != "" && r.sig_mark != "*" && r.sig_mark != "bold") {
        fail_bad_row("report", row.line, "sig");
      }
      out.rows.push_back(std::move(r));
    }
  }
  return out;
}

std::string model_title(ModelKind kind) {
  switch (kind) {
    case ModelKind::kConditional: return "Bayesian conditional logistic model";
    case ModelKind::kLogistic: return "Bayesian logistic model";
    case ModelKind::kRanef: return "Bayesian random effect logistic model";
  }
  return "";
}

std::string render_comparison(const std::vector<FitResult>& fits,
                              ReportFormat format) {
  std::vector<ReportTable> tables;
  std::vector<std::string> order;
  for (const auto& f : fits) {
    tables.push_back(report_from_fit(f));
    for (const auto& r : tables.back().rows) {
      if (std::find(order.begin(), order.end(), r.parameter) == order.end()) {
        order.push_back(r.parameter);
      }
    }
  }
  // Intercept first, tau last, features in between in first-seen order.
  std::stable_partition(order.begin(), order.end(),
                        [](const auto& p) { return p == "Intercept"; });
  std::stable_partition(order.begin(), order.end(), [](const auto& p) {
    return p != "Random effect (tau)";
  });
  auto find_row = [](const ReportTable& t,
                     const std::string& p) -> const ReportRow* {
    for (const auto& r : t.rows) {
      if (r.parameter == p) return &r;
    }
    return nullptr;
  };

  std::string out;
  if (format == ReportFormat::kCsv) {
    std::vector<std::string> header = {"parameter"};
    for (const auto& f : fits) {
      const std::string k = to_string(f.kind);
      for (const char* c :
           {"_mean", "_bci_low", "_bci_high", "_hazard_ratio", "_sig"}) {
        header.push_back(k + c);
      }
    }
    out = csv_join(header) + "\n";
    for (const auto& p : order) {
      std::vector<std::string> cells = {p};
      for (const auto& t : tables) {
        if (const ReportRow* r = find_row(t, p)) {
          cells.insert(cells.end(),
                       {format_double(r->mean), format_double(r->bci_low),
                        format_double(r->bci_high),
                        hr_cell(*r, true), r->sig_mark});
        } else {
          cells.insert(cells.end(), 5, "");
        }
      }
      out += csv_join(cells) + "\n";
    }
    for (const char* footer : {"DIC", "AUC"}) {
      std::vector<std::string> cells = {footer};
      for (const auto& t : tables) {
        const auto v = std::string(footer) == "DIC" ? t.dic : t.auc;
        cells.push_back(v ? format_double(*v) : "");
        cells.insert(cells.end(), 4, "");
      }
      out += csv_join(cells) + "\n";
    }
    return out;
  }

  std::vector<std::string> groups = {""};
  std::vector<std::string> sub = {"Parameter"};
  std::string rule = "|---|";
  for (const auto& t : tables) {
    groups.insert(groups.end(), {t.title, ""});
    sub.insert(sub.end(), {"Mean (95% BCI)", "Hazard ratio"});
    rule += "---|---|";
  }
  out += md_row(groups) + rule + "\n" + md_row(sub);
  for (const auto& p : order) {
    std::vector<std::string> cells = {p};
    for (const auto& t : tables) {
      if (const ReportRow* r = find_row(t, p)) {
        cells.push_back(format_estimate(*r, true));
        cells.push_back(hr_cell(*r, false));
      } else {
        cells.insert(cells.end(), {"", ""});
      }
    }
    out += md_row(cells);
  }
  for (const char* footer : {"DIC", "AUC"}) {
    std::vector<std::string> cells = {footer};
    for (const auto& t : tables) {
      const auto v = std::string(footer) == "DIC" ? t.dic : t.auc;
      cells.push_back(v ? format_fixed(*v, 3) : "");
      cells.push_back("");
    }
    out += md_row(cells);
  }
  out += "\nBold: 95% BCI excludes 0. *: 90% BCI excludes 0. "
         "DIC values come from different likelihoods (conditional vs. full) "
         "and are not on a common scale.\n";
  return out;
}

std::string render_scores(const ScoreSet& scores) {
  std::string out = "stratum_id,is_crash,raw_odds,normalized\n";
  for (const auto& s : scores.scores) {
    out += std::to_string(s.stratum_id) + "," + std::to_string(s.is_crash) +
           "," + format_double(s.raw_odds) + "," +
           format_double(s.normalized) + "\n";
  }
  return out;
}

std::string render_roc(const AucResult& auc) {
  std::string out = "threshold,fpr,tpr\n";
  for (const auto& p : auc.curve) {
    out += format_double(p.threshold) + "," + format_double(p.fpr) + "," +
           format_double(p.tpr) + "\n";
  }
  return out;
}

std::string render_sweep(const std::vector<SweepRow>& rows,
                         ReportFormat format) {
  std::string out;
  if (format == ReportFormat::kCsv) {
    out = "m,ratio,n_strata,dropped_crashes,auc,dic,p_d\n";
    for (const auto& r : rows) {
      out += std::to_string(r.m) + "," + std::to_string(r.m) + ":1," +
             std::to_string(r.n_strata) + "," + std::to_string(r.dropped) +
             "," + format_double(r.auc) + "," + format_double(r.dic) + "," +
             format_double(r.p_d) + "\n";
    }
    return out;
  }
  out = md_row({"Control:case", "Strata", "Dropped crashes", "AUC", "DIC",
                "p_D"});
  out += "|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    out += md_row({std::to_string(r.m) + ":1", std::to_string(r.n_strata),
                   std::to_string(r.dropped), format_fixed(r.auc, 3),
                   format_fixed(r.dic, 3), format_fixed(r.p_d, 3)});
  }
  return out;
}

}  // namespace arisk
