// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

// arterial-risk command-line front end. Exit codes: 0 success, 1 data error,
// 2 usage error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "arterial_risk/arterial_risk.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  DataError(ar_status s, const std::string& what)
      : std::runtime_error(what), status(s) {}
  ar_status status;
};

void check(ar_status s) {
  if (s == AR_OK) return;
  const std::string msg = std::string(ar_status_name(s)) + ": " + ar_last_error();
  switch (s) {
    case AR_ERR_INVALID_ARGUMENT:
    case AR_ERR_INVALID_CONFIG:
    case AR_ERR_UNKNOWN_FEATURE:
    case AR_ERR_UNKNOWN_GROUPING:
      throw UsageError(msg);
    default:
      throw DataError(s, msg);
  }
}

std::string take(char* s) {
  std::string out = s ? s : "";
  ar_string_free(s);
  return out;
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw DataError(AR_ERR_IO, "Io: cannot write " + p.string());
}

// --config FILE: plain key=value lines, '#' comments. Keys name long flags of
// the active subcommand; flags given on the command line win.
std::vector<std::string> splice_config(CLI::App& app,
                                       const std::vector<std::string>& args) {
  std::string config_path;
  std::size_t sub_pos = args.size();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    if (sub_pos == args.size() && !args[i].empty() && args[i][0] != '-') {
      sub_pos = i;
    }
  }
  if (config_path.empty() || sub_pos == args.size()) return args;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[sub_pos]);
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::ifstream in(config_path);
  if (!in) throw DataError(AR_ERR_IO, "Io: cannot read config " + config_path);

  std::vector<std::string> extra;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(line_no) +
                       ": expected key=value");
    }
    std::string key = CLI::detail::trim_copy(line.substr(0, eq));
    const std::string value = CLI::detail::trim_copy(line.substr(eq + 1));
    const std::string flag = "--" + key;
    CLI::Option* opt = sub->get_option_no_throw(flag);
    if (!opt) continue;  // shared config files may carry other commands' keys
    bool given = false;
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
    }
    if (given) continue;
    if (opt->get_expected_min() == 0) {
      if (value == "1" || value == "true" || value == "yes") extra.push_back(flag);
    } else {
      extra.push_back(flag);
      extra.push_back(value);
    }
  }
  std::vector<std::string> out(args.begin(), args.begin() + sub_pos + 1);
  out.insert(out.end(), extra.begin(), extra.end());
  out.insert(out.end(), args.begin() + sub_pos + 1, args.end());
  return out;
}

struct McmcFlags {
  int chains = 0;
  int iters = 0;
  int burnin = 0;
  int thin = 0;
  std::uint64_t seed = 0;

  void add(CLI::App* sub) {
    ar_mcmc_config d;
    ar_mcmc_config_default(&d);
    chains = d.chains;
    iters = d.iterations;
    burnin = d.burn_in;
    thin = d.thin;
    sub->add_option("--chains", chains, "MCMC chains")->capture_default_str();
    sub->add_option("--iters", iters, "iterations per chain, with burn-in")
        ->capture_default_str();
    sub->add_option("--burnin", burnin, "burn-in iterations")
        ->capture_default_str();
    sub->add_option("--thin", thin, "keep every n-th draw")
        ->capture_default_str();
    sub->add_option("--seed", seed, "sampler seed")
        ->envname("ARTERIAL_RISK_SEED")
        ->capture_default_str();
  }

  ar_mcmc_config config() const {
    ar_mcmc_config c;
    ar_mcmc_config_default(&c);
    c.chains = chains;
    c.iterations = iters;
    c.burn_in = burnin;
    c.thin = thin;
    c.seed = seed;
    return c;
  }
};

const std::map<std::string, ar_model> kModels = {
    {"conditional", AR_MODEL_CONDITIONAL},
    {"logistic", AR_MODEL_LOGISTIC},
    {"ranef", AR_MODEL_RANEF}};
const std::map<std::string, ar_grouping> kGroupings = {
    {"stratum", AR_GROUPING_STRATUM}, {"segment", AR_GROUPING_SEGMENT}};
const std::map<std::string, ar_format> kFormats = {
    {"csv", AR_FORMAT_CSV}, {"markdown", AR_FORMAT_MARKDOWN}};

const char* extension(ar_format f) { return f == AR_FORMAT_CSV ? ".csv" : ".md"; }

struct Dataset {
  ar_dataset* h = nullptr;
  explicit Dataset(const std::string& path) { check(ar_dataset_load(path.c_str(), &h)); }
  ~Dataset() { ar_dataset_free(h); }
  Dataset(const Dataset&) = delete;
  Dataset& operator=(const Dataset&) = delete;
};

struct Corpus {
  ar_corpus* h = nullptr;
  explicit Corpus(const std::string& dir) { check(ar_corpus_load(dir.c_str(), &h)); }
  ~Corpus() { ar_corpus_free(h); }
  Corpus(const Corpus&) = delete;
  Corpus& operator=(const Corpus&) = delete;
};

struct Fit {
  ar_fit* h = nullptr;
  Fit(const Dataset& ds, ar_model model, ar_grouping grouping,
      const ar_mcmc_config& mcmc) {
    check(ar_fit_run(ds.h, model, grouping, &mcmc, &h));
  }
  ~Fit() { ar_fit_free(h); }
  Fit(const Fit&) = delete;
  Fit& operator=(const Fit&) = delete;

  void print_warnings(const char* label) const {
    ar_fit_metrics m;
    check(ar_fit_metrics_get(h, &m));
    for (std::size_t i = 0; i < m.n_warnings; ++i) {
      const char* w = nullptr;
      check(ar_fit_warning(h, i, &w));
      std::cerr << "warning (" << label << "): " << w << "\n";
    }
  }
};

std::pair<std::size_t, std::size_t> parse_ratio_range(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const auto m = std::stoul(s);
      return {m, m};
    }
    return {std::stoul(s.substr(0, dots)), std::stoul(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw UsageError("--ratios expects A..B, got '" + s + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-time crash risk on urban arterials: matched case-control "
               "datasets and Bayesian logistic models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ar_version());
  std::string config_file;

  std::string corpus_dir, dataset_path, out_dir = ".", features, model = "conditional",
      grouping = "stratum", format = "markdown", coefficients, ratios = "1..10";
  std::size_t ratio = 8;
  std::uint64_t seed = 0;
  bool draws = false;
  McmcFlags mcmc;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "key=value file; flags win");
  };
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", format, "report format")
        ->check(CLI::IsMember({"csv", "markdown"}))
        ->capture_default_str();
  };

  auto* ingest = app.add_subcommand("ingest", "validate a corpus, print per-source counts");
  ingest->add_option("--corpus", corpus_dir, "corpus directory")->required();
  ingest->add_option("--out", out_dir, "also write ingest.txt here");
  add_config(ingest);

  auto* match = app.add_subcommand("match", "build a 1:m matched case-control dataset");
  match->add_option("--corpus", corpus_dir, "corpus directory")->required();
  match->add_option("--ratio", ratio, "controls per crash")
      ->check(CLI::Range(1, 10))
      ->capture_default_str();
  match->add_option("--features", features, "comma-separated feature list");
  match->add_option("--seed", seed, "control sampling seed")
      ->envname("ARTERIAL_RISK_SEED");
  match->add_option("--out", out_dir, "output directory")->capture_default_str();
  add_config(match);

  auto* fit = app.add_subcommand("fit", "fit one Bayesian model, write its summary table");
  fit->add_option("--dataset", dataset_path, "matched dataset CSV")->required();
  fit->add_option("--model", model, "model")
      ->check(CLI::IsMember({"conditional", "logistic", "ranef"}))
      ->capture_default_str();
  fit->add_option("--grouping", grouping, "random-effect grouping")
      ->check(CLI::IsMember({"stratum", "segment"}))
      ->capture_default_str();
  mcmc.add(fit);
  add_format(fit);
  fit->add_option("--out", out_dir, "output directory")->capture_default_str();
  fit->add_flag("--draws", draws, "also write draws.csv");
  add_config(fit);

  auto* compare = app.add_subcommand("compare", "fit all three models, write the comparison table");
  compare->add_option("--dataset", dataset_path, "matched dataset CSV")->required();
  compare->add_option("--grouping", grouping, "random-effect grouping")
      ->check(CLI::IsMember({"stratum", "segment"}))
      ->capture_default_str();
  mcmc.add(compare);
  add_format(compare);
  compare->add_option("--out", out_dir, "output directory")->capture_default_str();
  add_config(compare);

  auto* score = app.add_subcommand("score", "score a dataset with a coefficient file");
  score->add_option("--dataset", dataset_path, "matched dataset CSV")->required();
  score->add_option("--coefficients", coefficients, "coefficient file")->required();
  score->add_option("--out", out_dir, "output directory")->capture_default_str();
  add_config(score);

  ar_sim_config sim;
  ar_sim_config_default(&sim);
  std::string sim_mode = "matched", true_beta;
  bool phases = false;
  auto* simulate = app.add_subcommand("simulate", "write synthetic data with known coefficients");
  simulate->add_option("--mode", sim_mode, "matched dataset or raw corpus")
      ->check(CLI::IsMember({"matched", "corpus"}))
      ->capture_default_str();
  simulate->add_option("--strata", sim.n_strata, "matched: number of strata")
      ->capture_default_str();
  simulate->add_option("--m", sim.m, "matched: controls per stratum")
      ->capture_default_str();
  simulate->add_option("--segments", sim.n_segments, "corpus: segments")
      ->capture_default_str();
  simulate->add_option("--weeks", sim.weeks, "corpus: weeks of data")
      ->capture_default_str();
  simulate->add_option("--intercept", sim.crash_intercept, "corpus: crash intercept")
      ->capture_default_str();
  simulate->add_flag("--phases", phases, "corpus: emit signal phases");
  simulate->add_option("--features", features, "comma-separated feature list");
  simulate->add_option("--true-beta", true_beta, "comma-separated coefficients");
  simulate->add_option("--seed", sim.seed, "simulation seed")
      ->envname("ARTERIAL_RISK_SEED");
  simulate->add_option("--out", out_dir, "output directory")->capture_default_str();
  add_config(simulate);

  auto* sweep = app.add_subcommand("sweep-ratio", "fit the conditional model for each control ratio");
  sweep->add_option("--corpus", corpus_dir, "corpus directory")->required();
  sweep->add_option("--ratios", ratios, "ratio range A..B")->capture_default_str();
  sweep->add_option("--features", features, "comma-separated feature list");
  mcmc.add(sweep);
  add_format(sweep);
  sweep->add_option("--out", out_dir, "output directory")->capture_default_str();
  add_config(sweep);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = splice_config(app, args);
    std::reverse(args.begin(), args.end());
    app.parse(args);

    const fs::path out(out_dir);
    const ar_format fmt = kFormats.at(format);

    if (*ingest) {
      Corpus c(corpus_dir);
      ar_source_counts n;
      check(ar_corpus_counts(c.h, &n));
      char* start = nullptr;
      char* end = nullptr;
      check(ar_corpus_range(c.h, &start, &end));
      std::ostringstream s;
      s << "crashes: " << n.crashes << "\n"
        << "bluetooth: " << n.travel_times << "\n"
        << "volumes: " << n.volumes << "\n"
        << "phases: " << n.phases << "\n"
        << "weather: " << n.weather << "\n"
        << "segments: " << n.segments << "\n"
        << "range: " << take(start) << " .. " << take(end) << "\n";
      std::cout << s.str();
      if (ingest->count("--out")) write_text(out / "ingest.txt", s.str());
    } else if (*match) {
      Corpus c(corpus_dir);
      ar_dataset* ds = nullptr;
      check(ar_dataset_build(c.h, ratio, features.c_str(), seed, &ds));
      ar_dataset_info info;
      ar_dataset_info_get(ds, &info);
      const fs::path csv = out / "dataset.csv";
      const ar_status s = ar_dataset_save(ds, csv.string().c_str());
      ar_dataset_free(ds);
      check(s);
      std::cout << "strata: " << info.n_strata << "\n"
                << "observations: " << info.n_observations << "\n"
                << "dropped crashes: " << info.dropped_crashes << "\n"
                << "wrote " << csv.string() << "\n";
    } else if (*fit) {
      Dataset ds(dataset_path);
      Fit f(ds, kModels.at(model), kGroupings.at(grouping), mcmc.config());
      f.print_warnings(model.c_str());
      const fs::path summary = out / (std::string("summary") + extension(fmt));
      check(ar_fit_write_summary(f.h, fmt, summary.string().c_str()));
      check(ar_fit_write_coefficients(f.h, (out / "coefficients.txt").string().c_str()));
      check(ar_fit_write_roc(f.h, (out / "roc.csv").string().c_str()));
      if (draws) check(ar_fit_write_draws(f.h, (out / "draws.csv").string().c_str()));
      char* text = nullptr;
      check(ar_fit_render(f.h, fmt, &text));
      std::cout << take(text);
    } else if (*compare) {
      Dataset ds(dataset_path);
      const ar_mcmc_config cfg = mcmc.config();
      const ar_grouping g = kGroupings.at(grouping);
      Fit cond(ds, AR_MODEL_CONDITIONAL, g, cfg);
      Fit logit(ds, AR_MODEL_LOGISTIC, g, cfg);
      Fit ranef(ds, AR_MODEL_RANEF, g, cfg);
      cond.print_warnings("conditional");
      logit.print_warnings("logistic");
      ranef.print_warnings("ranef");
      const ar_fit* all[] = {cond.h, logit.h, ranef.h};
      char* text = nullptr;
      check(ar_compare_render(all, 3, fmt, &text));
      const std::string report = take(text);
      write_text(out / (std::string("comparison") + extension(fmt)), report);
      std::cout << report;
    } else if (*score) {
      Dataset ds(dataset_path);
      double auc = 0.0;
      const std::string scores = (out / "scores.csv").string();
      const std::string roc = (out / "roc.csv").string();
      fs::create_directories(out);
      check(ar_score(coefficients.c_str(), ds.h, scores.c_str(), roc.c_str(), &auc));
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", auc);
      std::cout << "auc: " << buf << "\n"
                << "wrote " << scores << " and " << roc << "\n";
    } else if (*simulate) {
      sim.mode = sim_mode == "corpus" ? AR_SIM_CORPUS : AR_SIM_MATCHED;
      sim.with_phases = phases ? 1 : 0;
      sim.features = features.empty() ? nullptr : features.c_str();
      sim.true_beta = true_beta.empty() ? nullptr : true_beta.c_str();
      check(ar_simulate(&sim, out.string().c_str()));
      std::cout << "wrote " << sim_mode << " simulation to " << out.string() << "\n";
    } else if (*sweep) {
      const auto [from, to] = parse_ratio_range(ratios);
      if (from < 1 || to > 10 || from > to) {
        throw UsageError("--ratios must lie within 1..10 with A <= B");
      }
      Corpus c(corpus_dir);
      const ar_mcmc_config cfg = mcmc.config();
      char* text = nullptr;
      check(ar_ratio_sweep(c.h, from, to, features.c_str(), &cfg, cfg.seed, fmt,
                           nullptr, &text));
      const std::string report = take(text);
      write_text(out / (std::string("sweep") + extension(fmt)), report);
      std::cout << report;
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
