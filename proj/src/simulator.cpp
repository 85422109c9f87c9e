// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "arterial_risk/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "arterial_risk/error.hpp"
#include "arterial_risk/random.hpp"

namespace arisk {

FeatureDistribution FeatureDistribution::normal(double mean, double sd) {
  return {Kind::kNormal, mean, sd, false};
}
FeatureDistribution FeatureDistribution::poisson(double rate) {
  return {Kind::kPoisson, rate, 0.0, false};
}
FeatureDistribution FeatureDistribution::bernoulli(double p) {
  return {Kind::kBernoulli, p, 0.0, false};
}

std::string FeatureDistribution::describe() const {
  std::string s;
  switch (kind) {
    case Kind::kNormal:
      s = "normal(" + format_double(a) + "," + format_double(b) + ")";
      break;
    case Kind::kPoisson: s = "poisson(" + format_double(a) + ")"; break;
    case Kind::kBernoulli: s = "bernoulli(" + format_double(a) + ")"; break;
  }
  if (stratum_shared) s += " shared";
  return s;
}

FeatureDistribution default_feature_distribution(const std::string& name) {
  const FeatureSpec spec = FeatureSpec::parse(std::vector<std::string>{name});
  switch (spec.features.front().base) {
    case FeatureBase::kAvgSpeed: return FeatureDistribution::normal(40.0, 10.0);
    case FeatureBase::kCvSpeed: return FeatureDistribution::normal(0.15, 0.05);
    case FeatureBase::kUpVol:
    case FeatureBase::kDownVol: return FeatureDistribution::poisson(100.0);
    case FeatureBase::kGreenRatio: return FeatureDistribution::normal(0.45, 0.1);
    case FeatureBase::kRainy: return FeatureDistribution::bernoulli(0.3);
    case FeatureBase::kVisibility: return FeatureDistribution::normal(8.0, 2.0);
    case FeatureBase::kPrecipitation: return FeatureDistribution::poisson(0.05);
  }
  return FeatureDistribution::normal(0.0, 1.0);
}

void SimConfig::validate() const {
  auto bad = [](const std::string& why) {
    fail(ErrorKind::kInvalidConfig, "InvalidConfig: " + why);
  };
  if (true_beta.empty()) bad("true_beta is empty");
  if (feature_names.size() != true_beta.size()) {
    bad("feature_names and true_beta differ in length");
  }
  for (double b : true_beta) {
    if (!std::isfinite(b)) bad("true_beta must be finite");
  }
  if (mode == SimMode::kMatched) {
    if (n_strata < 1) bad("n_strata must be >= 1");
    if (m < 1) bad("m must be >= 1");
    if (feature_model.size() != true_beta.size()) {
      bad("feature_model and true_beta differ in length");
    }
    for (const auto& f : feature_model) {
      const bool ok =
          (f.kind == FeatureDistribution::Kind::kNormal && f.b >= 0 &&
           std::isfinite(f.a)) ||
          (f.kind == FeatureDistribution::Kind::kPoisson && f.a >= 0) ||
          (f.kind == FeatureDistribution::Kind::kBernoulli && f.a >= 0 &&
           f.a <= 1);
      if (!ok) bad("invalid feature distribution " + f.describe());
    }
  } else {
    if (n_segments < 1) bad("n_segments must be >= 1");
    if (weeks < 1) bad("weeks must be >= 1");
    if (!(detection_rate >= 0)) bad("detection_rate must be >= 0");
    if (start % kDay != 0) bad("start must be midnight UTC");
    try {
      FeatureSpec::parse(feature_names);
    } catch (const Error& e) {
      bad(e.what());
    }
  }
}

namespace {

double draw(const FeatureDistribution& f, Rng& rng) {
  switch (f.kind) {
    case FeatureDistribution::Kind::kNormal:
      return std::normal_distribution<double>(f.a, f.b)(rng);
    case FeatureDistribution::Kind::kPoisson:
      return static_cast<double>(std::poisson_distribution<long>(f.a)(rng));
    case FeatureDistribution::Kind::kBernoulli:
      return std::bernoulli_distribution(f.a)(rng) ? 1.0 : 0.0;
  }
  return 0.0;
}

KeyValues base_truth(const SimConfig& c) {
  KeyValues kv = {
      {"mode", c.mode == SimMode::kMatched ? "matched" : "corpus"},
      {"seed", std::to_string(c.seed)},
      {"k", std::to_string(c.k())},
  };
  for (std::size_t u = 0; u < c.k(); ++u) {
    kv.emplace_back("true_beta." + c.feature_names[u],
                    format_double(c.true_beta[u]));
  }
  return kv;
}

}  // namespace

SimResult simulate_matched(const SimConfig& config) {
  SimConfig c = config;
  c.mode = SimMode::kMatched;
  c.validate();

  MatchedDataset ds;
  ds.m = c.m;
  ds.k = c.k();
  ds.feature_names = c.feature_names;
  ds.seed = c.seed;

  const std::size_t members = c.m + 1;
  std::vector<std::vector<double>> x(members, std::vector<double>(c.k()));
  std::vector<double> eta(members);
  std::size_t case_first = 0;

  for (std::size_t i = 0; i < c.n_strata; ++i) {
    Rng rng(substream_seed(c.seed, i));
    for (std::size_t u = 0; u < c.k(); ++u) {
      const auto& f = c.feature_model[u];
      if (f.stratum_shared) {
        const double v = draw(f, rng);
        for (auto& row : x) row[u] = v;
      } else {
        for (auto& row : x) row[u] = draw(f, rng);
      }
    }
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < members; ++j) {
      eta[j] = 0.0;
      for (std::size_t u = 0; u < c.k(); ++u) eta[j] += c.true_beta[u] * x[j][u];
      top = std::max(top, eta[j]);
    }
    double z = 0.0;
    for (auto& e : eta) {
      e = std::exp(e - top);
      z += e;
    }
    double target = std::uniform_real_distribution<double>(0.0, z)(rng);
    std::size_t chosen = members - 1;
    for (std::size_t j = 0; j < members; ++j) {
      if (target < eta[j]) {
        chosen = j;
        break;
      }
      target -= eta[j];
    }
    if (chosen == 0) ++case_first;

    Stratum s;
    s.stratum_id = static_cast<int>(i) + 1;
    const Instant anchor0 = c.start +
                            static_cast<Instant>(i % 1440) * kMinute +
                            17 * kHour % kDay;
    s.key = MatchKey::of("sim-" + std::to_string(i / 1440 + 1), anchor0);
    s.crash_id = "S" + std::to_string(i + 1);
    for (std::size_t j = 0, slot = 0; j < members; ++j) {
      Observation o;
      o.stratum_id = s.stratum_id;
      o.x = x[j];
      if (j == chosen) {
        o.is_crash = 1;
        o.anchor = anchor0;
        s.case_obs = std::move(o);
      } else {
        o.is_crash = 0;
        o.anchor = anchor0 + static_cast<Instant>(++slot) * kWeek;
        s.controls.push_back(std::move(o));
      }
    }
    ds.strata.push_back(std::move(s));
  }

  SimResult r;
  r.truth = base_truth(c);
  r.truth.emplace_back("n_strata", std::to_string(c.n_strata));
  r.truth.emplace_back("m", std::to_string(c.m));
  for (std::size_t u = 0; u < c.k(); ++u) {
    r.truth.emplace_back("feature_model." + c.feature_names[u],
                         c.feature_model[u].describe());
  }
  r.truth.emplace_back("case_selection", "softmax(true_beta . x) per stratum");
  r.truth.emplace_back("strata_with_case_in_first_draw",
                       std::to_string(case_first));
  r.dataset = std::move(ds);
  return r;
}

namespace {

constexpr const char* kStation = "MCO";

std::string padded(const char* prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%02zu", prefix, n);
  return buf;
}

// Smooth weekday demand profile in [0.3, 1.3], peaking near 08:00 and 17:30.
double demand_profile(Instant t) {
  const double h = static_cast<double>(t - floor_to(t, kDay)) / 3600.0;
  auto bump = [](double x, double mu, double sd) {
    return std::exp(-0.5 * (x - mu) * (x - mu) / (sd * sd));
  };
  const double daytime = 1.0 / (1.0 + std::exp(-(h - 6.5))) -
                         1.0 / (1.0 + std::exp(-(h - 21.0)));
  return 0.3 + 0.6 * daytime + 0.4 * bump(h, 8.0, 1.0) + 0.4 * bump(h, 17.5, 1.2);
}

}  // namespace

SimResult simulate_corpus(const SimConfig& config) {
  SimConfig c = config;
  c.mode = SimMode::kCorpus;
  c.validate();
  const FeatureSpec spec = FeatureSpec::parse(c.feature_names);

  RawCorpus corpus;
  const Instant begin = c.start;
  const Instant end = begin + static_cast<Instant>(c.weeks) * kWeek;

  for (std::size_t s = 1; s <= c.n_segments; ++s) {
    Rng rng(substream_seed(c.seed, 1000 + s));
    SegmentMeta meta;
    meta.segment_id = padded("SEG", s);
    meta.length = std::round(
        std::uniform_real_distribution<double>(400.0, 1200.0)(rng));
    meta.upstream_intersection_id = padded("INT", s);
    meta.downstream_intersection_id = padded("INT", s + 1);
    corpus.segments.push_back(std::move(meta));
  }

  // Hourly weather: two-state Markov chain for rain.
  std::vector<int> rain_by_hour;
  {
    Rng rng(substream_seed(c.seed, 1));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    bool raining = false;
    for (Instant h = begin; h < end; h += kHour) {
      raining = unif(rng) < (raining ? 0.7 : 0.04);
      WeatherRecord w;
      w.station_id = kStation;
      w.hour_start = h;
      if (raining) {
        const double amount = std::exponential_distribution<double>(12.0)(rng);
        w.precipitation = std::max(0.01, std::round(amount * 100.0) / 100.0);
        w.visibility = std::round((2.0 + 6.0 * unif(rng)) * 10.0) / 10.0;
        w.rainy = 1;
      } else {
        w.precipitation = 0.0;
        w.visibility = 10.0;
        w.rainy = 0;
      }
      rain_by_hour.push_back(w.rainy);
      corpus.weather.push_back(w);
    }
  }
  auto rainy_at = [&](Instant t) {
    return rain_by_hour[static_cast<std::size_t>((t - begin) / kHour)];
  };

  // Volumes at every intersection along the corridor.
  for (std::size_t s = 1; s <= c.n_segments + 1; ++s) {
    Rng rng(substream_seed(c.seed, 2000 + s));
    const double scale =
        std::uniform_real_distribution<double>(240.0, 360.0)(rng);
    for (Instant q = begin; q < end; q += kVolumeInterval) {
      VolumeRecord v;
      v.intersection_id = padded("INT", s);
      v.interval_start = q;
      v.approach = Approach::kAll;
      v.volume = std::poisson_distribution<long>(scale * demand_profile(q))(rng);
      corpus.volumes.push_back(std::move(v));
    }
  }

  // Bluetooth detections: Poisson count per 5 minutes around a latent mean
  // speed that dips with demand and rain and wanders as an AR(1).
  for (std::size_t s = 1; s <= c.n_segments; ++s) {
    Rng rng(substream_seed(c.seed, 3000 + s));
    const SegmentMeta& meta = corpus.segments[s - 1];
    const double free_speed =
        std::uniform_real_distribution<double>(45.0, 60.0)(rng);
    std::normal_distribution<double> noise(0.0, 3.0);
    std::poisson_distribution<int> count(c.detection_rate);
    std::uniform_int_distribution<Instant> offset(0, kSliceLength - 1);
    double ar = 0.0;
    for (Instant b = begin; b < end; b += kSliceLength) {
      ar = 0.9 * ar + noise(rng);
      const double mean_speed = std::max(
          8.0, free_speed - 15.0 * (demand_profile(b) - 0.3) -
                   6.0 * rainy_at(b) + ar);
      std::normal_distribution<double> vehicle(mean_speed, 6.0);
      const int n = count(rng);
      std::vector<TravelTimeRecord> bin;
      for (int v = 0; v < n; ++v) {
        const double speed = std::max(5.0, vehicle(rng));
        TravelTimeRecord t;
        t.segment_id = meta.segment_id;
        t.timestamp = b + offset(rng);
        t.travel_time = std::round(meta.length / (speed / 3.6) * 10.0) / 10.0;
        bin.push_back(std::move(t));
      }
      std::sort(bin.begin(), bin.end(), [](const auto& a, const auto& b2) {
        return a.timestamp < b2.timestamp;
      });
      for (auto& t : bin) corpus.travel_times.push_back(std::move(t));
    }
  }

  if (c.with_phases) {
    // Fixed 120 s cycle at each downstream intersection: phase 2 then 4.
    for (std::size_t s = 2; s <= c.n_segments + 1; ++s) {
      for (Instant t = begin; t < end; t += 120) {
        corpus.phases.push_back({padded("INT", s), "2", t, t + 55});
        corpus.phases.push_back({padded("INT", s), "4", t + 60, t + 110});
      }
    }
  }

  finalize_corpus(corpus);

  // Thinning over 5-minute candidate windows, with the crash-window guard.
  struct Placed {
    std::string segment;
    Instant t;
  };
  std::vector<Placed> placed;
  std::size_t windows = 0;
  for (std::size_t s = 1; s <= c.n_segments; ++s) {
    Rng rng(substream_seed(c.seed, 4000 + s));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<Instant> second(0, kSliceLength - 1);
    const std::string& seg = corpus.segments[s - 1].segment_id;
    Instant last_crash = std::numeric_limits<Instant>::min() / 2;
    for (Instant g = begin + kLeadWindow; g + kSliceLength <= end;
         g += kSliceLength) {
      const Instant anchor = g + second(rng);
      const double u = unif(rng);
      if (anchor - last_crash <= kLeadWindow) continue;
      auto x = extract_features(corpus, seg, anchor, spec);
      if (!x) continue;
      ++windows;
      double eta = c.crash_intercept;
      for (std::size_t v = 0; v < c.k(); ++v) eta += c.true_beta[v] * (*x)[v];
      if (u < 1.0 / (1.0 + std::exp(-eta))) {
        placed.push_back({seg, anchor});
        last_crash = anchor;
      }
    }
  }
  std::sort(placed.begin(), placed.end(), [](const auto& a, const auto& b) {
    return a.t != b.t ? a.t < b.t : a.segment < b.segment;
  });
  for (std::size_t i = 0; i < placed.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "C%04zu", i + 1);
    corpus.crashes.push_back({id, placed[i].segment, placed[i].t});
  }
  finalize_corpus(corpus);

  SimResult r;
  r.truth = base_truth(c);
  r.truth.emplace_back("crash_intercept", format_double(c.crash_intercept));
  r.truth.emplace_back("n_segments", std::to_string(c.n_segments));
  r.truth.emplace_back("weeks", std::to_string(c.weeks));
  r.truth.emplace_back("start", format_iso8601(c.start));
  r.truth.emplace_back("detection_rate", format_double(c.detection_rate));
  r.truth.emplace_back("candidate_windows", std::to_string(windows));
  r.truth.emplace_back("crashes", std::to_string(placed.size()));
  r.corpus = std::move(corpus);
  return r;
}

void write_sim_result(const SimResult& result,
                      const std::filesystem::path& dir) {
  if (result.dataset) write_dataset(*result.dataset, dir / "dataset.csv");
  if (result.corpus) write_corpus(*result.corpus, dir);
  write_file(dir / "truth.txt", render_key_values(result.truth));
}

}  // namespace arisk
