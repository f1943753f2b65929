// src/experiment.cc

// Copyright 2026  The MLSD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "mlsd/experiment.h"

#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>

#include "mlsd/error.h"
#include "mlsd/rng.h"

namespace mlsd {

const char *regime_name(Regime r) {
  switch (r) {
    case Regime::Standard: return "standard";
    case Regime::RandomFewShot: return "random";
    case Regime::MlsdFewShot: return "mlsd";
  }
  return "?";
}

Regime parse_regime(std::string_view name) {
  if (name == "standard") return Regime::Standard;
  if (name == "random") return Regime::RandomFewShot;
  if (name == "mlsd") return Regime::MlsdFewShot;
  throw Error("BAD_REGIME", "unknown regime '" + std::string(name) + "'");
}

const RegimeSummary *ExperimentReport::summary(Regime r) const {
  for (const auto &s : summaries)
    if (s.regime == r) return &s;
  return nullptr;
}

std::vector<uint64_t> random_shots(const Dataset &pool, size_t n, uint64_t seed) {
  std::vector<std::vector<uint64_t>> by_class(num_classes(pool.scheme()));
  for (const auto &ex : pool) by_class[ex.stance.index()].push_back(ex.id);
  std::vector<uint64_t> out;
  for (size_t c = 0; c < by_class.size(); ++c) {
    Rng rng(mix_seed(seed ^ mix_seed(0x72616e64ULL + c)));
    auto &ids = by_class[c];
    // Partial Fisher-Yates: the first k slots become a uniform k-subset.
    const size_t k = std::min(n, ids.size());
    for (size_t i = 0; i < k; ++i) std::swap(ids[i], ids[i + rng.uniform_index(ids.size() - i)]);
    out.insert(out.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return out;
}

ShotProvider confidence_shot_provider(const Dataset &dest_train, ConfidenceProvider confidences,
                                      Diversity diversity, ProjectionProvider projections) {
  if (diversity != Diversity::Off && !projections)
    throw Error("BAD_CONFIG", "diversity selection needs projected vectors");
  return [&dest_train, confidences, diversity, projections](uint64_t seed, const std::vector<size_t> &shots) {
    const auto scores = confidences(seed);
    std::map<uint64_t, std::vector<float>> projected;
    if (diversity != Diversity::Off) projected = projections(seed);
    std::map<size_t, std::vector<uint64_t>> out;
    for (size_t n : shots)
      out[n] = select_top_n(dest_train, scores, {n, diversity, seed},
                            diversity == Diversity::Off ? nullptr : &projected)
                   .all_ids();
    return out;
  };
}

namespace {

struct SeedOutcome {
  std::vector<EvalResult> runs;
};

uint64_t derive(uint64_t seed, uint64_t salt) { return mix_seed(seed ^ mix_seed(salt)); }

SeedOutcome run_seed(const ExperimentSpec &spec, uint64_t seed, const StanceData &source,
                     const StanceData &test) {
  SeedOutcome out;
  const auto coi = classes_of_interest(spec.dest_train.scheme());
  const size_t k = num_classes(spec.dest_train.scheme());

  StanceConfig cfg = spec.stance;
  cfg.train.seed = derive(seed, 1);
  const StanceClassifierParams base = train_stance(source, cfg);

  auto evaluate = [&](const StanceClassifierParams &model) {
    return macro_f1(predict_stance(model, test.x), test.y, coi, k);
  };

  std::map<size_t, std::vector<uint64_t>> mlsd_ids;
  bool selected = false;

  for (Regime regime : spec.regimes) {
    if (regime == Regime::Standard) {
      out.runs.push_back({regime, seed, 0, 0, evaluate(base)});
      continue;
    }
    for (size_t n : spec.shots) {
      std::vector<uint64_t> ids;
      if (regime == Regime::RandomFewShot) {
        ids = random_shots(spec.dest_train, n, derive(seed, 2 + n));
      } else {
        if (!selected) {
          if (!spec.mlsd_shots)
            throw Error("MISSING_CHECKPOINT", "MLSD regime requested without a trained metric model");
          mlsd_ids = spec.mlsd_shots(seed, spec.shots);
          selected = true;
        }
        auto it = mlsd_ids.find(n);
        if (it == mlsd_ids.end())
          throw Error("MISSING_SELECTION", "no MLSD selection for n=" + std::to_string(n));
        ids = it->second;
      }
      const StanceData shots = make_stance_data(spec.dest_train, *spec.store, ids);
      const auto tuned = finetune(base, shots, cfg, derive(seed, 1000 + n));
      out.runs.push_back({regime, seed, n, ids.size(), evaluate(tuned)});
    }
  }
  return out;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec &spec, Exec exec) {
  if (spec.store == nullptr) throw Error("BAD_CONFIG", "experiment has no embedding store");
  if (spec.seeds.empty()) throw Error("BAD_CONFIG", "experiment has no seeds");
  if (spec.source_train.scheme() != spec.dest_train.scheme() ||
      spec.dest_test.scheme() != spec.dest_train.scheme())
    throw Error("SCHEME_MISMATCH", "source and destination use different label schemes");
  if (spec.dest_test.empty()) throw Error("EMPTY_DESTINATION", "destination test split is empty");

  const StanceData source = make_stance_data(spec.source_train, *spec.store);
  const StanceData test = make_stance_data(spec.dest_test, *spec.store);

  std::vector<SeedOutcome> outcomes(spec.seeds.size());
  std::vector<std::exception_ptr> errors(spec.seeds.size());
  const int64_t n_seeds = static_cast<int64_t>(spec.seeds.size());
  auto one = [&](int64_t i) {
    try {
      outcomes[i] = run_seed(spec, spec.seeds[i], source, test);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int64_t i = 0; i < n_seeds; ++i) one(i);
  } else {
    for (int64_t i = 0; i < n_seeds; ++i) one(i);
  }
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);

  ExperimentReport r;
  r.source_tag = spec.source_tag;
  r.destination_tag = spec.destination_tag;
  r.classifier_name = spec.classifier_name;
  r.scheme = spec.dest_train.scheme();
  r.seeds = spec.seeds;
  r.shots = spec.shots;
  for (auto &o : outcomes)
    for (auto &run : o.runs) r.runs.push_back(std::move(run));

  for (Regime regime : spec.regimes) {
    RegimeSummary s;
    s.regime = regime;
    if (regime == Regime::Standard) {
      for (const auto &run : r.runs)
        if (run.regime == regime) s.per_seed.push_back(run.metrics.macro_f1);
    } else {
      for (size_t n : spec.shots) {
        ShotSummary shot;
        shot.n = n;
        for (const auto &run : r.runs)
          if (run.regime == regime && run.n == n) shot.scores.push_back(run.metrics.macro_f1);
        shot.mean = mean(shot.scores);
        shot.stddev = sample_stddev(shot.scores);
        s.per_n.push_back(std::move(shot));
      }
      for (size_t i = 0; i < spec.seeds.size(); ++i) {
        double acc = 0;
        for (const auto &shot : s.per_n) acc += shot.scores[i];
        s.per_seed.push_back(acc / static_cast<double>(s.per_n.size()));
      }
    }
    s.mean = mean(s.per_seed);
    s.stddev = sample_stddev(s.per_seed);
    r.summaries.push_back(std::move(s));
  }

  const RegimeSummary *mlsd = r.summary(Regime::MlsdFewShot);
  const RegimeSummary *rnd = r.summary(Regime::RandomFewShot);
  if (mlsd && rnd && mlsd->per_seed.size() >= 2)
    r.significance = paired_t_test(mlsd->per_seed, rnd->per_seed);
  return r;
}

nlohmann::json to_json(const ExperimentReport &r) {
  using nlohmann::json;
  json runs = json::array();
  for (const auto &run : r.runs) {
    json per_class = json::array();
    for (const auto &c : run.metrics.per_class)
      per_class.push_back({{"class", class_name(r.scheme, c.cls)},
                           {"tp", c.tp},
                           {"fp", c.fp},
                           {"fn", c.fn},
                           {"precision", c.precision},
                           {"recall", c.recall},
                           {"f1", c.f1}});
    runs.push_back({{"regime", regime_name(run.regime)},
                    {"seed", run.seed},
                    {"n", run.n},
                    {"shots_used", run.shots_used},
                    {"macro_f1", run.metrics.macro_f1},
                    {"confusion", run.metrics.confusion},
                    {"per_class", per_class}});
  }
  json summaries = json::array();
  for (const auto &s : r.summaries) {
    json per_n = json::array();
    for (const auto &shot : s.per_n)
      per_n.push_back({{"n", shot.n}, {"mean", shot.mean}, {"std", shot.stddev}, {"scores", shot.scores}});
    summaries.push_back({{"regime", regime_name(s.regime)},
                         {"mean", s.mean},
                         {"std", s.stddev},
                         {"per_seed", s.per_seed},
                         {"per_n", per_n}});
  }
  json classes = json::array();
  for (size_t c : classes_of_interest(r.scheme)) classes.push_back(class_name(r.scheme, c));
  json out = {{"source", r.source_tag},
              {"destination", r.destination_tag},
              {"classifier", r.classifier_name},
              {"scheme", scheme_name(r.scheme)},
              {"classes_of_interest", classes},
              {"seeds", r.seeds},
              {"shots", r.shots},
              {"summaries", summaries},
              {"runs", runs},
              {"significance", nullptr}};
  if (r.significance) {
    const auto &t = *r.significance;
    // JSON has no infinity; a zero-variance result is carried by the flag.
    out["significance"] = {{"test", "paired-t"},
                           {"comparison", "mlsd-vs-random"},
                           {"t", std::isfinite(t.t) ? json(t.t) : json(nullptr)},
                           {"p", t.p},
                           {"df", t.df},
                           {"mean_difference", t.mean_difference},
                           {"zero_variance", t.zero_variance}};
  }
  return out;
}

ExperimentReport report_from_json(const nlohmann::json &j) {
  ExperimentReport r;
  try {
    r.source_tag = j.at("source").get<std::string>();
    r.destination_tag = j.at("destination").get<std::string>();
    r.classifier_name = j.at("classifier").get<std::string>();
    r.scheme = parse_scheme(j.at("scheme").get<std::string>());
    r.seeds = j.at("seeds").get<std::vector<uint64_t>>();
    r.shots = j.at("shots").get<std::vector<size_t>>();
    const auto coi = classes_of_interest(r.scheme);
    for (const auto &run : j.at("runs")) {
      EvalResult e;
      e.regime = parse_regime(run.at("regime").get<std::string>());
      e.seed = run.at("seed").get<uint64_t>();
      e.n = run.at("n").get<size_t>();
      e.shots_used = run.at("shots_used").get<size_t>();
      e.metrics.num_classes = num_classes(r.scheme);
      e.metrics.classes_of_interest = coi;
      e.metrics.confusion = run.at("confusion").get<std::vector<std::vector<uint64_t>>>();
      e.metrics.macro_f1 = run.at("macro_f1").get<double>();
      for (const auto &c : run.at("per_class")) {
        ClassScore cs;
        cs.cls = StanceLabel::parse(r.scheme, c.at("class").get<std::string>()).index();
        cs.tp = c.at("tp").get<uint64_t>();
        cs.fp = c.at("fp").get<uint64_t>();
        cs.fn = c.at("fn").get<uint64_t>();
        cs.precision = c.at("precision").get<double>();
        cs.recall = c.at("recall").get<double>();
        cs.f1 = c.at("f1").get<double>();
        e.metrics.per_class.push_back(cs);
      }
      r.runs.push_back(std::move(e));
    }
    for (const auto &s : j.at("summaries")) {
      RegimeSummary rs;
      rs.regime = parse_regime(s.at("regime").get<std::string>());
      rs.mean = s.at("mean").get<double>();
      rs.stddev = s.at("std").get<double>();
      rs.per_seed = s.at("per_seed").get<std::vector<double>>();
      for (const auto &shot : s.at("per_n"))
        rs.per_n.push_back({shot.at("n").get<size_t>(), shot.at("scores").get<std::vector<double>>(),
                            shot.at("mean").get<double>(), shot.at("std").get<double>()});
      r.summaries.push_back(std::move(rs));
    }
    const auto &sig = j.at("significance");
    if (!sig.is_null()) {
      TTestResult t;
      t.p = sig.at("p").get<double>();
      t.df = sig.at("df").get<double>();
      t.mean_difference = sig.at("mean_difference").get<double>();
      t.zero_variance = sig.at("zero_variance").get<bool>();
      t.t = sig.at("t").is_null() ? std::copysign(INFINITY, t.mean_difference) : sig.at("t").get<double>();
      r.significance = t;
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error("BAD_REPORT", std::string("report does not parse: ") + e.what());
  }
  return r;
}

namespace {

std::string cell(const RegimeSummary *s) {
  if (!s) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f +- %.2f", 100.0 * s->mean, 100.0 * s->stddev);
  return buf;
}

std::string cell(const ShotSummary *s) {
  if (!s) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f +- %.2f", 100.0 * s->mean, 100.0 * s->stddev);
  return buf;
}

const ShotSummary *shot_of(const RegimeSummary *s, size_t n) {
  if (!s) return nullptr;
  for (const auto &shot : s->per_n)
    if (shot.n == n) return &shot;
  return nullptr;
}

}  // namespace

std::string format_report(const ExperimentReport &r) {
  std::ostringstream out;
  const RegimeSummary *std_s = r.summary(Regime::Standard);
  const RegimeSummary *rnd = r.summary(Regime::RandomFewShot);
  const RegimeSummary *mlsd = r.summary(Regime::MlsdFewShot);
  char line[256];
  out << "Macro-F1 (%), " << r.source_tag << " -> " << r.destination_tag << ", mean +- std over "
      << r.seeds.size() << " seed(s); few-shot columns averaged over n in {";
  for (size_t i = 0; i < r.shots.size(); ++i) out << (i ? "," : "") << r.shots[i];
  out << "}\n";
  std::snprintf(line, sizeof line, "%-14s %-16s %-16s %-16s\n", "Classifier", "Standard", "Random", "MLSD");
  out << line;
  std::snprintf(line, sizeof line, "%-14s %-16s %-16s %-16s\n", r.classifier_name.c_str(),
                cell(std_s).c_str(), cell(rnd).c_str(), cell(mlsd).c_str());
  out << line;
  for (size_t n : r.shots) {
    const std::string label = "  n=" + std::to_string(n);
    std::snprintf(line, sizeof line, "%-14s %-16s %-16s %-16s\n", label.c_str(), "",
                  cell(shot_of(rnd, n)).c_str(), cell(shot_of(mlsd, n)).c_str());
    out << line;
  }
  if (r.significance) {
    const auto &t = *r.significance;
    if (t.zero_variance)
      std::snprintf(line, sizeof line,
                    "Significance (MLSD vs Random, paired t-test, df=%.0f): constant difference %.4f, p < 1e-12\n",
                    t.df, t.mean_difference);
    else
      std::snprintf(line, sizeof line,
                    "Significance (MLSD vs Random, paired t-test, df=%.0f): t = %.4f, p = %.4g%s\n", t.df,
                    t.t, t.p, t.p < 0.05 ? " (p < 0.05)" : "");
    out << line;
  } else {
    out << "Significance: not computed (needs MLSD and Random over >= 2 seeds)\n";
  }
  return out.str();
}

}  // namespace mlsd
