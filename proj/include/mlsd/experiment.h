// include/mlsd/experiment.h

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

#ifndef MLSD_EXPERIMENT_H_
#define MLSD_EXPERIMENT_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlsd/corpus.h"
#include "mlsd/embed_store.h"
#include "mlsd/selector.h"
#include "mlsd/stance.h"
#include "mlsd/stats.h"

namespace mlsd {

enum class Regime { Standard, RandomFewShot, MlsdFewShot };
const char *regime_name(Regime r);
Regime parse_regime(std::string_view name);

/// Five fixed seeds used when an experiment does not list its own.
inline const std::vector<uint64_t> kDefaultSeeds = {13, 42, 1234, 2024, 31337};

/// Per-seed P(source) scores for destination-train ids.
using ConfidenceProvider = std::function<std::map<uint64_t, double>(uint64_t seed)>;
/// Per-seed projected destination-train vectors (diversity selection only).
using ProjectionProvider = std::function<std::map<uint64_t, std::vector<float>>(uint64_t seed)>;
/// Per-seed MLSD few-shot ids for each requested shots-per-class value.
using ShotProvider =
    std::function<std::map<size_t, std::vector<uint64_t>>(uint64_t seed, const std::vector<size_t> &shots)>;

/// Shot provider that scores the destination pool once per seed and applies
/// select_top_n for every n.  `dest_train` must outlive the provider.
ShotProvider confidence_shot_provider(const Dataset &dest_train, ConfidenceProvider confidences,
                                      Diversity diversity = Diversity::Off,
                                      ProjectionProvider projections = nullptr);

struct ExperimentSpec {
  std::string source_tag;
  std::string destination_tag;
  std::string classifier_name = "linear";
  Dataset source_train{Scheme::ThreeWay, {}};
  Dataset dest_train{Scheme::ThreeWay, {}};
  Dataset dest_test{Scheme::ThreeWay, {}};
  const EmbeddingStore *store = nullptr;  // embeds every id above

  std::vector<Regime> regimes = {Regime::Standard, Regime::RandomFewShot, Regime::MlsdFewShot};
  std::vector<size_t> shots = {5, 10, 15};
  std::vector<uint64_t> seeds = kDefaultSeeds;
  StanceConfig stance;
  ShotProvider mlsd_shots;  // required for MlsdFewShot
};

struct EvalResult {
  Regime regime = Regime::Standard;
  uint64_t seed = 0;
  size_t n = 0;           // shots per class; 0 for Standard
  size_t shots_used = 0;  // total fine-tuning examples
  F1Report metrics;
};

struct ShotSummary {
  size_t n = 0;
  std::vector<double> scores;  // per seed, seed order
  double mean = 0;
  double stddev = 0;
};

struct RegimeSummary {
  Regime regime = Regime::Standard;
  /// Per seed: the macro-F1 (Standard) or its mean over the shot settings.
  std::vector<double> per_seed;
  double mean = 0;
  double stddev = 0;
  std::vector<ShotSummary> per_n;
};

struct ExperimentReport {
  std::string source_tag;
  std::string destination_tag;
  std::string classifier_name;
  Scheme scheme = Scheme::ThreeWay;
  std::vector<uint64_t> seeds;
  std::vector<size_t> shots;
  std::vector<EvalResult> runs;
  std::vector<RegimeSummary> summaries;
  /// MLSD vs Random over per-seed scores, when both ran on >= 2 seeds.
  std::optional<TTestResult> significance;

  const RegimeSummary *summary(Regime r) const;
};

/// Random few-shot draw: min(n, |class|) uniformly per class from `pool`.
std::vector<uint64_t> random_shots(const Dataset &pool, size_t n, uint64_t seed);

/// Runs every regime for every seed.  Within a seed all regimes fine-tune the
/// same source-trained classifier.  Seeds may run concurrently (exec ==
/// Parallel); results are ordered by seed regardless.  Any failing seed
/// aborts the experiment.
ExperimentReport run_experiment(const ExperimentSpec &spec, Exec exec = Exec::Serial);

nlohmann::json to_json(const ExperimentReport &r);
ExperimentReport report_from_json(const nlohmann::json &j);
/// Human-readable table: Standard / Random / MLSD columns per classifier,
/// per-n rows, and the significance line.
std::string format_report(const ExperimentReport &r);

}  // namespace mlsd

#endif  // MLSD_EXPERIMENT_H_
