// include/mlsd/pipeline.h

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

#ifndef MLSD_PIPELINE_H_
#define MLSD_PIPELINE_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlsd/corpus.h"
#include "mlsd/experiment.h"
#include "mlsd/nn.h"
#include "mlsd/selector.h"
#include "mlsd/triplet_miner.h"

namespace mlsd {

/// One input corpus file.
struct CorpusFile {
  std::filesystem::path path;
  CorpusFormat format = CorpusFormat::GenericCsv;
  Split split = Split::Train;  // used when the file has no split column
};

/// How to materialize the source, destination or noise data.
struct RoleConfig {
  std::string target;
  std::vector<CorpusFile> files;
  std::vector<std::string> members;  // non-empty: concatenate these tags as `target`
  std::optional<std::pair<size_t, uint64_t>> subsample;  // balanced (size, seed) of the train split
  std::optional<std::pair<double, uint64_t>> holdout;    // move (fraction, seed) of train to test
};

struct ExperimentConfig {
  std::filesystem::path config_path;
  std::filesystem::path output_dir;
  std::string config_hash;  // SHA-256 of the canonical JSON
  nlohmann::json raw;

  RoleConfig source, destination, noise;
  std::filesystem::path train_embeddings;
  std::optional<std::filesystem::path> mining_embeddings;
  MinerConfig miner;
  TrainConfig metric;
  TrainConfig head;
  std::vector<size_t> shots = {5, 10, 15};
  Diversity diversity = Diversity::Off;
  StanceConfig stance;
  std::string classifier_name = "linear";
  std::vector<Regime> regimes = {Regime::Standard, Regime::RandomFewShot, Regime::MlsdFewShot};
  std::vector<uint64_t> seeds = kDefaultSeeds;
};

/// Environment variable that, when set, is the root for relative output_dir.
inline constexpr const char *kOutputRootEnv = "MLSD_OUTPUT_ROOT";

struct Diagnostic {
  std::string code;
  std::string message;
};

/// Parses a config file.  Relative paths are resolved against the config's
/// directory.  Throws Error("BAD_CONFIG" / "CONFIG_PARSE") on schema errors.
ExperimentConfig load_config(const std::filesystem::path &path);

/// Schema, path, tag-distinctness and scheme checks.  Empty means clean.
std::vector<Diagnostic> validate_config(const std::filesystem::path &path);

enum class Stage { Mine, TrainMetric, Select, Evaluate, All };
Stage parse_stage(std::string_view name);
const char *stage_name(Stage s);

struct StageOutcome {
  Stage stage;
  bool cache_hit = false;
  std::vector<std::filesystem::path> outputs;
};

/// Runs one stage (or all four in order).  Stages whose inputs are unchanged
/// since their last run are skipped.  Errors: MISSING_TRIPLETS /
/// MISSING_CHECKPOINT / MISSING_SELECTION when a prerequisite has not been
/// produced, STALE_ARTIFACT when it was produced from different inputs or
/// has been modified.
std::vector<StageOutcome> run_stage(const ExperimentConfig &cfg, Stage stage, Exec exec = Exec::Parallel);

/// Datasets of one role after filtering, concatenation, subsampling and
/// hold-out.
Dataset load_role(const RoleConfig &role);

std::string sha256_hex(const std::string &bytes);
std::string sha256_file(const std::filesystem::path &path);

}  // namespace mlsd

#endif  // MLSD_PIPELINE_H_
