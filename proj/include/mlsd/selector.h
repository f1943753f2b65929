// include/mlsd/selector.h

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

#ifndef MLSD_SELECTOR_H_
#define MLSD_SELECTOR_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlsd/corpus.h"
#include "mlsd/matrix.h"

namespace mlsd {

enum class Diversity { Off, GreedyMaxMin };

struct SelectionConfig {
  size_t n = 5;  // shots per stance class
  Diversity diversity = Diversity::Off;
  uint64_t seed = 0;
};

struct ScoredId {
  uint64_t id = 0;
  double confidence = 0;
  bool operator==(const ScoredId &) const = default;
};

struct SelectionResult {
  Scheme scheme = Scheme::ThreeWay;
  /// Indexed by class; each list sorted by (-confidence, id).
  std::vector<std::vector<ScoredId>> per_class;
  SelectionConfig config;
  std::string checkpoint;  // provenance tag of the scoring model

  std::vector<uint64_t> all_ids() const;
  size_t total() const;
};

/// Per stance class c, the min(n, |D_c|) examples with the highest confidence
/// (ties to the lower id).  With GreedyMaxMin the candidates are the top 3n
/// by confidence, picked greedily to maximize the minimum pairwise distance
/// between `projected` vectors (id -> row of `projected`), starting from the
/// most confident.
SelectionResult select_top_n(const Dataset &dest_train, const std::map<uint64_t, double> &confidences,
                             const SelectionConfig &cfg,
                             const std::map<uint64_t, std::vector<float>> *projected = nullptr);

/// `{"classes": {NAME: [{id, confidence}...]}, "config": {...}, "checkpoint": "..."}`
nlohmann::json to_json(const SelectionResult &r);
SelectionResult selection_from_json(const nlohmann::json &j);

}  // namespace mlsd

#endif  // MLSD_SELECTOR_H_
