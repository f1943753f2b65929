// include/mlsd/triplet_miner.h

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

#ifndef MLSD_TRIPLET_MINER_H_
#define MLSD_TRIPLET_MINER_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mlsd/corpus.h"
#include "mlsd/embed_store.h"
#include "mlsd/kernels.h"
#include "mlsd/rng.h"

namespace mlsd {

/// (anchor, positive) from the source target, negative from the noise target.
struct Triplet {
  uint64_t anchor = 0;
  uint64_t positive = 0;
  uint64_t negative = 0;
  bool operator==(const Triplet &) const = default;
};

struct MinerConfig {
  size_t k = 5;                    // hard-negative pool size
  size_t triplets_per_anchor = 5;
  uint64_t seed = 0;
};

/// `candidates` ordered by descending cosine similarity to `anchor`, ties by
/// ascending id.
std::vector<uint64_t> rank_negatives(uint64_t anchor, std::span<const uint64_t> candidates,
                                     const EmbeddingStore &store);

/// Uniform draw from the first min(k, ranked.size()) entries.
uint64_t sample_hard_negative(std::span<const uint64_t> ranked, size_t k, Rng &rng);

/// Builds |source| x triplets_per_anchor triplets.  Each anchor uses its own
/// RNG stream derived from (seed, anchor id), so the result does not depend
/// on `exec`.  `store` must embed every source and noise id.
std::vector<Triplet> build_triplets(const Dataset &source, const Dataset &noise,
                                    const EmbeddingStore &store, const MinerConfig &cfg,
                                    Exec exec = Exec::Parallel);

/// CSV `anchor_id,positive_id,negative_id`.  Lines starting with '#' are
/// comments; `comment` (if non-empty) is written as the first line.
void save_triplets(const std::vector<Triplet> &triplets, const std::filesystem::path &path,
                   const std::string &comment = "");
std::vector<Triplet> load_triplets(const std::filesystem::path &path);

}  // namespace mlsd

#endif  // MLSD_TRIPLET_MINER_H_
