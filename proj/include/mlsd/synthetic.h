// include/mlsd/synthetic.h

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

#ifndef MLSD_SYNTHETIC_H_
#define MLSD_SYNTHETIC_H_

#include <cstdint>

#include "mlsd/corpus.h"
#include "mlsd/embed_store.h"
#include "mlsd/nn.h"
#include "mlsd/stance.h"
#include "mlsd/triplet_miner.h"

namespace mlsd {

/// A corpus together with the embeddings of every example.
struct SyntheticCorpus {
  Dataset dataset{Scheme::ThreeWay, {}};
  EmbeddingStore store;
};

/// Source-vs-noise separability benchmark: two isotropic unit-variance
/// Gaussian clusters whose centers are `separation` apart.  Targets "SRC"
/// and "NOI" each get n_source / n_noise training examples followed by
/// n_test held-out examples drawn from the same cluster.
struct SeparationParams {
  size_t dim = 32;
  size_t n_source = 500;
  size_t n_noise = 500;
  double separation = 4.0;
  size_t n_test = 500;
  uint64_t seed = 1;
};
SyntheticCorpus make_separation_benchmark(const SeparationParams &p);

/// Cross-target transfer benchmark with three targets.
///
/// Embedding coordinates: axis 0 carries the source/destination topic, axis 1
/// the noise topic, axis 2 a destination-only offset, axis 3 the source
/// stance direction and axis 4 the part of the destination stance direction
/// orthogonal to it (rotated by `rotation_deg`).  FAVOR sits at +strength
/// along the stance direction, AGAINST at -strength, NEITHER at 0.
///
///  - "SRC": on-topic source tweets.
///  - "NOI": noise-topic tweets.
///  - "DST": a (1 - off_topic_fraction) share of on-topic destination tweets
///    and an off_topic_fraction share that sits on the noise topic and
///    expresses the destination stance direction scaled by
///    off_topic_polarity (-1: reversed, 0: labels unrelated to the
///    embedding).  Both splits are drawn from the same mixture.
struct TransferParams {
  size_t dim = 32;
  size_t n_source = 600;
  size_t n_noise = 600;
  size_t n_dest_train = 600;
  size_t n_dest_test = 600;
  double topic_strength = 4.0;
  double dest_offset = 1.5;
  double stance_strength = 2.5;
  double rotation_deg = 75.0;
  double off_topic_fraction = 0.5;
  double off_topic_polarity = 0.0;
  uint64_t seed = 7;
};
SyntheticCorpus make_transfer_benchmark(const TransferParams &p);

/// Training settings used with the shipped benchmarks.  The metric network
/// keeps the library defaults; the head and the stance classifier are small
/// models trained from scratch and get larger steps.
struct BenchmarkSettings {
  MinerConfig miner;
  TrainConfig metric;
  TrainConfig head;
  StanceConfig stance;
  std::vector<size_t> shots = {5, 10, 15};
};
BenchmarkSettings benchmark_settings();

}  // namespace mlsd

#endif  // MLSD_SYNTHETIC_H_
