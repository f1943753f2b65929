// include/mlsd/metric_net.h

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

#ifndef MLSD_METRIC_NET_H_
#define MLSD_METRIC_NET_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlsd/embed_store.h"
#include "mlsd/kernels.h"
#include "mlsd/matrix.h"
#include "mlsd/nn.h"
#include "mlsd/softmax.h"
#include "mlsd/triplet_miner.h"

namespace mlsd {

/// Projection network d_in -> h -> d_proj: layer2(relu(layer1(x))).
/// The same weights embed anchor, positive and negative.
template <typename T>
struct ProjectionParams {
  Dense<T> layer1;  // W1 (h x d_in), b1
  Dense<T> layer2;  // W2 (d_proj x h), b2

  size_t in_dim() const { return layer1.in_dim(); }
  size_t hidden_dim() const { return layer1.out_dim(); }
  size_t proj_dim() const { return layer2.out_dim(); }
  bool operator==(const ProjectionParams &) const = default;
};

template <typename T>
ProjectionParams<T> init_projection(size_t d_in, size_t hidden, size_t d_proj, uint64_t seed);

template <typename T>
ProjectionParams<T> zeros_like(const ProjectionParams<T> &p);

template <typename T>
std::vector<std::span<T>> tensors(ProjectionParams<T> &p);

/// Single-vector forward pass.  Throws DIM_MISMATCH, or NON_FINITE_OUTPUT
/// when the parameters have blown up.
template <typename T>
std::vector<T> forward_project(std::span<const T> x, const ProjectionParams<T> &p);

/// Row-wise forward pass of a batch.
template <typename T>
Matrix<T> project_batch(const Matrix<T> &x, const ProjectionParams<T> &p, Exec exec);

/// max(0, |a - p| - |a - n| + margin), Euclidean distances.
template <typename T>
double triplet_loss(std::span<const T> a, std::span<const T> p, std::span<const T> n, double margin);

template <typename T>
struct TripletGradient {
  double loss = 0;            // mean over the batch
  ProjectionParams<T> grad;   // d(mean loss) / d(params)
};

/// Loss and parameter gradients for one (anchor, positive, negative) of raw
/// input vectors.  Inactive hinge (loss <= 0) gives exactly zero gradients;
/// a zero projected distance contributes a zero direction vector.
template <typename T>
TripletGradient<T> grad_triplet(std::span<const T> a, std::span<const T> p, std::span<const T> n,
                                const ProjectionParams<T> &params, double margin);

/// Batched form: rows i of `a`, `p`, `n` form triplet i.  Loss and gradients
/// are means over the batch.
template <typename T>
TripletGradient<T> triplet_batch_gradient(const Matrix<T> &a, const Matrix<T> &p,
                                          const Matrix<T> &n, const ProjectionParams<T> &params,
                                          double margin, Exec exec);

template <typename T>
double triplet_batch_loss(const Matrix<T> &a, const Matrix<T> &p, const Matrix<T> &n,
                          const ProjectionParams<T> &params, double margin, Exec exec);

struct MetricTrainResult {
  ProjectionParams<float> params;
  TrainHistory history;
};

/// Mini-batch Adam on the mean triplet loss with a seeded validation
/// hold-out and early stopping; returns the best-validation parameters.
MetricTrainResult train_metric(const std::vector<Triplet> &triplets, const EmbeddingStore &store,
                               const TrainConfig &cfg, Exec exec = Exec::Parallel);

/// Binary softmax head on projected vectors.  Logit 0 is "source", logit 1
/// is "noise".
using ClassifierParams = Dense<float>;

struct HeadTrainResult {
  ClassifierParams head;
  TrainHistory history;
};

/// Cross-entropy training of the head on frozen projections; `is_source`
/// holds 1 for source rows, 0 for noise rows.
HeadTrainResult train_classifier_head(const Matrix<float> &projected,
                                      std::span<const uint8_t> is_source, const TrainConfig &cfg,
                                      Exec exec = Exec::Parallel);

/// P(source) from a pair of logits (source first).
double source_probability(double source_logit, double noise_logit);

/// P(source | x) for one raw embedding.
double confidence(std::span<const float> x, const ProjectionParams<float> &proj,
                  const ClassifierParams &head);

/// Fraction of rows whose argmax class matches the label; ties go to source.
double eval_binary_accuracy(const Matrix<float> &raw, std::span<const uint8_t> is_source,
                            const ProjectionParams<float> &proj, const ClassifierParams &head,
                            Exec exec = Exec::Parallel);

/// Trained projection and head plus the settings that produced them.
struct MetricModel {
  ProjectionParams<float> projection;
  ClassifierParams head;
  TrainConfig metric_config;
  TrainConfig head_config;
  TrainHistory metric_history;
  TrainHistory head_history;
};

/// Projects and scores rows of `store` for `ids`, returning id -> P(source).
std::map<uint64_t, double> score_confidences(const EmbeddingStore &store,
                                             std::span<const uint64_t> ids,
                                             const MetricModel &model, Exec exec = Exec::Parallel);

/// Writes `<base>.json` (manifest) and `<base>.bin` (tensors, one
/// MLSDEMB1 section per tensor, rows as records).  `extra` is merged into
/// the manifest.
void save_checkpoint(const MetricModel &model, const std::filesystem::path &base,
                     const nlohmann::json &extra = nlohmann::json::object());
MetricModel load_checkpoint(const std::filesystem::path &base);

nlohmann::json to_json(const TrainConfig &cfg);
TrainConfig train_config_from_json(const nlohmann::json &j, TrainConfig defaults = {});

/// CSV `epoch,train_loss,val_loss`.
void save_history(const TrainHistory &h, const std::filesystem::path &path,
                  const std::string &comment = "");

}  // namespace mlsd

#endif  // MLSD_METRIC_NET_H_
