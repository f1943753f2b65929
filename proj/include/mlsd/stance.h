// include/mlsd/stance.h

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

#ifndef MLSD_STANCE_H_
#define MLSD_STANCE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "mlsd/corpus.h"
#include "mlsd/embed_store.h"
#include "mlsd/kernels.h"
#include "mlsd/nn.h"
#include "mlsd/softmax.h"

namespace mlsd {

/// Labeled embeddings for the stance classifier.
struct StanceData {
  Scheme scheme = Scheme::ThreeWay;
  Matrix<float> x;
  std::vector<size_t> y;

  size_t size() const { return y.size(); }
};

/// Joins a dataset with its embeddings, in dataset order.
StanceData make_stance_data(const Dataset &d, const EmbeddingStore &store);
/// Rows of `d` whose ids are listed, in the order given.
StanceData make_stance_data(const Dataset &d, const EmbeddingStore &store,
                            std::span<const uint64_t> ids);

struct StanceConfig {
  TrainConfig train;                // source training (hidden_dim 0 = linear model)
  size_t finetune_epochs = 20;
  double finetune_lr = 5e-5;
  size_t finetune_batch_size = 64;  // >= shot count means full-batch
};

struct StanceClassifierParams {
  Scheme scheme = Scheme::ThreeWay;
  SoftmaxClassifier<float> model;
  bool operator==(const StanceClassifierParams &) const = default;
};

/// Cross-entropy + Adam with early stopping.  Needs at least two classes.
StanceClassifierParams train_stance(const StanceData &source_train, const StanceConfig &cfg,
                                    Exec exec = Exec::Serial);

/// Continues training from `params` on the shots alone for
/// cfg.finetune_epochs epochs.  Zero epochs returns `params` unchanged.
StanceClassifierParams finetune(const StanceClassifierParams &params, const StanceData &shots,
                                const StanceConfig &cfg, uint64_t seed, Exec exec = Exec::Serial);

std::vector<size_t> predict_stance(const StanceClassifierParams &params, const Matrix<float> &x,
                                   Exec exec = Exec::Serial);

struct ClassScore {
  size_t cls = 0;
  uint64_t tp = 0, fp = 0, fn = 0;
  double precision = 0, recall = 0, f1 = 0;
};

struct F1Report {
  size_t num_classes = 0;
  std::vector<size_t> classes_of_interest;
  /// confusion[gold][predicted]
  std::vector<std::vector<uint64_t>> confusion;
  std::vector<ClassScore> per_class;  // every class, scored or not
  double macro_f1 = 0;
};

/// Per-class F1 = 2TP / (2TP + FP + FN) (0 when the denominator is 0);
/// macro-F1 is the unweighted mean over `classes_of_interest`, computed as an
/// exact rational and rounded once.  Predictions of excluded classes still
/// count as errors against the scored classes.
F1Report macro_f1(std::span<const size_t> predictions, std::span<const size_t> gold,
                  std::span<const size_t> classes_of_interest, size_t num_classes);

/// Recomputes macro-F1 from a stored confusion matrix.
double macro_f1_from_confusion(const std::vector<std::vector<uint64_t>> &confusion,
                               std::span<const size_t> classes_of_interest);

}  // namespace mlsd

#endif  // MLSD_STANCE_H_
