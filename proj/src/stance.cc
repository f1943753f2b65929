// src/stance.cc

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

#include "mlsd/stance.h"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>

#include "mlsd/error.h"

namespace mlsd {

StanceData make_stance_data(const Dataset &d, const EmbeddingStore &store) {
  const auto ids = d.ids();
  return make_stance_data(d, store, ids);
}

StanceData make_stance_data(const Dataset &d, const EmbeddingStore &store,
                            std::span<const uint64_t> ids) {
  std::unordered_map<uint64_t, size_t> label;
  label.reserve(d.size());
  for (const auto &ex : d) label.emplace(ex.id, ex.stance.index());
  StanceData out;
  out.scheme = d.scheme();
  out.x = Matrix<float>(ids.size(), store.dim(), store.gather(ids));
  for (uint64_t id : ids) {
    auto it = label.find(id);
    if (it == label.end()) throw Error("MISSING_EXAMPLE", "id " + std::to_string(id) + " is not in the dataset");
    out.y.push_back(it->second);
  }
  return out;
}

StanceClassifierParams train_stance(const StanceData &source_train, const StanceConfig &cfg, Exec exec) {
  if (source_train.size() == 0) throw Error("EMPTY_INPUT", "no training examples");
  const std::set<size_t> present(source_train.y.begin(), source_train.y.end());
  if (present.size() < 2)
    throw Error("SINGLE_CLASS", "stance training needs examples of at least two classes");
  StanceClassifierParams p;
  p.scheme = source_train.scheme;
  p.model = init_softmax<float>(source_train.x.cols, cfg.train.hidden_dim,
                                num_classes(source_train.scheme), cfg.train.seed);
  fit_softmax(p.model, source_train.x, source_train.y, cfg.train, exec);
  return p;
}

StanceClassifierParams finetune(const StanceClassifierParams &params, const StanceData &shots,
                                const StanceConfig &cfg, uint64_t seed, Exec exec) {
  if (shots.scheme != params.scheme)
    throw Error("SCHEME_MISMATCH", "few-shot labels use a different scheme than the classifier");
  if (shots.size() == 0) throw Error("EMPTY_INPUT", "no few-shot examples");
  StanceClassifierParams out = params;
  continue_training(out.model, shots.x, shots.y, cfg.finetune_lr, cfg.finetune_batch_size,
                    cfg.finetune_epochs, seed, exec);
  return out;
}

std::vector<size_t> predict_stance(const StanceClassifierParams &params, const Matrix<float> &x, Exec exec) {
  return predict(params.model, x, exec);
}

namespace {

using i128 = __int128;

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// num / den rounded once to double.  Exact when both fit in 53 bits after
// reduction (IEEE division is correctly rounded).
double to_double(i128 num, i128 den) {
  const i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  constexpr i128 kExact = static_cast<i128>(1) << 53;
  if (num <= kExact && den <= kExact) return static_cast<double>(num) / static_cast<double>(den);
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

double ratio(uint64_t num, uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void check_classes(std::span<const size_t> coi, size_t num_classes) {
  if (coi.empty()) throw Error("EMPTY_CLASSES", "no classes of interest to average over");
  for (size_t c : coi)
    if (c >= num_classes) throw Error("BAD_LABEL", "class of interest outside the scheme");
}

}  // namespace

double macro_f1_from_confusion(const std::vector<std::vector<uint64_t>> &confusion,
                               std::span<const size_t> classes_of_interest) {
  const size_t k = confusion.size();
  check_classes(classes_of_interest, k);
  // Sum of fractions 2TP / (2TP + FP + FN), kept exact.
  i128 num = 0, den = 1;
  for (size_t c : classes_of_interest) {
    uint64_t tp = confusion[c][c], fp = 0, fn = 0;
    for (size_t o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += confusion[o][c];
      fn += confusion[c][o];
    }
    const i128 a = 2 * static_cast<i128>(tp);
    i128 b = a + fp + fn;
    if (b == 0) b = 1;  // 0/0 counts as F1 = 0
    num = num * b + a * den;
    den *= b;
    const i128 g = gcd128(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  return to_double(num, den * static_cast<i128>(classes_of_interest.size()));
}

F1Report macro_f1(std::span<const size_t> predictions, std::span<const size_t> gold,
                  std::span<const size_t> classes_of_interest, size_t num_classes) {
  if (predictions.size() != gold.size())
    throw Error("LENGTH_MISMATCH", "predictions and gold labels differ in length");
  check_classes(classes_of_interest, num_classes);
  F1Report r;
  r.num_classes = num_classes;
  r.classes_of_interest.assign(classes_of_interest.begin(), classes_of_interest.end());
  r.confusion.assign(num_classes, std::vector<uint64_t>(num_classes, 0));
  for (size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] >= num_classes || predictions[i] >= num_classes)
      throw Error("BAD_LABEL", "label outside the scheme");
    ++r.confusion[gold[i]][predictions[i]];
  }
  for (size_t c = 0; c < num_classes; ++c) {
    ClassScore s;
    s.cls = c;
    s.tp = r.confusion[c][c];
    for (size_t o = 0; o < num_classes; ++o) {
      if (o == c) continue;
      s.fp += r.confusion[o][c];
      s.fn += r.confusion[c][o];
    }
    s.precision = ratio(s.tp, s.tp + s.fp);
    s.recall = ratio(s.tp, s.tp + s.fn);
    s.f1 = ratio(2 * s.tp, 2 * s.tp + s.fp + s.fn);
    r.per_class.push_back(s);
  }
  r.macro_f1 = macro_f1_from_confusion(r.confusion, classes_of_interest);
  return r;
}

}  // namespace mlsd
