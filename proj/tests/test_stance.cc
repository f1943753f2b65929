// tests/test_stance.cc

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

#include <doctest.h>

#include <cmath>

#include "mlsd/rng.h"
#include "mlsd/stance.h"
#include "mlsd/stats.h"
#include "test_util.h"

using namespace mlsd;
using mlsd::test::error_code;
using mlsd::test::make_example;

namespace {

// Three Gaussian classes along distinct axes of a `dim`-d space.
struct Blobs {
  Dataset data{Scheme::ThreeWay, {}};
  EmbeddingStore store;
};

Blobs make_blobs(size_t per_class, double spread, uint64_t seed, uint64_t first_id = 0, size_t dim = 6) {
  Rng rng(seed);
  std::vector<Example> ex;
  std::vector<uint64_t> ids;
  std::vector<float> v;
  for (size_t i = 0; i < 3 * per_class; ++i) {
    const size_t label = i % 3;
    const uint64_t id = first_id + i;
    ex.push_back(make_example(id, "T", label));
    ids.push_back(id);
    for (size_t k = 0; k < dim; ++k)
      v.push_back(static_cast<float>((k == label ? 3.0 : 0.0) + spread * rng.normal()));
  }
  return {Dataset(Scheme::ThreeWay, ex), EmbeddingStore(static_cast<uint32_t>(dim), ids, v)};
}

StanceConfig fast_config() {
  StanceConfig cfg;
  cfg.train.lr = 1e-2;
  cfg.train.epochs = 40;
  cfg.train.hidden_dim = 0;
  cfg.train.seed = 1;
  cfg.finetune_lr = 1e-2;
  cfg.finetune_epochs = 20;
  return cfg;
}

double f1_on(const StanceClassifierParams &m, const StanceData &d) {
  const auto pred = predict_stance(m, d.x);
  const auto coi = classes_of_interest(d.scheme);
  return macro_f1(pred, d.y, coi, num_classes(d.scheme)).macro_f1;
}

}  // namespace

TEST_CASE("macro-F1 on a hand-built confusion") {
  // FAVOR: TP=2 FP=1 FN=1; AGAINST: TP=3 FP=1 FN=0.
  const std::vector<size_t> gold{0, 0, 0, 1, 1, 1, 2, 2, 2};
  const std::vector<size_t> pred{0, 0, 1, 1, 1, 1, 0, 2, 2};
  const auto coi = classes_of_interest(Scheme::ThreeWay);
  const auto r = macro_f1(pred, gold, coi, 3);
  CHECK(r.per_class[0].f1 == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(r.per_class[1].f1 == doctest::Approx(6.0 / 7).epsilon(1e-15));
  CHECK(r.macro_f1 == 16.0 / 21);
  CHECK(r.confusion[2][0] == 1);
  CHECK(macro_f1_from_confusion(r.confusion, coi) == r.macro_f1);
}

TEST_CASE("macro-F1 edge cases") {
  const std::vector<size_t> gold{0, 1, 2, 0, 1};
  const auto coi3 = classes_of_interest(Scheme::ThreeWay);
  CHECK(macro_f1(gold, gold, coi3, 3).macro_f1 == 1.0);
  const std::vector<size_t> neither(5, 2);
  CHECK(macro_f1(neither, gold, coi3, 3).macro_f1 == 0.0);
  // Four-way scores all classes: the same NEITHER-style slip now costs.
  const std::vector<size_t> g4{0, 1, 2, 3}, p4{0, 1, 2, 2};
  const auto coi4 = classes_of_interest(Scheme::FourWay);
  CHECK(macro_f1(p4, g4, coi4, 4).macro_f1 == doctest::Approx((1 + 1 + 2.0 / 3 + 0) / 4).epsilon(1e-15));
  // A class absent from gold and predictions scores 0.
  const std::vector<size_t> g{0, 0}, p{0, 0};
  CHECK(macro_f1(p, g, coi3, 3).macro_f1 == 0.5);
  CHECK(error_code([&] { macro_f1(p, gold, coi3, 3); }) == "LENGTH_MISMATCH");
}

TEST_CASE("stance classifier learns separable classes") {
  const auto blobs = make_blobs(60, 0.5, 3);
  const auto data = make_stance_data(blobs.data, blobs.store);
  const auto cfg = fast_config();
  const auto m = train_stance(data, cfg);
  const auto pred = predict_stance(m, data.x);
  size_t correct = 0;
  for (size_t i = 0; i < pred.size(); ++i) correct += pred[i] == data.y[i];
  CHECK(static_cast<double>(correct) / static_cast<double>(pred.size()) >= 0.95);
  CHECK(train_stance(data, cfg) == m);
  CHECK(train_stance(data, cfg, Exec::Parallel) == m);

  auto mlp_cfg = cfg;
  mlp_cfg.train.hidden_dim = 8;
  const auto mlp = train_stance(data, mlp_cfg);
  CHECK(mlp.model.hidden.has_value());
  CHECK(f1_on(mlp, data) >= 0.9);
}

TEST_CASE("single-class input is rejected") {
  std::vector<Example> ex;
  for (uint64_t i = 0; i < 10; ++i) ex.push_back(make_example(i, "T", 1));
  std::vector<uint64_t> ids;
  for (uint64_t i = 0; i < 10; ++i) ids.push_back(i);
  const EmbeddingStore store(2, ids, std::vector<float>(20, 1.0f));
  const auto data = make_stance_data(Dataset(Scheme::ThreeWay, ex), store);
  CHECK(error_code([&] { train_stance(data, fast_config()); }) == "SINGLE_CLASS");
}

TEST_CASE("fine-tuning") {
  const auto blobs = make_blobs(60, 1.0, 5);
  const auto data = make_stance_data(blobs.data, blobs.store);
  auto cfg = fast_config();
  const auto base = train_stance(data, cfg);

  SUBCASE("zero epochs leaves parameters unchanged") {
    cfg.finetune_epochs = 0;
    CHECK(finetune(base, data, cfg, 1) == base);
  }
  SUBCASE("scheme mismatch") {
    StanceData four = data;
    four.scheme = Scheme::FourWay;
    CHECK(error_code([&] { finetune(base, four, cfg, 1); }) == "SCHEME_MISMATCH");
  }
  SUBCASE("shots from the training distribution change little") {
    const auto test_blobs = make_blobs(100, 1.0, 99, 10000);
    const auto test = make_stance_data(test_blobs.data, test_blobs.store);
    const double before = f1_on(base, test);
    std::vector<double> deltas;
    for (uint64_t seed = 0; seed < 5; ++seed) {
      const auto shots_blobs = make_blobs(5, 1.0, 500 + seed, 20000);
      const auto shots = make_stance_data(shots_blobs.data, shots_blobs.store);
      deltas.push_back(f1_on(finetune(base, shots, cfg, seed), test) - before);
    }
    CHECK(std::abs(mean(deltas)) <= 0.05);
  }
}
