// src/synthetic.cc

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

#include "mlsd/synthetic.h"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mlsd/error.h"
#include "mlsd/rng.h"

namespace mlsd {

namespace {

struct Builder {
  size_t dim;
  std::vector<Example> examples;
  std::vector<uint64_t> ids;
  std::vector<float> values;

  void add(const std::string &target, size_t label, Split split, const std::vector<double> &center,
           Rng &rng) {
    const uint64_t id = examples.size();
    Example ex;
    ex.id = id;
    ex.text = "synthetic " + target + " example " + std::to_string(id);
    ex.target = target;
    ex.stance = StanceLabel(Scheme::ThreeWay, label);
    ex.split = split;
    examples.push_back(std::move(ex));
    ids.push_back(id);
    for (size_t k = 0; k < dim; ++k) values.push_back(static_cast<float>(center[k] + rng.normal()));
  }

  SyntheticCorpus finish() {
    SyntheticCorpus out;
    out.dataset = Dataset(Scheme::ThreeWay, std::move(examples));
    out.store = EmbeddingStore(static_cast<uint32_t>(dim), std::move(ids), std::move(values));
    return out;
  }
};

}  // namespace

SyntheticCorpus make_separation_benchmark(const SeparationParams &p) {
  if (p.dim < 1) throw Error("BAD_CONFIG", "benchmark dimension must be positive");
  Rng rng(mix_seed(p.seed));
  Builder b{p.dim, {}, {}, {}};
  std::vector<double> src(p.dim, 0.0), noi(p.dim, 0.0);
  src[0] = -p.separation / 2;
  noi[0] = p.separation / 2;
  for (size_t i = 0; i < p.n_source + p.n_test; ++i)
    b.add("SRC", i % 3, i < p.n_source ? Split::Train : Split::Test, src, rng);
  for (size_t i = 0; i < p.n_noise + p.n_test; ++i)
    b.add("NOI", i % 3, i < p.n_noise ? Split::Train : Split::Test, noi, rng);
  return b.finish();
}

SyntheticCorpus make_transfer_benchmark(const TransferParams &p) {
  if (p.dim < 5) throw Error("BAD_CONFIG", "transfer benchmark needs at least 5 dimensions");
  Rng rng(mix_seed(p.seed));
  Builder b{p.dim, {}, {}, {}};
  const double theta = p.rotation_deg * std::numbers::pi / 180.0;
  const double sign[3] = {1.0, -1.0, 0.0};

  auto center = [&](double topic_src, double topic_noise, double offset, double s3, double s4) {
    std::vector<double> c(p.dim, 0.0);
    c[0] = topic_src;
    c[1] = topic_noise;
    c[2] = offset;
    c[3] = s3;
    c[4] = s4;
    return c;
  };

  for (size_t i = 0; i < p.n_source; ++i) {
    const size_t label = i % 3;
    b.add("SRC", label, Split::Train,
          center(p.topic_strength, 0, 0, sign[label] * p.stance_strength, 0), rng);
  }
  for (size_t i = 0; i < p.n_noise; ++i)
    b.add("NOI", rng.uniform_index(3), Split::Train, center(0, p.topic_strength, 0, 0, 0), rng);

  auto add_dest = [&](size_t count, Split split) {
    for (size_t i = 0; i < count; ++i) {
      const size_t label = i % 3;
      const double s = sign[label] * p.stance_strength;
      if (rng.uniform01() < p.off_topic_fraction) {
        const double r = p.off_topic_polarity * s;
        b.add("DST", label, split,
              center(0, p.topic_strength, p.dest_offset, r * std::cos(theta), r * std::sin(theta)), rng);
      } else {
        b.add("DST", label, split,
              center(p.topic_strength, 0, p.dest_offset, s * std::cos(theta), s * std::sin(theta)), rng);
      }
    }
  };
  add_dest(p.n_dest_train, Split::Train);
  add_dest(p.n_dest_test, Split::Test);
  return b.finish();
}

BenchmarkSettings benchmark_settings() {
  BenchmarkSettings b;
  b.head.lr = 1e-3;
  b.head.epochs = 30;
  b.stance.train.hidden_dim = 0;
  b.stance.train.lr = 1e-3;
  b.stance.train.epochs = 30;
  b.stance.finetune_lr = 2e-2;
  b.stance.finetune_epochs = 50;
  return b;
}

}  // namespace mlsd
