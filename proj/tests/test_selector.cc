// tests/test_selector.cc

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

#include <algorithm>

#include "mlsd/rng.h"
#include "mlsd/selector.h"
#include "test_util.h"

using namespace mlsd;
using mlsd::test::error_code;
using mlsd::test::make_example;

namespace {

Dataset pool_with_labels(const std::vector<size_t> &labels) {
  std::vector<Example> ex;
  for (size_t i = 0; i < labels.size(); ++i) ex.push_back(make_example(i, "D", labels[i]));
  return Dataset(Scheme::ThreeWay, ex);
}

}  // namespace

TEST_CASE("class smaller than n is taken whole") {
  const Dataset d = pool_with_labels({0, 0, 0, 1, 1, 1, 1, 1, 1, 2});
  std::map<uint64_t, double> conf;
  for (uint64_t i = 0; i < 10; ++i) conf[i] = 0.1 * static_cast<double>(i);
  const auto r = select_top_n(d, conf, {5});
  CHECK(r.per_class[0].size() == 3);
  CHECK(r.per_class[1].size() == 5);
  CHECK(r.per_class[2].size() == 1);
  CHECK(r.total() == 9);
}

TEST_CASE("hand-assigned 10-example fixture, n = 2") {
  const Dataset d = pool_with_labels({0, 1, 2, 0, 1, 2, 0, 1, 2, 0});
  const std::map<uint64_t, double> conf{{0, 0.2}, {1, 0.9}, {2, 0.4}, {3, 0.8}, {4, 0.1},
                                        {5, 0.4}, {6, 0.55}, {7, 0.95}, {8, 0.3}, {9, 0.55}};
  const auto r = select_top_n(d, conf, {2});
  // FAVOR {0:.2, 3:.8, 6:.55, 9:.55} -> 3, 6 (6 beats 9 on id)
  // AGAINST {1:.9, 4:.1, 7:.95} -> 7, 1
  // NEITHER {2:.4, 5:.4, 8:.3} -> 2, 5
  CHECK(r.per_class[0] == std::vector<ScoredId>{{3, 0.8}, {6, 0.55}});
  CHECK(r.per_class[1] == std::vector<ScoredId>{{7, 0.95}, {1, 0.9}});
  CHECK(r.per_class[2] == std::vector<ScoredId>{{2, 0.4}, {5, 0.4}});
  CHECK(r.all_ids() == std::vector<uint64_t>{3, 6, 7, 1, 2, 5});
}

TEST_CASE("selection equals an exhaustive per-class sort") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const size_t size = 1 + rng.uniform_index(60);
    std::vector<size_t> labels(size);
    std::map<uint64_t, double> conf;
    for (size_t i = 0; i < size; ++i) {
      labels[i] = rng.uniform_index(3);
      conf[i] = static_cast<double>(rng.uniform_index(8)) / 8.0;  // many ties
    }
    const Dataset d = pool_with_labels(labels);
    const size_t n = 1 + rng.uniform_index(10);
    const auto r = select_top_n(d, conf, {n});
    for (size_t c = 0; c < 3; ++c) {
      std::vector<std::pair<double, uint64_t>> all;
      for (size_t i = 0; i < size; ++i)
        if (labels[i] == c) all.push_back({-conf[i], i});
      std::sort(all.begin(), all.end());
      all.resize(std::min(all.size(), n));
      REQUIRE(r.per_class[c].size() == all.size());
      for (size_t k = 0; k < all.size(); ++k) CHECK(r.per_class[c][k].id == all[k].second);
    }
  }
}

TEST_CASE("selection errors") {
  const Dataset d = pool_with_labels({0, 1});
  CHECK(error_code([&] { select_top_n(Dataset(Scheme::ThreeWay, {}), {}, {}); }) == "EMPTY_DESTINATION");
  CHECK(error_code([&] { select_top_n(d, {{0, 0.5}}, {}); }) == "MISSING_CONFIDENCE");
  CHECK(error_code([&] { select_top_n(d, {{0, 0.5}, {1, 1.5}}, {}); }) == "BAD_CONFIDENCE");
  CHECK(error_code([&] { select_top_n(d, {{0, 0.5}, {1, 0.5}}, {1, Diversity::GreedyMaxMin}); }) == "BAD_CONFIG");
}

TEST_CASE("greedy max-min diversity") {
  // Class 0 candidates: two near-duplicates at the top, one far point lower.
  const Dataset d = pool_with_labels({0, 0, 0, 0});
  const std::map<uint64_t, double> conf{{0, 0.9}, {1, 0.89}, {2, 0.5}, {3, 0.1}};
  const std::map<uint64_t, std::vector<float>> proj{{0, {0, 0}}, {1, {0, 0.01f}}, {2, {5, 5}}, {3, {9, 9}}};
  const auto plain = select_top_n(d, conf, {2});
  CHECK(plain.all_ids() == std::vector<uint64_t>{0, 1});
  const auto diverse = select_top_n(d, conf, {2, Diversity::GreedyMaxMin}, &proj);
  // Pool is the top 3n = 4 by confidence; starts at the most confident.
  CHECK(diverse.all_ids() == std::vector<uint64_t>{0, 3});
}

TEST_CASE("selection JSON round trip") {
  const Dataset d = pool_with_labels({0, 1, 2, 0});
  const auto r = select_top_n(d, {{0, 0.25}, {1, 0.5}, {2, 0.125}, {3, 1.0}}, {1, Diversity::Off, 4});
  auto r2 = r;
  r2.checkpoint = "ck";
  const auto back = selection_from_json(to_json(r2));
  CHECK(back.per_class == r.per_class);
  CHECK(back.checkpoint == "ck");
  CHECK(back.config.n == 1);
  CHECK(to_json(back) == to_json(r2));
  CHECK(to_json(r2)["classes"].contains("FAVOR"));
}
