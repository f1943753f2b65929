// tests/test_triplet_miner.cc

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
#include <map>
#include <set>

#include "mlsd/rng.h"
#include "mlsd/triplet_miner.h"
#include "test_util.h"

using namespace mlsd;
using mlsd::test::error_code;
using mlsd::test::make_example;
using mlsd::test::TempDir;

namespace {

EmbeddingStore store_2d(const std::map<uint64_t, std::pair<float, float>> &points) {
  std::vector<uint64_t> ids;
  std::vector<float> v;
  for (const auto &[id, p] : points) {
    ids.push_back(id);
    v.push_back(p.first);
    v.push_back(p.second);
  }
  return EmbeddingStore(2, ids, v);
}

Dataset dataset_of(const std::vector<uint64_t> &ids, const std::string &target) {
  std::vector<Example> ex;
  for (uint64_t id : ids) ex.push_back(make_example(id, target, id % 3));
  return Dataset(Scheme::ThreeWay, ex);
}

}  // namespace

TEST_CASE("ranking by cosine similarity") {
  // Anchor (1,0); cosines worked out by hand:
  // 14:(3,-1) .9487, 10:(2,1) .8944, 13:(1,1) .7071, 15:(1,-3) .3162, 11:(0,1) 0, 12:(-1,.5) -.8944
  const auto store = store_2d({{1, {1, 0}}, {10, {2, 1}}, {11, {0, 1}}, {12, {-1, 0.5}},
                               {13, {1, 1}}, {14, {3, -1}}, {15, {1, -3}}, {16, {4, 0}}});
  const std::vector<uint64_t> cands{10, 11, 12, 13, 14, 15};
  CHECK(rank_negatives(1, cands, store) == std::vector<uint64_t>{14, 10, 13, 15, 11, 12});

  const std::vector<uint64_t> with_equal{10, 16, 14};
  CHECK(rank_negatives(1, with_equal, store).front() == 16);
}

TEST_CASE("ties go to the lower id") {
  const auto store = store_2d({{0, {1, 0}}, {7, {1, 1}}, {3, {1, 1}}, {5, {2, 2}}});
  CHECK(rank_negatives(0, std::vector<uint64_t>{7, 5, 3}, store) == std::vector<uint64_t>{3, 5, 7});
}

TEST_CASE("hard negative sampling") {
  Rng rng(9);
  const std::vector<uint64_t> ranked{4, 8, 15, 16, 23, 42};
  for (int i = 0; i < 200; ++i) CHECK(sample_hard_negative(ranked, 1, rng) == 4);

  const std::vector<uint64_t> three{1, 2, 3};
  std::set<uint64_t> seen;
  for (int i = 0; i < 200; ++i) seen.insert(sample_hard_negative(three, 5, rng));
  CHECK(seen == std::set<uint64_t>{1, 2, 3});

  std::map<uint64_t, int> freq;
  const std::vector<uint64_t> five{10, 20, 30, 40, 50};
  for (int i = 0; i < 10000; ++i) ++freq[sample_hard_negative(five, 5, rng)];
  REQUIRE(freq.size() == 5);
  for (const auto &[id, f] : freq) CHECK(std::abs(f / 10000.0 - 0.2) <= 0.02);

  for (int i = 0; i < 500; ++i) {
    const uint64_t x = sample_hard_negative(ranked, 3, rng);
    CHECK((x == 4 || x == 8 || x == 15));
  }
  CHECK(error_code([&] { sample_hard_negative(std::vector<uint64_t>{}, 5, rng); }) == "EMPTY_CANDIDATES");
}

TEST_CASE("triplet counts and invariants") {
  const auto store = store_2d({{0, {1, 0}}, {1, {1, 0.1f}}, {2, {0.9f, 0}}, {3, {1, -0.2f}},
                               {10, {0, 1}}, {11, {-1, 1}}});
  const Dataset src = dataset_of({0, 1, 2, 3}, "S"), noi = dataset_of({10, 11}, "N");
  const auto t = build_triplets(src, noi, store, {5, 5, 1});
  REQUIRE(t.size() == 20);
  for (size_t i = 0; i < t.size(); ++i) {
    CHECK(t[i].anchor == src[i / 5].id);
    CHECK(t[i].positive != t[i].anchor);
    CHECK(t[i].positive <= 3);
    CHECK(t[i].negative >= 10);
  }
  CHECK(error_code([&] { build_triplets(dataset_of({0}, "S"), noi, store, {}); }) == "SOURCE_TOO_SMALL");
  CHECK(error_code([&] { build_triplets(src, Dataset(Scheme::ThreeWay, {}), store, {}); }) == "NOISE_EMPTY");
}

TEST_CASE("negatives come from the noise points nearest each cluster") {
  // Source cluster A near (1,0), cluster B near (0,1); noise points fan out
  // so the two nearest to A are 20 and 21.
  const auto store = store_2d({{0, {1, 0.01f}}, {1, {1, -0.01f}}, {2, {1, 0.02f}},
                               {3, {0.01f, 1}}, {4, {-0.01f, 1}},
                               {20, {1, 0.3f}}, {21, {1, -0.35f}}, {22, {1, 1.5f}}, {23, {-1, 1}}, {24, {-1, -1}}});
  const Dataset src = dataset_of({0, 1, 2, 3, 4}, "S"), noi = dataset_of({20, 21, 22, 23, 24}, "N");
  const auto t = build_triplets(src, noi, store, {2, 20, 3});
  for (const auto &x : t) {
    // Brute force: the two noise points with the highest cosine to the anchor.
    std::vector<std::pair<double, uint64_t>> sims;
    for (uint64_t n : noi.ids()) sims.push_back({-cosine_similarity(store.at(x.anchor), store.at(n)), n});
    std::sort(sims.begin(), sims.end());
    CHECK((x.negative == sims[0].second || x.negative == sims[1].second));
    if (x.anchor <= 2) CHECK((x.negative == 20 || x.negative == 21));
  }
}

TEST_CASE("mining is deterministic and independent of the executor") {
  Rng rng(2);
  std::vector<uint64_t> ids;
  std::vector<float> v;
  for (uint64_t i = 0; i < 120; ++i) {
    ids.push_back(i);
    for (int k = 0; k < 8; ++k) v.push_back(static_cast<float>(rng.normal()));
  }
  const EmbeddingStore store(8, ids, v);
  std::vector<uint64_t> s(ids.begin(), ids.begin() + 60), n(ids.begin() + 60, ids.end());
  const Dataset src = dataset_of(s, "S"), noi = dataset_of(n, "N");
  const MinerConfig cfg{5, 5, 77};
  const auto a = build_triplets(src, noi, store, cfg, Exec::Parallel);
  CHECK(a == build_triplets(src, noi, store, cfg, Exec::Parallel));
  CHECK(a == build_triplets(src, noi, store, cfg, Exec::Serial));
  CHECK_FALSE(a == build_triplets(src, noi, store, {5, 5, 78}));

  TempDir dir("triplets");
  save_triplets(a, dir / "t.csv", "config_hash=abc");
  CHECK(load_triplets(dir / "t.csv") == a);
  mlsd::test::write_file(dir / "bad.csv", "anchor_id,positive_id,negative_id\n1,2\n");
  CHECK(error_code([&] { load_triplets(dir / "bad.csv"); }) == "MALFORMED_ROW");
}
