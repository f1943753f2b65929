// tests/test_experiment.cc

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

#include <set>

#include "mlsd/experiment.h"
#include "mlsd/rng.h"
#include "test_util.h"

using namespace mlsd;
using mlsd::test::error_code;
using mlsd::test::make_example;

namespace {

struct Fixture {
  Dataset source{Scheme::ThreeWay, {}}, dest_train{Scheme::ThreeWay, {}}, dest_test{Scheme::ThreeWay, {}};
  EmbeddingStore store;
};

// Source and destination share one 3-class geometry (self-transfer).
Fixture self_transfer() {
  Rng rng(17);
  std::vector<Example> s, dtr, dte;
  std::vector<uint64_t> ids;
  std::vector<float> v;
  for (uint64_t id = 0; id < 270; ++id) {
    const size_t label = id % 3;
    auto ex = make_example(id, id < 90 ? "S" : "D", label);
    (id < 90 ? s : id < 180 ? dtr : dte).push_back(ex);
    ids.push_back(id);
    for (size_t k = 0; k < 4; ++k) v.push_back(static_cast<float>((k == label ? 2.5 : 0.0) + rng.normal()));
  }
  return {Dataset(Scheme::ThreeWay, s), Dataset(Scheme::ThreeWay, dtr), Dataset(Scheme::ThreeWay, dte),
          EmbeddingStore(4, ids, v)};
}

ExperimentSpec spec_for(const Fixture &f) {
  ExperimentSpec spec;
  spec.source_tag = "S";
  spec.destination_tag = "D";
  spec.source_train = f.source;
  spec.dest_train = f.dest_train;
  spec.dest_test = f.dest_test;
  spec.store = &f.store;
  spec.seeds = {1, 2, 3};
  spec.shots = {2, 4};
  spec.stance.train.lr = 1e-2;
  spec.stance.train.epochs = 100;
  spec.stance.train.hidden_dim = 0;
  spec.stance.finetune_lr = 1e-2;
  spec.stance.finetune_epochs = 10;
  // "MLSD" here just takes the lowest ids per class.
  const Dataset pool = f.dest_train;
  spec.mlsd_shots = [pool](uint64_t, const std::vector<size_t> &shots) {
    std::map<size_t, std::vector<uint64_t>> out;
    for (size_t n : shots) {
      std::vector<size_t> taken(3, 0);
      for (const auto &e : pool)
        if (taken[e.stance.index()]++ < n) out[n].push_back(e.id);
    }
    return out;
  };
  return spec;
}

}  // namespace

TEST_CASE("random shots are per-class, seeded and within the pool") {
  std::vector<Example> ex;
  for (uint64_t i = 0; i < 40; ++i) ex.push_back(make_example(i, "D", i < 4 ? 0 : i < 30 ? 1 : 2));
  const Dataset pool(Scheme::ThreeWay, ex);
  const auto a = random_shots(pool, 5, 1);
  CHECK(a.size() == 4 + 5 + 5);
  CHECK(std::set<uint64_t>(a.begin(), a.end()).size() == a.size());
  CHECK(random_shots(pool, 5, 1) == a);
  CHECK_FALSE(random_shots(pool, 5, 2) == a);
  size_t favor = 0;
  for (uint64_t id : a) favor += id < 4;
  CHECK(favor == 4);
}

TEST_CASE("experiment runs every regime and summarizes per seed") {
  const Fixture f = self_transfer();
  const ExperimentSpec spec = spec_for(f);
  const auto r = run_experiment(spec, Exec::Serial);
  CHECK(r.runs.size() == 3 * (1 + 2 * 2));
  REQUIRE(r.summaries.size() == 3);
  const auto *standard = r.summary(Regime::Standard);
  REQUIRE(standard != nullptr);
  CHECK(standard->per_seed.size() == 3);
  CHECK(standard->mean >= 0.8);  // self-transfer control
  const auto *rnd = r.summary(Regime::RandomFewShot);
  REQUIRE(rnd->per_n.size() == 2);
  CHECK(rnd->per_seed[0] == doctest::Approx((rnd->per_n[0].scores[0] + rnd->per_n[1].scores[0]) / 2));
  CHECK(r.significance.has_value());

  CHECK(to_json(run_experiment(spec, Exec::Parallel)) == to_json(r));

  const auto back = report_from_json(to_json(r));
  CHECK(to_json(back) == to_json(r));
  const std::string text = format_report(r);
  CHECK(text.find("Standard") != std::string::npos);
  CHECK(text.find("MLSD") != std::string::npos);
  CHECK(text.find("paired t-test") != std::string::npos);
}

TEST_CASE("a single seed reports zero spread and no significance") {
  const Fixture f = self_transfer();
  ExperimentSpec spec = spec_for(f);
  spec.seeds = {5};
  const auto r = run_experiment(spec);
  for (const auto &s : r.summaries) CHECK(s.stddev == 0.0);
  CHECK_FALSE(r.significance.has_value());
}

TEST_CASE("experiment errors") {
  const Fixture f = self_transfer();
  ExperimentSpec spec = spec_for(f);
  spec.mlsd_shots = nullptr;
  CHECK(error_code([&] { run_experiment(spec); }) != "");
  spec = spec_for(f);
  spec.store = nullptr;
  CHECK(error_code([&] { run_experiment(spec); }) == "BAD_CONFIG");
}

TEST_CASE("regime names") {
  for (Regime r : {Regime::Standard, Regime::RandomFewShot, Regime::MlsdFewShot})
    CHECK(parse_regime(regime_name(r)) == r);
  CHECK(error_code([] { parse_regime("oracle"); }) != "");
}
