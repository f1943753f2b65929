// tools/mlsd_synth.cc

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

// Writes a synthetic benchmark (corpus, embedding store and experiment
// config) to a directory.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "mlsd/error.h"
#include "mlsd/experiment.h"
#include "mlsd/metric_net.h"
#include "mlsd/synthetic.h"

namespace {

using nlohmann::json;

json role(const std::string &target) {
  return {{"target", target}, {"files", json::array({{{"path", "corpus.csv"}, {"format", "generic-csv"}}})}};
}

json make_config(const std::string &name, const mlsd::BenchmarkSettings &s, const std::vector<uint64_t> &seeds) {
  return {
      {"name", name},
      {"output_dir", "out"},
      {"source", role("SRC")},
      {"destination", role("DST")},
      {"noise", role("NOI")},
      {"embeddings", {{"train", "embeddings.bin"}}},
      {"miner", {{"k", s.miner.k}, {"triplets_per_anchor", s.miner.triplets_per_anchor}, {"seed", s.miner.seed}}},
      {"metric", mlsd::to_json(s.metric)},
      {"head", mlsd::to_json(s.head)},
      {"selection", {{"shots", s.shots}, {"diversity", "off"}}},
      {"stance",
       {{"train", mlsd::to_json(s.stance.train)},
        {"finetune_epochs", s.stance.finetune_epochs},
        {"finetune_lr", s.stance.finetune_lr},
        {"finetune_batch_size", s.stance.finetune_batch_size},
        {"classifier", "linear"}}},
      {"regimes", {"standard", "random", "mlsd"}},
      {"seeds", seeds},
  };
}

void write(const std::filesystem::path &dir, const mlsd::SyntheticCorpus &c, const json &config) {
  std::filesystem::create_directories(dir);
  mlsd::save_dataset(c.dataset, dir / "corpus.csv");
  mlsd::save_store(c.store, dir / "embeddings.bin");
  std::ofstream out(dir / "config.json", std::ios::binary | std::ios::trunc);
  out << config.dump(2) << '\n';
  if (!out) throw mlsd::Error("IO_ERROR", "cannot write " + (dir / "config.json").string());
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Write a synthetic stance-transfer benchmark"};
  std::string kind = "transfer", out;
  uint64_t seed = 7;
  app.add_option("kind", kind, "transfer (full benchmark) or smoke (small fixture)")
      ->check(CLI::IsMember({"transfer", "smoke"}));
  app.add_option("-o,--out", out, "Output directory")->required();
  app.add_option("--seed", seed, "Data seed");
  CLI11_PARSE(app, argc, argv);

  try {
    mlsd::TransferParams p;
    p.seed = seed;
    mlsd::BenchmarkSettings s = mlsd::benchmark_settings();
    std::vector<uint64_t> seeds(mlsd::kDefaultSeeds.begin(), mlsd::kDefaultSeeds.end());
    if (kind == "smoke") {
      p.dim = 8;
      p.n_source = p.n_noise = p.n_dest_train = p.n_dest_test = 60;
      s.metric.hidden_dim = 16;
      s.metric.proj_dim = 8;
      s.metric.lr = 1e-3;
      s.metric.epochs = 5;
      s.head.hidden_dim = 16;
      s.head.proj_dim = 8;
      s.head.lr = 1e-2;
      s.head.epochs = 10;
      s.stance.train.lr = 1e-2;
      s.stance.train.epochs = 10;
      s.stance.finetune_lr = 1e-2;
      s.stance.finetune_epochs = 10;
      s.shots = {2, 4};
      seeds = {13, 42};
    }
    write(out, mlsd::make_transfer_benchmark(p), make_config("synthetic-" + kind, s, seeds));
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
