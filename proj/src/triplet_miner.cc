// src/triplet_miner.cc

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

#include "mlsd/triplet_miner.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mlsd/error.h"

namespace mlsd {

namespace {

Rng anchor_stream(uint64_t seed, uint64_t anchor) { return Rng(mix_seed(seed ^ anchor)); }

// Positions sorted by (-similarity, id).
std::vector<size_t> order_by_similarity(std::span<const double> sims,
                                        std::span<const uint64_t> ids) {
  std::vector<size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (sims[a] != sims[b]) return sims[a] > sims[b];
    return ids[a] < ids[b];
  });
  return order;
}

}  // namespace

std::vector<uint64_t> rank_negatives(uint64_t anchor, std::span<const uint64_t> candidates,
                                     const EmbeddingStore &store) {
  const auto a = store.at(anchor);
  std::vector<double> sims(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i)
    sims[i] = cosine_similarity(a, store.at(candidates[i]));
  std::vector<uint64_t> out;
  out.reserve(candidates.size());
  for (size_t pos : order_by_similarity(sims, candidates)) out.push_back(candidates[pos]);
  return out;
}

uint64_t sample_hard_negative(std::span<const uint64_t> ranked, size_t k, Rng &rng) {
  if (ranked.empty()) throw Error("EMPTY_CANDIDATES", "no candidate negatives to sample from");
  if (k == 0) throw Error("BAD_CONFIG", "hard-negative pool size k must be at least 1");
  const size_t pool = std::min(k, ranked.size());
  return ranked[rng.uniform_index(pool)];
}

std::vector<Triplet> build_triplets(const Dataset &source, const Dataset &noise,
                                    const EmbeddingStore &store, const MinerConfig &cfg,
                                    Exec exec) {
  if (source.size() < 2)
    throw Error("SOURCE_TOO_SMALL", "triplet mining needs at least 2 source examples");
  if (noise.empty()) throw Error("NOISE_EMPTY", "triplet mining needs a non-empty noise set");
  if (cfg.k == 0 || cfg.triplets_per_anchor == 0)
    throw Error("BAD_CONFIG", "k and triplets_per_anchor must be at least 1");

  const auto source_ids = source.ids();
  const auto noise_ids = noise.ids();
  Matrix<float> anchors(source_ids.size(), store.dim(), store.gather(source_ids));
  Matrix<float> negatives(noise_ids.size(), store.dim(), store.gather(noise_ids));
  Matrix<double> sims;
  kernels::cosine_matrix(anchors, negatives, sims, exec);

  const size_t per = cfg.triplets_per_anchor;
  std::vector<Triplet> out(source_ids.size() * per);
  const int64_t n_anchor = static_cast<int64_t>(source_ids.size());
  auto mine_anchor = [&](size_t a) {
    std::vector<uint64_t> ranked;
    ranked.reserve(noise_ids.size());
    for (size_t pos : order_by_similarity(sims.row(a), noise_ids)) ranked.push_back(noise_ids[pos]);
    Rng rng = anchor_stream(cfg.seed, source_ids[a]);
    for (size_t t = 0; t < per; ++t) {
      // Positive: uniform over source minus the anchor itself.
      size_t p = rng.uniform_index(source_ids.size() - 1);
      if (p >= a) ++p;
      out[a * per + t] = {source_ids[a], source_ids[p], sample_hard_negative(ranked, cfg.k, rng)};
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (int64_t a = 0; a < n_anchor; ++a) mine_anchor(static_cast<size_t>(a));
  } else {
    for (int64_t a = 0; a < n_anchor; ++a) mine_anchor(static_cast<size_t>(a));
  }
  return out;
}

void save_triplets(const std::vector<Triplet> &triplets, const std::filesystem::path &path,
                   const std::string &comment) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("IO_ERROR", "cannot write " + path.string());
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "anchor_id,positive_id,negative_id\n";
  for (const auto &t : triplets) out << t.anchor << ',' << t.positive << ',' << t.negative << '\n';
  if (!out) throw Error("IO_ERROR", "write failed for " + path.string());
}

std::vector<Triplet> load_triplets(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("FILE_NOT_FOUND", "cannot open " + path.string());
  std::vector<Triplet> out;
  std::string line;
  size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "anchor_id,positive_id,negative_id")
        throw Error("MALFORMED_ROW", "triplet file lacks the anchor_id,positive_id,negative_id header");
      header = true;
      continue;
    }
    Triplet t;
    char c1 = 0, c2 = 0;
    std::istringstream ss(line);
    if (!(ss >> t.anchor >> c1 >> t.positive >> c2 >> t.negative) || c1 != ',' || c2 != ',' ||
        !(ss >> std::ws).eof())
      throw Error("MALFORMED_ROW", "malformed triplet at line " + std::to_string(lineno));
    out.push_back(t);
  }
  return out;
}

}  // namespace mlsd
