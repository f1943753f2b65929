// src/selector.cc

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

#include "mlsd/selector.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlsd/embed_store.h"
#include "mlsd/error.h"

namespace mlsd {

namespace {

bool by_confidence(const ScoredId &a, const ScoredId &b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  return a.id < b.id;
}

std::vector<ScoredId> greedy_max_min(const std::vector<ScoredId> &pool, size_t n,
                                     const std::map<uint64_t, std::vector<float>> &projected) {
  std::vector<std::span<const float>> vec;
  for (const auto &s : pool) {
    auto it = projected.find(s.id);
    if (it == projected.end())
      throw Error("MISSING_PROJECTION", "no projected vector for id " + std::to_string(s.id));
    vec.emplace_back(it->second);
  }
  std::vector<ScoredId> chosen;
  std::vector<char> used(pool.size(), 0);
  std::vector<double> min_dist(pool.size(), std::numeric_limits<double>::infinity());
  // pool is in confidence order, so the first pick is the most confident one
  // and later ties on distance fall back to confidence order.
  size_t next = 0;
  while (chosen.size() < n && chosen.size() < pool.size()) {
    const size_t cur = next;
    used[cur] = 1;
    chosen.push_back(pool[cur]);
    double best = -1;
    for (size_t j = 0; j < pool.size(); ++j) {
      if (used[j]) continue;
      min_dist[j] = std::min(min_dist[j], euclidean_distance(vec[cur], vec[j]));
      if (min_dist[j] > best) {
        best = min_dist[j];
        next = j;
      }
    }
  }
  std::sort(chosen.begin(), chosen.end(), by_confidence);
  return chosen;
}

const char *diversity_name(Diversity d) { return d == Diversity::Off ? "off" : "greedy-max-min"; }

}  // namespace

std::vector<uint64_t> SelectionResult::all_ids() const {
  std::vector<uint64_t> out;
  for (const auto &cls : per_class)
    for (const auto &s : cls) out.push_back(s.id);
  return out;
}

size_t SelectionResult::total() const {
  size_t n = 0;
  for (const auto &cls : per_class) n += cls.size();
  return n;
}

SelectionResult select_top_n(const Dataset &dest_train, const std::map<uint64_t, double> &confidences,
                             const SelectionConfig &cfg,
                             const std::map<uint64_t, std::vector<float>> *projected) {
  if (dest_train.empty()) throw Error("EMPTY_DESTINATION", "destination pool is empty");
  if (cfg.n == 0) throw Error("BAD_CONFIG", "shots per class must be at least 1");
  if (cfg.diversity == Diversity::GreedyMaxMin && projected == nullptr)
    throw Error("BAD_CONFIG", "greedy-max-min diversity needs projected vectors");

  SelectionResult r;
  r.scheme = dest_train.scheme();
  r.config = cfg;
  std::vector<std::vector<ScoredId>> pools(num_classes(r.scheme));
  for (const auto &ex : dest_train) {
    auto it = confidences.find(ex.id);
    if (it == confidences.end())
      throw Error("MISSING_CONFIDENCE", "no confidence for destination id " + std::to_string(ex.id));
    if (!(it->second >= 0.0 && it->second <= 1.0))
      throw Error("BAD_CONFIDENCE", "confidence for id " + std::to_string(ex.id) + " is outside [0, 1]");
    pools[ex.stance.index()].push_back({ex.id, it->second});
  }
  for (auto &pool : pools) {
    std::sort(pool.begin(), pool.end(), by_confidence);
    if (cfg.diversity == Diversity::Off) {
      pool.resize(std::min(pool.size(), cfg.n));
    } else {
      pool.resize(std::min(pool.size(), 3 * cfg.n));
      pool = greedy_max_min(pool, cfg.n, *projected);
    }
    r.per_class.push_back(std::move(pool));
  }
  return r;
}

nlohmann::json to_json(const SelectionResult &r) {
  nlohmann::json classes = nlohmann::json::object();
  for (size_t c = 0; c < r.per_class.size(); ++c) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto &s : r.per_class[c]) list.push_back({{"id", s.id}, {"confidence", s.confidence}});
    classes[class_name(r.scheme, c)] = std::move(list);
  }
  return {{"classes", std::move(classes)},
          {"config",
           {{"n", r.config.n},
            {"diversity", diversity_name(r.config.diversity)},
            {"seed", r.config.seed},
            {"scheme", scheme_name(r.scheme)}}},
          {"checkpoint", r.checkpoint}};
}

SelectionResult selection_from_json(const nlohmann::json &j) {
  SelectionResult r;
  const auto &cfg = j.at("config");
  r.scheme = parse_scheme(cfg.at("scheme").get<std::string>());
  r.config.n = cfg.at("n").get<size_t>();
  r.config.seed = cfg.at("seed").get<uint64_t>();
  const std::string div = cfg.at("diversity").get<std::string>();
  if (div == "off") r.config.diversity = Diversity::Off;
  else if (div == "greedy-max-min") r.config.diversity = Diversity::GreedyMaxMin;
  else throw Error("BAD_SELECTION", "unknown diversity mode '" + div + "'");
  r.checkpoint = j.at("checkpoint").get<std::string>();
  r.per_class.resize(num_classes(r.scheme));
  for (size_t c = 0; c < r.per_class.size(); ++c) {
    const auto &list = j.at("classes").at(class_name(r.scheme, c));
    for (const auto &e : list) r.per_class[c].push_back({e.at("id").get<uint64_t>(), e.at("confidence").get<double>()});
  }
  return r;
}

}  // namespace mlsd
