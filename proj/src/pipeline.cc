// src/pipeline.cc

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

#include "mlsd/pipeline.h"

#include <openssl/evp.h>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "mlsd/embed_store.h"
#include "mlsd/error.h"
#include "mlsd/metric_net.h"
#include "mlsd/rng.h"

namespace mlsd {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(const std::string &bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw Error("HASH_ERROR", "SHA-256 computation failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

std::string sha256_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("FILE_NOT_FOUND", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

[[noreturn]] void bad(const std::string &msg) { throw Error("BAD_CONFIG", msg); }

const json &require(const json &j, const char *key, const std::string &where) {
  if (!j.is_object() || !j.contains(key)) throw Error("MISSING_FIELD", where + " lacks \"" + key + "\"");
  return j.at(key);
}

template <typename T>
T get_as(const json &j, const std::string &where) {
  try {
    return j.get<T>();
  } catch (const json::exception &) {
    bad(where + " has the wrong type");
  }
}

void check_keys(const json &j, const std::set<std::string> &allowed, const std::string &where) {
  if (!j.is_object()) bad(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) bad(where + " has unknown key \"" + it.key() + "\"");
}

fs::path resolve(const fs::path &base, const std::string &p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

RoleConfig parse_role(const json &j, const std::string &name, const fs::path &base) {
  check_keys(j, {"target", "files", "members", "subsample", "holdout"}, name);
  RoleConfig r;
  r.target = get_as<std::string>(require(j, "target", name), name + ".target");
  if (r.target.empty()) bad(name + ".target is empty");
  const json &files = require(j, "files", name);
  if (!files.is_array() || files.empty()) bad(name + ".files must be a non-empty array");
  for (const auto &f : files) {
    check_keys(f, {"path", "format", "split"}, name + ".files[]");
    CorpusFile cf;
    cf.path = resolve(base, get_as<std::string>(require(f, "path", name + ".files[]"), name + ".files[].path"));
    cf.format = parse_format(get_as<std::string>(require(f, "format", name + ".files[]"), name + ".files[].format"));
    if (f.contains("split")) cf.split = parse_split(get_as<std::string>(f["split"], name + ".files[].split"));
    r.files.push_back(std::move(cf));
  }
  if (j.contains("members")) r.members = get_as<std::vector<std::string>>(j["members"], name + ".members");
  if (j.contains("subsample")) {
    check_keys(j["subsample"], {"size", "seed"}, name + ".subsample");
    r.subsample = {get_as<size_t>(require(j["subsample"], "size", name + ".subsample"), name + ".subsample.size"),
                   j["subsample"].value("seed", uint64_t{0})};
  }
  if (j.contains("holdout")) {
    check_keys(j["holdout"], {"fraction", "seed"}, name + ".holdout");
    const double frac = get_as<double>(require(j["holdout"], "fraction", name + ".holdout"), name + ".holdout.fraction");
    if (!(frac > 0 && frac < 1)) bad(name + ".holdout.fraction must lie in (0, 1)");
    r.holdout = {frac, j["holdout"].value("seed", uint64_t{0})};
  }
  return r;
}

json role_json(const RoleConfig &r) {
  json files = json::array();
  for (const auto &f : r.files)
    files.push_back({{"format", format_name(f.format)}, {"split", split_name(f.split)}, {"sha256", sha256_file(f.path)}});
  json j = {{"target", r.target}, {"members", r.members}, {"files", files}};
  if (r.subsample) j["subsample"] = {r.subsample->first, r.subsample->second};
  if (r.holdout) j["holdout"] = {r.holdout->first, r.holdout->second};
  return j;
}

}  // namespace

ExperimentConfig load_config(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("PATH_NOT_FOUND", "config file " + path.string() + " does not exist");
  ExperimentConfig c;
  try {
    c.raw = json::parse(in);
  } catch (const json::exception &e) {
    throw Error("CONFIG_PARSE", std::string("config is not valid JSON: ") + e.what());
  }
  const json &j = c.raw;
  check_keys(j, {"name", "output_dir", "source", "destination", "noise", "embeddings", "miner", "metric",
                 "head", "selection", "stance", "regimes", "seeds"},
             "config");
  c.config_path = path;
  c.config_hash = sha256_hex(j.dump());
  const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();

  const std::string out = get_as<std::string>(require(j, "output_dir", "config"), "output_dir");
  const char *root = std::getenv(kOutputRootEnv);
  if (fs::path(out).is_absolute())
    c.output_dir = out;
  else if (root && *root)
    c.output_dir = (fs::path(root) / out).lexically_normal();
  else
    c.output_dir = resolve(base, out);

  c.source = parse_role(require(j, "source", "config"), "source", base);
  c.destination = parse_role(require(j, "destination", "config"), "destination", base);
  c.noise = parse_role(require(j, "noise", "config"), "noise", base);

  const json &emb = require(j, "embeddings", "config");
  check_keys(emb, {"train", "mining"}, "embeddings");
  c.train_embeddings = resolve(base, get_as<std::string>(require(emb, "train", "embeddings"), "embeddings.train"));
  if (emb.contains("mining") && !emb["mining"].is_null())
    c.mining_embeddings = resolve(base, get_as<std::string>(emb["mining"], "embeddings.mining"));

  if (j.contains("miner")) {
    check_keys(j["miner"], {"k", "triplets_per_anchor", "seed"}, "miner");
    c.miner.k = j["miner"].value("k", c.miner.k);
    c.miner.triplets_per_anchor = j["miner"].value("triplets_per_anchor", c.miner.triplets_per_anchor);
    c.miner.seed = j["miner"].value("seed", c.miner.seed);
    if (c.miner.k == 0 || c.miner.triplets_per_anchor == 0) bad("miner.k and miner.triplets_per_anchor must be >= 1");
  }
  try {
    if (j.contains("metric")) c.metric = train_config_from_json(j["metric"]);
    c.head = c.metric;
    if (j.contains("head")) c.head = train_config_from_json(j["head"], c.metric);
    c.metric.validate();
    c.head.validate();
  } catch (const json::exception &e) {
    bad(std::string("metric/head options have the wrong type: ") + e.what());
  }

  if (j.contains("selection")) {
    const json &s = j["selection"];
    check_keys(s, {"shots", "diversity"}, "selection");
    if (s.contains("shots")) c.shots = get_as<std::vector<size_t>>(s["shots"], "selection.shots");
    const std::string div = s.value("diversity", std::string("off"));
    if (div == "off") c.diversity = Diversity::Off;
    else if (div == "greedy-max-min") c.diversity = Diversity::GreedyMaxMin;
    else bad("selection.diversity must be \"off\" or \"greedy-max-min\"");
  }
  if (c.shots.empty()) bad("selection.shots is empty");
  for (size_t n : c.shots)
    if (n == 0) bad("selection.shots entries must be >= 1");

  if (j.contains("stance")) {
    const json &s = j["stance"];
    check_keys(s, {"train", "finetune_epochs", "finetune_lr", "finetune_batch_size", "classifier"}, "stance");
    try {
      if (s.contains("train")) c.stance.train = train_config_from_json(s["train"]);
      c.stance.finetune_epochs = s.value("finetune_epochs", c.stance.finetune_epochs);
      c.stance.finetune_lr = s.value("finetune_lr", c.stance.finetune_lr);
      c.stance.finetune_batch_size = s.value("finetune_batch_size", c.stance.finetune_batch_size);
    } catch (const json::exception &e) {
      bad(std::string("stance options have the wrong type: ") + e.what());
    }
    c.stance.train.validate();
    if (!(c.stance.finetune_lr > 0) || c.stance.finetune_batch_size == 0) bad("stance fine-tuning settings are invalid");
  }
  c.classifier_name = c.stance.train.hidden_dim == 0 ? "linear" : "mlp-" + std::to_string(c.stance.train.hidden_dim);
  if (j.contains("stance") && j["stance"].contains("classifier"))
    c.classifier_name = get_as<std::string>(j["stance"]["classifier"], "stance.classifier");

  if (j.contains("regimes")) {
    c.regimes.clear();
    for (const auto &r : j["regimes"]) c.regimes.push_back(parse_regime(get_as<std::string>(r, "regimes[]")));
    if (c.regimes.empty()) bad("regimes is empty");
  }
  if (j.contains("seeds")) {
    c.seeds = get_as<std::vector<uint64_t>>(j["seeds"], "seeds");
    if (c.seeds.empty()) bad("seeds is empty");
  }
  return c;
}

Dataset load_role(const RoleConfig &role) {
  std::vector<Dataset> parts;
  for (const auto &f : role.files) parts.push_back(load_dataset(f.path, f.format, f.split));
  std::vector<Example> all;
  for (const auto &p : parts) {
    if (p.scheme() != parts[0].scheme())
      throw Error("SCHEME_MISMATCH", "files for target " + role.target + " mix label schemes");
    all.insert(all.end(), p.begin(), p.end());
  }
  Dataset merged(parts[0].scheme(), std::move(all));
  Dataset d = merged;
  if (role.members.empty()) {
    d = filter_target(merged, role.target);
  } else {
    std::vector<Dataset> members;
    for (const auto &m : role.members) members.push_back(filter_target(merged, m));
    d = concat_as(members, role.target);
  }
  if (role.holdout) {
    std::vector<Example> ex(d.begin(), d.end());
    std::vector<size_t> train_pos;
    for (size_t i = 0; i < ex.size(); ++i)
      if (ex[i].split == Split::Train) train_pos.push_back(i);
    Rng rng(mix_seed(role.holdout->second ^ 0x686f6c64ULL));
    rng.shuffle(std::span<size_t>(train_pos));
    const size_t n_test = static_cast<size_t>(std::llround(role.holdout->first * static_cast<double>(train_pos.size())));
    for (size_t i = 0; i < n_test; ++i) ex[train_pos[i]].split = Split::Test;
    d = Dataset(d.scheme(), std::move(ex));
  }
  if (role.subsample) {
    const Dataset train = subsample_balanced(filter_split(d, Split::Train), role.subsample->first, role.subsample->second);
    std::vector<Example> ex(train.begin(), train.end());
    for (const auto &e : d)
      if (e.split == Split::Test) ex.push_back(e);
    d = Dataset(d.scheme(), std::move(ex));
  }
  return d;
}

std::vector<Diagnostic> validate_config(const fs::path &path) {
  std::vector<Diagnostic> diags;
  ExperimentConfig c;
  try {
    c = load_config(path);
  } catch (const Error &e) {
    diags.push_back({e.code(), e.what()});
    return diags;
  }
  auto check_path = [&](const fs::path &p, const std::string &what) {
    if (!fs::exists(p)) diags.push_back({"PATH_NOT_FOUND", what + " " + p.string() + " does not exist"});
  };
  for (const RoleConfig *r : {&c.source, &c.destination, &c.noise})
    for (const auto &f : r->files) check_path(f.path, "corpus file for " + r->target);
  check_path(c.train_embeddings, "embedding store");
  if (c.mining_embeddings) check_path(*c.mining_embeddings, "mining embedding store");

  if (c.noise.target == c.source.target)
    diags.push_back({"NOISE_EQ_SOURCE", "noise target " + c.noise.target + " equals the source target"});
  if (c.noise.target == c.destination.target)
    diags.push_back({"NOISE_EQ_DESTINATION", "noise target " + c.noise.target + " equals the destination target"});
  if (!diags.empty()) return diags;

  std::optional<Dataset> roles[3];
  const RoleConfig *role_cfg[3] = {&c.source, &c.destination, &c.noise};
  for (int i = 0; i < 3; ++i) {
    try {
      roles[i] = load_role(*role_cfg[i]);
    } catch (const Error &e) {
      diags.push_back({"DATA_ERROR", role_cfg[i]->target + ": " + e.what()});
    }
  }
  if (roles[0] && roles[1] && roles[0]->scheme() != roles[1]->scheme())
    diags.push_back({"SCHEME_MISMATCH", std::string("source uses the ") + scheme_name(roles[0]->scheme()) +
                                            " scheme, destination the " + scheme_name(roles[1]->scheme())});
  const char *role_names[3] = {"source", "destination", "noise"};
  for (int i = 0; i < 3; ++i)
    if (roles[i] && filter_split(*roles[i], Split::Train).empty())
      diags.push_back({"EMPTY_ROLE", std::string(role_names[i]) + " target " + role_cfg[i]->target +
                                         " has no training examples"});
  if (roles[1] && filter_split(*roles[1], Split::Test).empty())
    diags.push_back({"EMPTY_ROLE", "destination target " + c.destination.target + " has no test examples"});

  for (const auto &store_path : {std::optional<fs::path>(c.train_embeddings), c.mining_embeddings}) {
    if (!store_path) continue;
    try {
      const EmbeddingStore store = load_store(*store_path);
      for (int i = 0; i < 3; ++i) {
        if (!roles[i]) continue;
        if (store_path != c.train_embeddings && i == 1) continue;  // mining store covers source + noise only
        for (const auto &ex : *roles[i])
          if (!store.contains(ex.id)) {
            diags.push_back({"MISSING_EMBEDDING", store_path->string() + " has no vector for id " +
                                                      std::to_string(ex.id) + " (" + role_cfg[i]->target + ")"});
            break;
          }
      }
    } catch (const Error &e) {
      diags.push_back({"BAD_STORE", store_path->string() + ": " + e.what()});
    }
  }
  return diags;
}

// ---------------------------------------------------------------------------
// Stages

Stage parse_stage(std::string_view name) {
  if (name == "mine") return Stage::Mine;
  if (name == "train-metric") return Stage::TrainMetric;
  if (name == "select") return Stage::Select;
  if (name == "evaluate") return Stage::Evaluate;
  if (name == "all") return Stage::All;
  throw Error("BAD_STAGE", "unknown stage '" + std::string(name) + "'");
}

const char *stage_name(Stage s) {
  switch (s) {
    case Stage::Mine: return "mine";
    case Stage::TrainMetric: return "train-metric";
    case Stage::Select: return "select";
    case Stage::Evaluate: return "evaluate";
    case Stage::All: return "all";
  }
  return "?";
}

namespace {

struct StageInfo {
  Stage stage;
  std::vector<std::string> outputs;
  const char *missing_code;  // raised when a later stage needs these outputs
};

const std::vector<StageInfo> &stage_table() {
  static const std::vector<StageInfo> kStages = {
      {Stage::Mine, {"triplets.csv"}, "MISSING_TRIPLETS"},
      {Stage::TrainMetric, {"checkpoint.json", "checkpoint.bin", "history.csv", "head_history.csv"}, "MISSING_CHECKPOINT"},
      {Stage::Select, {"selection.json"}, "MISSING_SELECTION"},
      {Stage::Evaluate, {"report.json", "report.txt"}, "MISSING_REPORT"},
  };
  return kStages;
}

const StageInfo &info(Stage s) {
  for (const auto &i : stage_table())
    if (i.stage == s) return i;
  throw Error("BAD_STAGE", "no such stage");
}

fs::path manifest_path(const ExperimentConfig &c, Stage s) {
  return c.output_dir / (std::string(stage_name(s)) + ".manifest.json");
}

// Lazily loaded inputs shared by the stages of one invocation.
class Context {
 public:
  explicit Context(const ExperimentConfig &c) : cfg(c) {}

  const ExperimentConfig &cfg;

  const Dataset &role(int i) {
    if (!roles_[i]) roles_[i] = load_role(i == 0 ? cfg.source : i == 1 ? cfg.destination : cfg.noise);
    return *roles_[i];
  }
  const Dataset &source() { return role(0); }
  const Dataset &destination() { return role(1); }
  const Dataset &noise() { return role(2); }

  const EmbeddingStore &train_store() {
    if (!train_store_) train_store_ = load_store(cfg.train_embeddings);
    return *train_store_;
  }
  const EmbeddingStore &mining_store() {
    if (!cfg.mining_embeddings) return train_store();
    if (!mining_store_) mining_store_ = load_store(*cfg.mining_embeddings);
    return *mining_store_;
  }

  const std::string &file_hash(const fs::path &p) {
    auto it = hashes_.find(p.string());
    if (it != hashes_.end()) return it->second;
    return hashes_[p.string()] = sha256_file(p);
  }

  // What each stage's outputs are a function of.
  std::string input_hash(Stage s) {
    json j = {{"stage", stage_name(s)}};
    const fs::path mining = cfg.mining_embeddings.value_or(cfg.train_embeddings);
    switch (s) {
      case Stage::Mine:
        j["source"] = role_json(cfg.source);
        j["noise"] = role_json(cfg.noise);
        j["mining_store"] = file_hash(mining);
        j["miner"] = {cfg.miner.k, cfg.miner.triplets_per_anchor, cfg.miner.seed};
        break;
      case Stage::TrainMetric:
        j["triplets"] = upstream_hash(Stage::Mine);
        j["source"] = role_json(cfg.source);
        j["noise"] = role_json(cfg.noise);
        j["train_store"] = file_hash(cfg.train_embeddings);
        j["metric"] = to_json(cfg.metric);
        j["head"] = to_json(cfg.head);
        break;
      case Stage::Select:
        j["checkpoint"] = upstream_hash(Stage::TrainMetric);
        j["destination"] = role_json(cfg.destination);
        j["train_store"] = file_hash(cfg.train_embeddings);
        j["shots"] = cfg.shots;
        j["diversity"] = cfg.diversity == Diversity::Off ? "off" : "greedy-max-min";
        break;
      case Stage::Evaluate: {
        if (needs_selection()) j["selection"] = upstream_hash(Stage::Select);
        j["source"] = role_json(cfg.source);
        j["destination"] = role_json(cfg.destination);
        j["train_store"] = file_hash(cfg.train_embeddings);
        j["stance"] = {to_json(cfg.stance.train), cfg.stance.finetune_epochs, cfg.stance.finetune_lr,
                       cfg.stance.finetune_batch_size, cfg.classifier_name};
        json regimes = json::array();
        for (Regime r : cfg.regimes) regimes.push_back(regime_name(r));
        j["regimes"] = regimes;
        j["seeds"] = cfg.seeds;
        j["shots"] = cfg.shots;
        break;
      }
      case Stage::All: break;
    }
    return sha256_hex(j.dump());
  }

  bool needs_selection() const {
    for (Regime r : cfg.regimes)
      if (r == Regime::MlsdFewShot) return true;
    return false;
  }

  // Hash of an upstream stage's outputs after checking they exist and are
  // current.
  std::string upstream_hash(Stage s) {
    const StageInfo &si = info(s);
    for (const auto &o : si.outputs)
      if (!fs::exists(cfg.output_dir / o))
        throw Error(si.missing_code, std::string("stage ") + stage_name(s) + " has not produced " + o +
                                         "; run it first");
    if (!is_current(s))
      throw Error("STALE_ARTIFACT", std::string("outputs of stage ") + stage_name(s) +
                                        " were produced from different inputs or modified; rerun it");
    json j = json::object();
    for (const auto &o : si.outputs) j[o] = file_hash(cfg.output_dir / o);
    return sha256_hex(j.dump());
  }

  bool is_current(Stage s) {
    std::ifstream in(manifest_path(cfg, s));
    if (!in) return false;
    json m;
    try {
      m = json::parse(in);
    } catch (const json::exception &) {
      return false;
    }
    if (m.value("input_hash", "") != input_hash(s)) return false;
    for (const auto &o : info(s).outputs) {
      const fs::path p = cfg.output_dir / o;
      if (!fs::exists(p) || !m["outputs"].contains(o) || m["outputs"][o] != file_hash(p)) return false;
    }
    return true;
  }

  void write_manifest(Stage s) {
    json outputs = json::object();
    for (const auto &o : info(s).outputs) {
      hashes_.erase((cfg.output_dir / o).string());
      outputs[o] = file_hash(cfg.output_dir / o);
    }
    json m = {{"stage", stage_name(s)}, {"config_hash", cfg.config_hash}, {"input_hash", input_hash(s)},
              {"outputs", outputs}};
    std::ofstream out(manifest_path(cfg, s), std::ios::binary | std::ios::trunc);
    out << m.dump(2) << '\n';
    if (!out) throw Error("IO_ERROR", "cannot write the manifest for stage " + std::string(stage_name(s)));
  }

  void forget(Stage s) {
    for (const auto &o : info(s).outputs) hashes_.erase((cfg.output_dir / o).string());
  }

 private:
  std::optional<Dataset> roles_[3];
  std::optional<EmbeddingStore> train_store_, mining_store_;
  std::map<std::string, std::string> hashes_;
};

void write_text(const fs::path &p, const std::string &text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error("IO_ERROR", "cannot write " + p.string());
}

std::string hash_comment(const ExperimentConfig &c) { return "config_hash=" + c.config_hash; }

void do_mine(Context &ctx, Exec exec) {
  const Dataset src = filter_split(ctx.source(), Split::Train);
  const Dataset noi = filter_split(ctx.noise(), Split::Train);
  const auto triplets = build_triplets(src, noi, ctx.mining_store(), ctx.cfg.miner, exec);
  save_triplets(triplets, ctx.cfg.output_dir / "triplets.csv", hash_comment(ctx.cfg));
}

// Rows of `d` stacked from the store with is_source flags.
void append_rows(const Dataset &d, const EmbeddingStore &store, uint8_t flag, std::vector<float> &values,
                 std::vector<uint8_t> &labels) {
  const auto ids = d.ids();
  const auto rows = store.gather(ids);
  values.insert(values.end(), rows.begin(), rows.end());
  labels.insert(labels.end(), ids.size(), flag);
}

void do_train_metric(Context &ctx, Exec exec) {
  const auto &cfg = ctx.cfg;
  const auto triplets = load_triplets(cfg.output_dir / "triplets.csv");
  const EmbeddingStore &store = ctx.train_store();
  MetricTrainResult metric = train_metric(triplets, store, cfg.metric, exec);

  std::vector<float> values;
  std::vector<uint8_t> labels;
  append_rows(filter_split(ctx.source(), Split::Train), store, 1, values, labels);
  append_rows(filter_split(ctx.noise(), Split::Train), store, 0, values, labels);
  const Matrix<float> raw(labels.size(), store.dim(), std::move(values));
  HeadTrainResult head = train_classifier_head(project_batch(raw, metric.params, exec), labels, cfg.head, exec);

  MetricModel model{metric.params, head.head, cfg.metric, cfg.head, metric.history, head.history};
  json extra = {{"config_hash", cfg.config_hash}, {"source", cfg.source.target}, {"noise", cfg.noise.target},
                {"binary_accuracy", nullptr}};
  // Source-vs-noise accuracy on the corpus test splits, when both exist.
  std::vector<float> tv;
  std::vector<uint8_t> tl;
  const Dataset src_test = filter_split(ctx.source(), Split::Test), noi_test = filter_split(ctx.noise(), Split::Test);
  if (!src_test.empty() && !noi_test.empty()) {
    append_rows(src_test, store, 1, tv, tl);
    append_rows(noi_test, store, 0, tv, tl);
    const Matrix<float> test(tl.size(), store.dim(), std::move(tv));
    extra["binary_accuracy"] = eval_binary_accuracy(test, tl, model.projection, model.head, exec);
  }
  save_checkpoint(model, cfg.output_dir / "checkpoint", extra);
  save_history(metric.history, cfg.output_dir / "history.csv", hash_comment(cfg));
  save_history(head.history, cfg.output_dir / "head_history.csv", hash_comment(cfg));
}

void do_select(Context &ctx, Exec exec) {
  const auto &cfg = ctx.cfg;
  const MetricModel model = load_checkpoint(cfg.output_dir / "checkpoint");
  const std::string checkpoint_id = ctx.file_hash(cfg.output_dir / "checkpoint.bin");
  const Dataset pool = filter_split(ctx.destination(), Split::Train);
  const auto ids = pool.ids();
  const EmbeddingStore &store = ctx.train_store();
  const auto scores = score_confidences(store, ids, model, exec);
  std::map<uint64_t, std::vector<float>> projected;
  if (cfg.diversity != Diversity::Off) {
    const Matrix<float> y = project_batch(Matrix<float>(ids.size(), store.dim(), store.gather(ids)), model.projection, exec);
    for (size_t i = 0; i < ids.size(); ++i) projected[ids[i]] = std::vector<float>(y.row(i).begin(), y.row(i).end());
  }
  json selections = json::array();
  for (size_t n : cfg.shots) {
    SelectionResult r = select_top_n(pool, scores, {n, cfg.diversity, cfg.miner.seed},
                                     cfg.diversity == Diversity::Off ? nullptr : &projected);
    r.checkpoint = checkpoint_id;
    selections.push_back(to_json(r));
  }
  json out = {{"config_hash", cfg.config_hash}, {"checkpoint", checkpoint_id}, {"selections", selections}};
  write_text(cfg.output_dir / "selection.json", out.dump(2) + "\n");
}

void do_evaluate(Context &ctx, Exec exec) {
  const auto &cfg = ctx.cfg;
  ExperimentSpec spec;
  spec.source_tag = cfg.source.target;
  spec.destination_tag = cfg.destination.target;
  spec.classifier_name = cfg.classifier_name;
  spec.source_train = filter_split(ctx.source(), Split::Train);
  spec.dest_train = filter_split(ctx.destination(), Split::Train);
  spec.dest_test = filter_split(ctx.destination(), Split::Test);
  spec.store = &ctx.train_store();
  spec.regimes = cfg.regimes;
  spec.shots = cfg.shots;
  spec.seeds = cfg.seeds;
  spec.stance = cfg.stance;
  if (ctx.needs_selection()) {
    std::ifstream in(cfg.output_dir / "selection.json");
    const json sel = json::parse(in);
    std::map<size_t, std::vector<uint64_t>> by_n;
    for (const auto &s : sel.at("selections")) {
      const SelectionResult r = selection_from_json(s);
      by_n[r.config.n] = r.all_ids();
    }
    spec.mlsd_shots = [by_n](uint64_t, const std::vector<size_t> &) { return by_n; };
  }
  const ExperimentReport report = run_experiment(spec, exec);
  json j = to_json(report);
  j["config_hash"] = cfg.config_hash;
  write_text(cfg.output_dir / "report.json", j.dump(2) + "\n");
  write_text(cfg.output_dir / "report.txt", "# " + hash_comment(cfg) + "\n" + format_report(report));
}

}  // namespace

std::vector<StageOutcome> run_stage(const ExperimentConfig &cfg, Stage stage, Exec exec) {
  std::vector<Stage> order;
  if (stage == Stage::All)
    order = {Stage::Mine, Stage::TrainMetric, Stage::Select, Stage::Evaluate};
  else
    order = {stage};
  fs::create_directories(cfg.output_dir);
  Context ctx(cfg);
  std::vector<StageOutcome> outcomes;
  for (Stage s : order) {
    if (s == Stage::Select && !ctx.needs_selection() && stage == Stage::All) continue;
    StageOutcome o{s, false, {}};
    for (const auto &out : info(s).outputs) o.outputs.push_back(cfg.output_dir / out);
    // Surfaces missing or stale upstream artifacts before any work is done.
    ctx.input_hash(s);
    if (ctx.is_current(s)) {
      o.cache_hit = true;
      outcomes.push_back(o);
      continue;
    }
    switch (s) {
      case Stage::Mine: do_mine(ctx, exec); break;
      case Stage::TrainMetric: do_train_metric(ctx, exec); break;
      case Stage::Select: do_select(ctx, exec); break;
      case Stage::Evaluate: do_evaluate(ctx, exec); break;
      case Stage::All: break;
    }
    ctx.forget(s);
    ctx.write_manifest(s);
    outcomes.push_back(o);
  }
  return outcomes;
}

}  // namespace mlsd
