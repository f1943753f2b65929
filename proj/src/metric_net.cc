// src/metric_net.cc

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

#include "mlsd/metric_net.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mlsd/error.h"

namespace mlsd {

namespace {

template <typename T>
double sq_distance(std::span<const T> u, std::span<const T> v) {
  double s = 0;
  for (size_t i = 0; i < u.size(); ++i) {
    const double d = static_cast<double>(u[i]) - static_cast<double>(v[i]);
    s += d * d;
  }
  return s;
}

template <typename T>
Matrix<T> stack3(const Matrix<T> &a, const Matrix<T> &p, const Matrix<T> &n) {
  if (a.rows != p.rows || a.rows != n.rows || a.cols != p.cols || a.cols != n.cols)
    throw Error("DIM_MISMATCH", "triplet batch members differ in shape");
  Matrix<T> x(3 * a.rows, a.cols);
  std::copy(a.data.begin(), a.data.end(), x.data.begin());
  std::copy(p.data.begin(), p.data.end(), x.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
  std::copy(n.data.begin(), n.data.end(), x.data.begin() + static_cast<std::ptrdiff_t>(2 * a.data.size()));
  return x;
}

template <typename T>
struct Activations {
  Matrix<T> pre;     // layer1 output before ReLU
  Matrix<T> hidden;  // after ReLU
  Matrix<T> out;
};

template <typename T>
Activations<T> forward(const Matrix<T> &x, const ProjectionParams<T> &p, Exec exec) {
  if (x.cols != p.in_dim())
    throw Error("DIM_MISMATCH", "projection expects " + std::to_string(p.in_dim()) +
                                    "-dim input, got " + std::to_string(x.cols));
  Activations<T> a;
  kernels::affine(x, p.layer1.w, std::span<const T>(p.layer1.b), a.pre, exec);
  a.hidden = a.pre;
  for (T &v : a.hidden.data) v = v > T(0) ? v : T(0);
  kernels::affine(a.hidden, p.layer2.w, std::span<const T>(p.layer2.b), a.out, exec);
  return a;
}

}  // namespace

template <typename T>
ProjectionParams<T> init_projection(size_t d_in, size_t hidden, size_t d_proj, uint64_t seed) {
  if (d_in == 0 || hidden == 0 || d_proj == 0)
    throw Error("BAD_CONFIG", "projection dimensions must be positive");
  Rng rng(mix_seed(seed ^ 0x7072'6f6a'6563'74ULL));
  ProjectionParams<T> p;
  p.layer1 = init_dense<T>(d_in, hidden, rng);
  p.layer2 = init_dense<T>(hidden, d_proj, rng);
  return p;
}

template <typename T>
ProjectionParams<T> zeros_like(const ProjectionParams<T> &p) {
  return {zeros_like(p.layer1), zeros_like(p.layer2)};
}

template <typename T>
std::vector<std::span<T>> tensors(ProjectionParams<T> &p) {
  return {std::span<T>(p.layer1.w.data), std::span<T>(p.layer1.b), std::span<T>(p.layer2.w.data),
          std::span<T>(p.layer2.b)};
}

template <typename T>
std::vector<T> forward_project(std::span<const T> x, const ProjectionParams<T> &p) {
  Matrix<T> in(1, x.size(), std::vector<T>(x.begin(), x.end()));
  Activations<T> a = forward(in, p, Exec::Serial);
  if (!all_finite<T>(a.out.data))
    throw Error("NON_FINITE_OUTPUT", "projection produced a non-finite value; parameters exploded");
  return std::move(a.out.data);
}

template <typename T>
Matrix<T> project_batch(const Matrix<T> &x, const ProjectionParams<T> &p, Exec exec) {
  Activations<T> a = forward(x, p, exec);
  if (!all_finite<T>(a.out.data))
    throw Error("NON_FINITE_OUTPUT", "projection produced a non-finite value; parameters exploded");
  return std::move(a.out);
}

template <typename T>
double triplet_loss(std::span<const T> a, std::span<const T> p, std::span<const T> n, double margin) {
  if (a.size() != p.size() || a.size() != n.size())
    throw Error("DIM_MISMATCH", "triplet members differ in dimension");
  const double d_ap = std::sqrt(sq_distance(a, p));
  const double d_an = std::sqrt(sq_distance(a, n));
  return std::max(0.0, d_ap - d_an + margin);
}

template <typename T>
TripletGradient<T> triplet_batch_gradient(const Matrix<T> &a, const Matrix<T> &p,
                                          const Matrix<T> &n, const ProjectionParams<T> &params,
                                          double margin, Exec exec) {
  const size_t b = a.rows;
  TripletGradient<T> result{0.0, zeros_like(params)};
  if (b == 0) return result;
  const Matrix<T> x = stack3(a, p, n);
  const Activations<T> act = forward(x, params, exec);
  const Matrix<T> &y = act.out;
  const size_t d = y.cols;
  const double inv_b = 1.0 / static_cast<double>(b);

  Matrix<T> dy(y.rows, d);
  double total = 0;
  std::vector<double> u(d), w(d);
  for (size_t i = 0; i < b; ++i) {
    auto ya = y.row(i), yp = y.row(b + i), yn = y.row(2 * b + i);
    const double d_ap = std::sqrt(sq_distance(ya, yp));
    const double d_an = std::sqrt(sq_distance(ya, yn));
    const double loss = d_ap - d_an + margin;
    if (!(loss > 0.0)) continue;
    total += loss;
    for (size_t k = 0; k < d; ++k) {
      u[k] = d_ap > 0 ? (static_cast<double>(ya[k]) - yp[k]) / d_ap : 0.0;
      w[k] = d_an > 0 ? (static_cast<double>(ya[k]) - yn[k]) / d_an : 0.0;
    }
    for (size_t k = 0; k < d; ++k) {
      dy(i, k) = static_cast<T>((u[k] - w[k]) * inv_b);
      dy(b + i, k) = static_cast<T>(-u[k] * inv_b);
      dy(2 * b + i, k) = static_cast<T>(w[k] * inv_b);
    }
  }
  result.loss = total * inv_b;
  if (total == 0.0) return result;

  auto &g = result.grad;
  kernels::accumulate_weight_grad(dy, act.hidden, g.layer2.w, exec);
  kernels::accumulate_bias_grad(dy, std::span<T>(g.layer2.b), exec);
  Matrix<T> dh;
  kernels::input_grad(dy, params.layer2.w, dh, exec);
  for (size_t i = 0; i < dh.data.size(); ++i)
    if (!(act.pre.data[i] > T(0))) dh.data[i] = T(0);
  kernels::accumulate_weight_grad(dh, x, g.layer1.w, exec);
  kernels::accumulate_bias_grad(dh, std::span<T>(g.layer1.b), exec);

  for (auto t : tensors(g))
    if (!all_finite<T>(t))
      throw Error("NON_FINITE_GRADIENT", "triplet gradient is not finite; training is unstable");
  return result;
}

template <typename T>
TripletGradient<T> grad_triplet(std::span<const T> a, std::span<const T> p, std::span<const T> n,
                                const ProjectionParams<T> &params, double margin) {
  if (a.size() != p.size() || a.size() != n.size())
    throw Error("DIM_MISMATCH", "triplet members differ in dimension");
  const Matrix<T> ma(1, a.size(), std::vector<T>(a.begin(), a.end()));
  const Matrix<T> mp(1, p.size(), std::vector<T>(p.begin(), p.end()));
  const Matrix<T> mn(1, n.size(), std::vector<T>(n.begin(), n.end()));
  return triplet_batch_gradient(ma, mp, mn, params, margin, Exec::Serial);
}

template <typename T>
double triplet_batch_loss(const Matrix<T> &a, const Matrix<T> &p, const Matrix<T> &n,
                          const ProjectionParams<T> &params, double margin, Exec exec) {
  if (a.rows == 0) return 0.0;
  const Matrix<T> y = forward(stack3(a, p, n), params, exec).out;
  const size_t b = a.rows;
  double total = 0;
  for (size_t i = 0; i < b; ++i)
    total += triplet_loss<T>(y.row(i), y.row(b + i), y.row(2 * b + i), margin);
  return total / static_cast<double>(b);
}

MetricTrainResult train_metric(const std::vector<Triplet> &triplets, const EmbeddingStore &store,
                               const TrainConfig &cfg, Exec exec) {
  cfg.validate();
  if (triplets.empty()) throw Error("EMPTY_INPUT", "no triplets to train on");
  if (triplets.size() < 2)
    throw Error("TOO_FEW_EXAMPLES", "need at least 2 triplets to hold out a validation set");

  // Resolve every id once; missing embeddings fail here rather than mid-epoch.
  const size_t dim = store.dim();
  std::vector<size_t> ra(triplets.size()), rp(triplets.size()), rn(triplets.size());
  for (size_t i = 0; i < triplets.size(); ++i) {
    ra[i] = store.row_of(triplets[i].anchor);
    rp[i] = store.row_of(triplets[i].positive);
    rn[i] = store.row_of(triplets[i].negative);
  }
  auto gather = [&](const std::vector<size_t> &rows, const std::vector<size_t> &idx) {
    Matrix<float> m(idx.size(), dim);
    for (size_t i = 0; i < idx.size(); ++i) {
      auto src = store.row(rows[idx[i]]);
      std::copy(src.begin(), src.end(), m.row(i).begin());
    }
    return m;
  };

  MetricTrainResult result;
  result.params = init_projection<float>(dim, cfg.hidden_dim, cfg.proj_dim, cfg.seed);
  const Split2 split = split_train_val(triplets.size(), cfg.val_fraction, cfg.seed);
  AdamState<float> adam;
  auto eval = [&](const ProjectionParams<float> &m, const std::vector<size_t> &idx) {
    return triplet_batch_loss(gather(ra, idx), gather(rp, idx), gather(rn, idx), m, cfg.margin, exec);
  };
  auto step = [&](ProjectionParams<float> &m, const std::vector<size_t> &batch) {
    auto g = triplet_batch_gradient(gather(ra, batch), gather(rp, batch), gather(rn, batch), m,
                                    cfg.margin, exec);
    adam_step(tensors(m), tensors(g.grad), adam, cfg.lr);
    return g.loss;
  };
  result.history = train_with_early_stopping(result.params, split.train, split.val, cfg, eval, step);
  return result;
}

HeadTrainResult train_classifier_head(const Matrix<float> &projected,
                                      std::span<const uint8_t> is_source, const TrainConfig &cfg,
                                      Exec exec) {
  if (projected.rows != is_source.size())
    throw Error("LENGTH_MISMATCH", "projections and labels differ in length");
  size_t n_source = 0;
  for (uint8_t s : is_source) n_source += s ? 1 : 0;
  if (n_source == 0 || n_source == is_source.size())
    throw Error("SINGLE_CLASS", "classifier head needs both source and noise examples");
  std::vector<size_t> labels(is_source.size());
  for (size_t i = 0; i < labels.size(); ++i) labels[i] = is_source[i] ? 0 : 1;
  SoftmaxClassifier<float> clf = init_softmax<float>(projected.cols, 0, 2, cfg.seed);
  HeadTrainResult r;
  r.history = fit_softmax(clf, projected, labels, cfg, exec);
  r.head = std::move(clf.out);
  return r;
}

double source_probability(double source_logit, double noise_logit) {
  // softmax index 0 = 1 / (1 + exp(z1 - z0)), stable for either sign.
  const double diff = noise_logit - source_logit;
  if (diff > 0) {
    const double e = std::exp(-diff);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(diff));
}

double confidence(std::span<const float> x, const ProjectionParams<float> &proj,
                  const ClassifierParams &head) {
  const std::vector<float> y = forward_project(x, proj);
  if (head.in_dim() != y.size() || head.out_dim() != 2)
    throw Error("DIM_MISMATCH", "classifier head does not match the projection");
  double z[2];
  for (size_t c = 0; c < 2; ++c) {
    float acc = 0;
    for (size_t k = 0; k < y.size(); ++k) acc += head.w(c, k) * y[k];
    z[c] = acc + head.b[c];
  }
  return source_probability(z[0], z[1]);
}

double eval_binary_accuracy(const Matrix<float> &raw, std::span<const uint8_t> is_source,
                            const ProjectionParams<float> &proj, const ClassifierParams &head,
                            Exec exec) {
  if (raw.rows == 0) throw Error("EMPTY_INPUT", "accuracy of an empty test set");
  if (raw.rows != is_source.size())
    throw Error("LENGTH_MISMATCH", "embeddings and labels differ in length");
  SoftmaxClassifier<float> clf{std::nullopt, head};
  const auto pred = predict(clf, project_batch(raw, proj, exec), exec);
  size_t correct = 0;
  for (size_t i = 0; i < pred.size(); ++i) correct += (pred[i] == 0) == (is_source[i] != 0);
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

std::map<uint64_t, double> score_confidences(const EmbeddingStore &store,
                                             std::span<const uint64_t> ids,
                                             const MetricModel &model, Exec exec) {
  std::map<uint64_t, double> out;
  if (ids.empty()) return out;
  const Matrix<float> x(ids.size(), store.dim(), store.gather(ids));
  SoftmaxClassifier<float> clf{std::nullopt, model.head};
  const Matrix<float> z = logits(clf, project_batch(x, model.projection, exec), exec);
  for (size_t i = 0; i < ids.size(); ++i) out[ids[i]] = source_probability(z(i, 0), z(i, 1));
  return out;
}

nlohmann::json to_json(const TrainConfig &cfg) {
  return {{"lr", cfg.lr},
          {"batch_size", cfg.batch_size},
          {"epochs", cfg.epochs},
          {"margin", cfg.margin},
          {"val_fraction", cfg.val_fraction},
          {"patience", cfg.patience},
          {"seed", cfg.seed},
          {"hidden_dim", cfg.hidden_dim},
          {"proj_dim", cfg.proj_dim}};
}

TrainConfig train_config_from_json(const nlohmann::json &j, TrainConfig c) {
  if (!j.is_object()) throw Error("BAD_CONFIG", "training config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string &k = it.key();
    if (k == "lr") c.lr = it->get<double>();
    else if (k == "batch_size") c.batch_size = it->get<size_t>();
    else if (k == "epochs") c.epochs = it->get<size_t>();
    else if (k == "margin") c.margin = it->get<double>();
    else if (k == "val_fraction") c.val_fraction = it->get<double>();
    else if (k == "patience") c.patience = it->get<size_t>();
    else if (k == "seed") c.seed = it->get<uint64_t>();
    else if (k == "hidden_dim") c.hidden_dim = it->get<size_t>();
    else if (k == "proj_dim") c.proj_dim = it->get<size_t>();
    else throw Error("BAD_CONFIG", "unknown training option '" + k + "'");
  }
  return c;
}

namespace {

struct NamedTensor {
  std::string name;
  size_t rows, cols;
  std::vector<float> *values;
};

std::vector<NamedTensor> named_tensors(MetricModel &m) {
  auto &p = m.projection;
  return {{"W1", p.layer1.w.rows, p.layer1.w.cols, &p.layer1.w.data},
          {"b1", 1, p.layer1.b.size(), &p.layer1.b},
          {"W2", p.layer2.w.rows, p.layer2.w.cols, &p.layer2.w.data},
          {"b2", 1, p.layer2.b.size(), &p.layer2.b},
          {"Wc", m.head.w.rows, m.head.w.cols, &m.head.w.data},
          {"bc", 1, m.head.b.size(), &m.head.b}};
}

std::filesystem::path with_suffix(const std::filesystem::path &base, const char *suffix) {
  return base.string() + suffix;
}

}  // namespace

void save_checkpoint(const MetricModel &model, const std::filesystem::path &base,
                     const nlohmann::json &extra) {
  MetricModel copy = model;
  nlohmann::json tensors_json = nlohmann::json::array();
  std::ofstream blob(with_suffix(base, ".bin"), std::ios::binary | std::ios::trunc);
  if (!blob) throw Error("IO_ERROR", "cannot write " + with_suffix(base, ".bin").string());
  for (const auto &t : named_tensors(copy)) {
    std::vector<uint64_t> ids(t.rows);
    std::iota(ids.begin(), ids.end(), 0);
    write_store(EmbeddingStore(static_cast<uint32_t>(t.cols), std::move(ids), *t.values), blob);
    tensors_json.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  }
  if (!blob) throw Error("IO_ERROR", "write failed for checkpoint blob");

  nlohmann::json manifest = {
      {"format", "mlsd-checkpoint-1"},
      {"blob", with_suffix(base, ".bin").filename().string()},
      {"dims",
       {{"d_in", model.projection.in_dim()},
        {"hidden", model.projection.hidden_dim()},
        {"d_proj", model.projection.proj_dim()}}},
      {"tensors", tensors_json},
      {"seed", model.metric_config.seed},
      {"metric_config", to_json(model.metric_config)},
      {"head_config", to_json(model.head_config)},
      {"epoch", model.metric_history.best_epoch},
      {"val_loss", model.metric_history.best_val_loss},
      {"head_epoch", model.head_history.best_epoch},
      {"head_val_loss", model.head_history.best_val_loss},
  };
  manifest.update(extra);
  std::ofstream out(with_suffix(base, ".json"), std::ios::binary | std::ios::trunc);
  if (!out) throw Error("IO_ERROR", "cannot write " + with_suffix(base, ".json").string());
  out << manifest.dump(2) << '\n';
}

MetricModel load_checkpoint(const std::filesystem::path &base) {
  std::ifstream in(with_suffix(base, ".json"), std::ios::binary);
  if (!in) throw Error("MISSING_CHECKPOINT", "no checkpoint manifest at " + with_suffix(base, ".json").string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw Error("BAD_CHECKPOINT", std::string("checkpoint manifest does not parse: ") + e.what());
  }
  if (manifest.value("format", "") != "mlsd-checkpoint-1")
    throw Error("BAD_CHECKPOINT", "unrecognized checkpoint format");

  MetricModel m;
  m.metric_config = train_config_from_json(manifest.at("metric_config"));
  m.head_config = train_config_from_json(manifest.at("head_config"));
  m.metric_history.best_epoch = manifest.at("epoch").get<size_t>();
  m.metric_history.best_val_loss = manifest.at("val_loss").get<double>();
  m.head_history.best_epoch = manifest.at("head_epoch").get<size_t>();
  m.head_history.best_val_loss = manifest.at("head_val_loss").get<double>();

  std::ifstream blob(with_suffix(base, ".bin"), std::ios::binary);
  if (!blob) throw Error("MISSING_CHECKPOINT", "no checkpoint blob at " + with_suffix(base, ".bin").string());
  const auto &tj = manifest.at("tensors");
  auto &p = m.projection;
  std::vector<std::pair<Matrix<float> *, std::vector<float> *>> slots = {
      {&p.layer1.w, nullptr}, {nullptr, &p.layer1.b}, {&p.layer2.w, nullptr},
      {nullptr, &p.layer2.b}, {&m.head.w, nullptr},   {nullptr, &m.head.b}};
  if (tj.size() != slots.size()) throw Error("BAD_CHECKPOINT", "unexpected tensor count");
  for (size_t k = 0; k < slots.size(); ++k) {
    const size_t rows = tj[k].at("rows").get<size_t>(), cols = tj[k].at("cols").get<size_t>();
    EmbeddingStore section = read_store(blob);
    if (section.count() != rows || section.dim() != cols)
      throw Error("BAD_CHECKPOINT", "tensor " + tj[k].at("name").get<std::string>() +
                                        " does not match its manifest shape");
    if (slots[k].first)
      *slots[k].first = Matrix<float>(rows, cols, section.values());
    else
      *slots[k].second = section.values();
  }
  if (p.layer2.in_dim() != p.hidden_dim() || m.head.in_dim() != p.proj_dim() || m.head.out_dim() != 2)
    throw Error("BAD_CHECKPOINT", "checkpoint tensor shapes are inconsistent");
  return m;
}

void save_history(const TrainHistory &h, const std::filesystem::path &path, const std::string &comment) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("IO_ERROR", "cannot write " + path.string());
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "epoch,train_loss,val_loss\n" << std::setprecision(17);
  for (const auto &e : h.epochs) out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << '\n';
}

#define MLSD_INSTANTIATE(T)                                                                        \
  template ProjectionParams<T> init_projection<T>(size_t, size_t, size_t, uint64_t);               \
  template ProjectionParams<T> zeros_like<T>(const ProjectionParams<T> &);                         \
  template std::vector<std::span<T>> tensors<T>(ProjectionParams<T> &);                            \
  template std::vector<T> forward_project<T>(std::span<const T>, const ProjectionParams<T> &);     \
  template Matrix<T> project_batch<T>(const Matrix<T> &, const ProjectionParams<T> &, Exec);       \
  template double triplet_loss<T>(std::span<const T>, std::span<const T>, std::span<const T>, double); \
  template TripletGradient<T> grad_triplet<T>(std::span<const T>, std::span<const T>,              \
                                              std::span<const T>, const ProjectionParams<T> &, double); \
  template TripletGradient<T> triplet_batch_gradient<T>(const Matrix<T> &, const Matrix<T> &,      \
                                                        const Matrix<T> &, const ProjectionParams<T> &, \
                                                        double, Exec);                             \
  template double triplet_batch_loss<T>(const Matrix<T> &, const Matrix<T> &, const Matrix<T> &,   \
                                        const ProjectionParams<T> &, double, Exec);
MLSD_INSTANTIATE(float)
MLSD_INSTANTIATE(double)
#undef MLSD_INSTANTIATE

}  // namespace mlsd
