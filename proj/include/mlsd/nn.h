// include/mlsd/nn.h

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

#ifndef MLSD_NN_H_
#define MLSD_NN_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mlsd/error.h"
#include "mlsd/matrix.h"
#include "mlsd/rng.h"

namespace mlsd {

/// Affine layer y = w x + b, w: out x in.
template <typename T>
struct Dense {
  Matrix<T> w;
  std::vector<T> b;

  size_t in_dim() const { return w.cols; }
  size_t out_dim() const { return w.rows; }
  bool operator==(const Dense &) const = default;
};

/// Glorot-uniform weights in +-sqrt(6 / (in + out)), zero biases.
template <typename T>
Dense<T> init_dense(size_t in, size_t out, Rng &rng) {
  Dense<T> d{Matrix<T>(out, in), std::vector<T>(out, T(0))};
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  for (T &x : d.w.data) x = static_cast<T>(rng.uniform(-limit, limit));
  return d;
}

template <typename T>
Dense<T> zeros_like(const Dense<T> &d) {
  return {Matrix<T>(d.w.rows, d.w.cols), std::vector<T>(d.b.size(), T(0))};
}

template <typename T>
std::vector<std::span<T>> tensors(Dense<T> &d) {
  return {std::span<T>(d.w.data), std::span<T>(d.b)};
}

template <typename T>
bool all_finite(std::span<const T> xs) {
  return std::all_of(xs.begin(), xs.end(), [](T x) { return std::isfinite(x); });
}

/// Hyperparameters shared by every gradient-trained model in the pipeline.
/// Defaults are the metric-learning settings: Adam at 5e-5, batch 64,
/// 10 epochs, margin 1.0.
struct TrainConfig {
  double lr = 5e-5;
  size_t batch_size = 64;
  size_t epochs = 10;
  double margin = 1.0;
  double val_fraction = 0.1;
  size_t patience = 2;
  uint64_t seed = 0;
  size_t hidden_dim = 256;
  size_t proj_dim = 128;

  void validate() const {
    if (!(lr > 0)) throw Error("BAD_CONFIG", "lr must be positive");
    if (!(margin >= 0)) throw Error("BAD_CONFIG", "margin must be non-negative");
    if (!(val_fraction > 0 && val_fraction < 1))
      throw Error("BAD_CONFIG", "val_fraction must lie in (0, 1)");
    if (batch_size == 0) throw Error("BAD_CONFIG", "batch_size must be at least 1");
  }
};

struct EpochRecord {
  size_t epoch = 0;  // 0 is the evaluation before any update
  double train_loss = 0;
  double val_loss = 0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  size_t best_epoch = 0;
  double best_val_loss = 0;
  bool stopped_early = false;
};

/// Adam moments, one buffer per parameter tensor.  Sized on first use.
template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
  uint64_t t = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

/// One bias-corrected Adam update over matching lists of tensors.
template <typename T>
void adam_step(const std::vector<std::span<T>> &params, const std::vector<std::span<T>> &grads,
               AdamState<T> &state, double lr) {
  if (params.size() != grads.size()) throw Error("SHAPE_MISMATCH", "adam: tensor count differs");
  if (state.m.empty()) {
    for (const auto &p : params) {
      state.m.emplace_back(p.size(), T(0));
      state.v.emplace_back(p.size(), T(0));
    }
  }
  if (state.m.size() != params.size()) throw Error("SHAPE_MISMATCH", "adam: state does not match");
  ++state.t;
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.t));
  for (size_t k = 0; k < params.size(); ++k) {
    auto p = params[k];
    auto g = grads[k];
    auto &m = state.m[k];
    auto &v = state.v[k];
    if (g.size() != p.size() || m.size() != p.size())
      throw Error("SHAPE_MISMATCH", "adam: tensor shape differs");
    for (size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i];
      const double mi = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * gi;
      const double vi = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update = lr * (mi / c1) / (std::sqrt(vi / c2) + kAdamEps);
      p[i] = static_cast<T>(p[i] - update);
    }
  }
}

/// Seeded train/validation split of n items.  The validation side holds
/// round(val_fraction * n) items, clamped so both sides are non-empty.
struct Split2 {
  std::vector<size_t> train;
  std::vector<size_t> val;
};

inline Split2 split_train_val(size_t n, double val_fraction, uint64_t seed) {
  if (n < 2) throw Error("TOO_FEW_EXAMPLES", "need at least 2 items to hold out a validation set");
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(mix_seed(seed ^ 0x7661'6c69'6461'7465ULL));
  rng.shuffle(std::span<size_t>(idx));
  size_t n_val = static_cast<size_t>(std::llround(val_fraction * static_cast<double>(n)));
  n_val = std::clamp<size_t>(n_val, 1, n - 1);
  Split2 s;
  s.val.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
  s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

/// Mini-batch loop with early stopping on validation loss.
///
/// `eval(model, indices)` returns the mean loss over `indices`;
/// `step(model, batch)` applies one optimizer update and returns the batch's
/// mean loss before the update.  The model is restored to the epoch with the
/// lowest validation loss (epoch 0 = untrained).  Training stops once the
/// validation loss has not improved for `patience` epochs, or reaches 0.
template <typename Model, typename Eval, typename Step>
TrainHistory train_with_early_stopping(Model &model, const std::vector<size_t> &train_idx,
                                       const std::vector<size_t> &val_idx, const TrainConfig &cfg,
                                       Eval &&eval, Step &&step) {
  auto check = [](double loss, size_t epoch, const char *what) {
    if (!std::isfinite(loss))
      throw Error("NON_FINITE_LOSS", std::string("non-finite ") + what + " loss at epoch " +
                                         std::to_string(epoch) +
                                         "; parameters diverged (try a smaller learning rate)");
  };
  TrainHistory hist;
  const double train0 = eval(model, train_idx), val0 = eval(model, val_idx);
  check(train0, 0, "train");
  check(val0, 0, "validation");
  hist.epochs.push_back({0, train0, val0});
  hist.best_val_loss = val0;
  Model best = model;
  size_t since_best = 0;

  Rng rng(mix_seed(cfg.seed ^ 0x6261'7463'6865'7321ULL));
  std::vector<size_t> order = train_idx;
  for (size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(std::span<size_t>(order));
    double sum = 0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t stop = std::min(order.size(), start + cfg.batch_size);
      std::vector<size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                order.begin() + static_cast<std::ptrdiff_t>(stop));
      const double loss = step(model, batch);
      check(loss, epoch, "batch");
      sum += loss * static_cast<double>(batch.size());
    }
    const double train_loss = sum / static_cast<double>(order.size());
    const double val_loss = eval(model, val_idx);
    check(val_loss, epoch, "validation");
    hist.epochs.push_back({epoch, train_loss, val_loss});
    if (val_loss < hist.best_val_loss) {
      hist.best_val_loss = val_loss;
      hist.best_epoch = epoch;
      best = model;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (hist.best_val_loss == 0.0 || since_best >= cfg.patience) {
      hist.stopped_early = epoch < cfg.epochs;
      break;
    }
  }
  model = std::move(best);
  return hist;
}

}  // namespace mlsd

#endif  // MLSD_NN_H_
