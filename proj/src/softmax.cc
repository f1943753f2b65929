// src/softmax.cc

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

#include "mlsd/softmax.h"

#include <algorithm>
#include <cmath>

#include "mlsd/error.h"

namespace mlsd {

namespace {

template <typename T>
void relu_inplace(Matrix<T> &m) {
  for (T &v : m.data) v = v > T(0) ? v : T(0);
}

template <typename T>
void check_labels(const SoftmaxClassifier<T> &c, const Matrix<T> &x, std::span<const size_t> y) {
  if (x.rows != y.size()) throw Error("LENGTH_MISMATCH", "inputs and labels differ in length");
  if (x.cols != c.in_dim())
    throw Error("DIM_MISMATCH", "classifier expects " + std::to_string(c.in_dim()) +
                                    "-dim input, got " + std::to_string(x.cols));
  for (size_t label : y)
    if (label >= c.num_classes()) throw Error("BAD_LABEL", "label outside the classifier's classes");
}

// log-sum-exp of one row, in double.
template <typename T>
double log_partition(std::span<const T> z) {
  double mx = -INFINITY;
  for (T v : z) mx = std::max<double>(mx, v);
  double s = 0;
  for (T v : z) s += std::exp(static_cast<double>(v) - mx);
  return mx + std::log(s);
}

}  // namespace

std::vector<double> softmax(std::span<const double> z) {
  if (z.empty()) return {};
  const double zmax = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0;
  for (size_t i = 0; i < z.size(); ++i) sum += p[i] = std::exp(z[i] - zmax);
  for (double &v : p) v /= sum;
  return p;
}

template <typename T>
SoftmaxClassifier<T> init_softmax(size_t in_dim, size_t hidden_dim, size_t classes, uint64_t seed) {
  if (in_dim == 0 || classes < 2) throw Error("BAD_CONFIG", "classifier needs inputs and >= 2 classes");
  Rng rng(mix_seed(seed ^ 0x736f'6674'6d61'78ULL));
  SoftmaxClassifier<T> c;
  if (hidden_dim > 0) {
    c.hidden = init_dense<T>(in_dim, hidden_dim, rng);
    c.out = init_dense<T>(hidden_dim, classes, rng);
  } else {
    c.out = init_dense<T>(in_dim, classes, rng);
  }
  return c;
}

template <typename T>
std::vector<std::span<T>> tensors(SoftmaxClassifier<T> &c) {
  std::vector<std::span<T>> out;
  if (c.hidden) out = tensors(*c.hidden);
  for (auto s : tensors(c.out)) out.push_back(s);
  return out;
}

template <typename T>
SoftmaxClassifier<T> zeros_like(const SoftmaxClassifier<T> &c) {
  SoftmaxClassifier<T> z;
  if (c.hidden) z.hidden = zeros_like(*c.hidden);
  z.out = zeros_like(c.out);
  return z;
}

template <typename T>
Matrix<T> logits(const SoftmaxClassifier<T> &c, const Matrix<T> &x, Exec exec) {
  Matrix<T> z;
  if (c.hidden) {
    Matrix<T> h;
    kernels::affine(x, c.hidden->w, std::span<const T>(c.hidden->b), h, exec);
    relu_inplace(h);
    kernels::affine(h, c.out.w, std::span<const T>(c.out.b), z, exec);
  } else {
    kernels::affine(x, c.out.w, std::span<const T>(c.out.b), z, exec);
  }
  return z;
}

template <typename T>
double cross_entropy(const SoftmaxClassifier<T> &c, const Matrix<T> &x, std::span<const size_t> y,
                     Exec exec) {
  check_labels(c, x, y);
  if (y.empty()) return 0.0;
  const Matrix<T> z = logits(c, x, exec);
  double sum = 0;
  for (size_t i = 0; i < z.rows; ++i) sum += log_partition<T>(z.row(i)) - static_cast<double>(z(i, y[i]));
  return sum / static_cast<double>(y.size());
}

template <typename T>
double cross_entropy_gradient(const SoftmaxClassifier<T> &c, const Matrix<T> &x,
                              std::span<const size_t> y, SoftmaxClassifier<T> &grad, Exec exec) {
  check_labels(c, x, y);
  grad = zeros_like(c);
  if (y.empty()) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(y.size());

  Matrix<T> pre, h;
  const Matrix<T> *features = &x;
  if (c.hidden) {
    kernels::affine(x, c.hidden->w, std::span<const T>(c.hidden->b), pre, exec);
    h = pre;
    relu_inplace(h);
    features = &h;
  }
  Matrix<T> z;
  kernels::affine(*features, c.out.w, std::span<const T>(c.out.b), z, exec);

  Matrix<T> dz(z.rows, z.cols);
  double sum = 0;
  for (size_t i = 0; i < z.rows; ++i) {
    const double lz = log_partition<T>(z.row(i));
    sum += lz - static_cast<double>(z(i, y[i]));
    for (size_t k = 0; k < z.cols; ++k) {
      const double p = std::exp(static_cast<double>(z(i, k)) - lz);
      dz(i, k) = static_cast<T>((p - (k == y[i] ? 1.0 : 0.0)) * inv_n);
    }
  }
  kernels::accumulate_weight_grad(dz, *features, grad.out.w, exec);
  kernels::accumulate_bias_grad(dz, std::span<T>(grad.out.b), exec);
  if (c.hidden) {
    Matrix<T> dh;
    kernels::input_grad(dz, c.out.w, dh, exec);
    for (size_t i = 0; i < dh.data.size(); ++i)
      if (!(pre.data[i] > T(0))) dh.data[i] = T(0);
    kernels::accumulate_weight_grad(dh, x, grad.hidden->w, exec);
    kernels::accumulate_bias_grad(dh, std::span<T>(grad.hidden->b), exec);
  }
  return sum * inv_n;
}

template <typename T>
std::vector<size_t> predict(const SoftmaxClassifier<T> &c, const Matrix<T> &x, Exec exec) {
  if (x.cols != c.in_dim()) throw Error("DIM_MISMATCH", "classifier input dimension mismatch");
  const Matrix<T> z = logits(c, x, exec);
  std::vector<size_t> out(z.rows);
  for (size_t i = 0; i < z.rows; ++i) {
    auto r = z.row(i);
    out[i] = static_cast<size_t>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

Matrix<float> gather_rows(const Matrix<float> &x, std::span<const size_t> rows) {
  Matrix<float> out(rows.size(), x.cols);
  for (size_t i = 0; i < rows.size(); ++i) std::copy_n(x.row(rows[i]).begin(), x.cols, out.row(i).begin());
  return out;
}

namespace {

std::vector<size_t> gather_labels(std::span<const size_t> y, std::span<const size_t> rows) {
  std::vector<size_t> out;
  out.reserve(rows.size());
  for (size_t r : rows) out.push_back(y[r]);
  return out;
}

}  // namespace

TrainHistory fit_softmax(SoftmaxClassifier<float> &c, const Matrix<float> &x,
                         std::span<const size_t> y, const TrainConfig &cfg, Exec exec) {
  cfg.validate();
  check_labels(c, x, y);
  const Split2 split = split_train_val(x.rows, cfg.val_fraction, cfg.seed);
  AdamState<float> adam;
  SoftmaxClassifier<float> grad;
  auto eval = [&](const SoftmaxClassifier<float> &m, const std::vector<size_t> &idx) {
    return cross_entropy(m, gather_rows(x, idx), gather_labels(y, idx), exec);
  };
  auto step = [&](SoftmaxClassifier<float> &m, const std::vector<size_t> &batch) {
    const double loss = cross_entropy_gradient(m, gather_rows(x, batch), gather_labels(y, batch), grad, exec);
    adam_step(tensors(m), tensors(grad), adam, cfg.lr);
    return loss;
  };
  return train_with_early_stopping(c, split.train, split.val, cfg, eval, step);
}

std::vector<double> continue_training(SoftmaxClassifier<float> &c, const Matrix<float> &x,
                                      std::span<const size_t> y, double lr, size_t batch_size,
                                      size_t epochs, uint64_t seed, Exec exec) {
  check_labels(c, x, y);
  if (batch_size == 0) throw Error("BAD_CONFIG", "batch_size must be at least 1");
  std::vector<double> losses;
  if (epochs == 0 || x.rows == 0) return losses;
  AdamState<float> adam;
  SoftmaxClassifier<float> grad;
  std::vector<size_t> order(x.rows);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed ^ 0x6669'6e65'7475'6e65ULL));
  for (size_t epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(std::span<size_t>(order));
    double sum = 0;
    for (size_t start = 0; start < order.size(); start += batch_size) {
      const size_t stop = std::min(order.size(), start + batch_size);
      const std::span<const size_t> batch(order.data() + start, stop - start);
      const double loss = cross_entropy_gradient(c, gather_rows(x, batch), gather_labels(y, batch), grad, exec);
      if (!std::isfinite(loss)) throw Error("NON_FINITE_LOSS", "non-finite loss while fine-tuning");
      adam_step(tensors(c), tensors(grad), adam, lr);
      sum += loss * static_cast<double>(batch.size());
    }
    losses.push_back(sum / static_cast<double>(order.size()));
  }
  return losses;
}

#define MLSD_INSTANTIATE(T)                                                                        \
  template SoftmaxClassifier<T> init_softmax<T>(size_t, size_t, size_t, uint64_t);                 \
  template std::vector<std::span<T>> tensors<T>(SoftmaxClassifier<T> &);                           \
  template SoftmaxClassifier<T> zeros_like<T>(const SoftmaxClassifier<T> &);                       \
  template Matrix<T> logits<T>(const SoftmaxClassifier<T> &, const Matrix<T> &, Exec);              \
  template double cross_entropy<T>(const SoftmaxClassifier<T> &, const Matrix<T> &,                \
                                   std::span<const size_t>, Exec);                                 \
  template double cross_entropy_gradient<T>(const SoftmaxClassifier<T> &, const Matrix<T> &,       \
                                            std::span<const size_t>, SoftmaxClassifier<T> &, Exec); \
  template std::vector<size_t> predict<T>(const SoftmaxClassifier<T> &, const Matrix<T> &, Exec);
MLSD_INSTANTIATE(float)
MLSD_INSTANTIATE(double)
#undef MLSD_INSTANTIATE

}  // namespace mlsd
