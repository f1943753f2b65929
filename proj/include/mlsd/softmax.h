// include/mlsd/softmax.h

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

#ifndef MLSD_SOFTMAX_H_
#define MLSD_SOFTMAX_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mlsd/kernels.h"
#include "mlsd/matrix.h"
#include "mlsd/nn.h"

namespace mlsd {

/// Softmax classifier over fixed input vectors: either a single affine layer
/// or affine -> ReLU -> affine.
template <typename T>
struct SoftmaxClassifier {
  std::optional<Dense<T>> hidden;
  Dense<T> out;

  size_t in_dim() const { return hidden ? hidden->in_dim() : out.in_dim(); }
  size_t num_classes() const { return out.out_dim(); }
  bool operator==(const SoftmaxClassifier &) const = default;
};

/// hidden_dim == 0 gives the single-layer model.
template <typename T>
SoftmaxClassifier<T> init_softmax(size_t in_dim, size_t hidden_dim, size_t classes, uint64_t seed);

template <typename T>
std::vector<std::span<T>> tensors(SoftmaxClassifier<T> &c);

template <typename T>
SoftmaxClassifier<T> zeros_like(const SoftmaxClassifier<T> &c);

template <typename T>
Matrix<T> logits(const SoftmaxClassifier<T> &c, const Matrix<T> &x, Exec exec);

/// Numerically stable softmax of one logit row.
std::vector<double> softmax(std::span<const double> z);

/// Mean cross-entropy of rows `x` against class indices `y`.
template <typename T>
double cross_entropy(const SoftmaxClassifier<T> &c, const Matrix<T> &x, std::span<const size_t> y,
                     Exec exec);

/// Mean cross-entropy and its gradient (written to `grad`, same shapes).
template <typename T>
double cross_entropy_gradient(const SoftmaxClassifier<T> &c, const Matrix<T> &x,
                              std::span<const size_t> y, SoftmaxClassifier<T> &grad, Exec exec);

/// Argmax per row; ties go to the lowest class index.
template <typename T>
std::vector<size_t> predict(const SoftmaxClassifier<T> &c, const Matrix<T> &x, Exec exec);

/// Trains in place with Adam, holding out cfg.val_fraction for early stopping.
TrainHistory fit_softmax(SoftmaxClassifier<float> &c, const Matrix<float> &x,
                         std::span<const size_t> y, const TrainConfig &cfg, Exec exec);

/// Continues training on every row of `x` for exactly `epochs` epochs (no
/// validation hold-out, no early stopping).  Returns per-epoch mean loss.
std::vector<double> continue_training(SoftmaxClassifier<float> &c, const Matrix<float> &x,
                                      std::span<const size_t> y, double lr, size_t batch_size,
                                      size_t epochs, uint64_t seed, Exec exec);

Matrix<float> gather_rows(const Matrix<float> &x, std::span<const size_t> rows);

}  // namespace mlsd

#endif  // MLSD_SOFTMAX_H_
