// include/mlsd/kernels.h

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

#ifndef MLSD_KERNELS_H_
#define MLSD_KERNELS_H_

#include <span>

#include "mlsd/matrix.h"

namespace mlsd {

/// Selects the serial reference kernels or their OpenMP counterparts.  Both
/// reduce in the same fixed order, so results are bit-identical.
enum class Exec { Serial, Parallel };

namespace kernels {

// Reference implementations, one thread.
namespace serial {
template <typename T>
void affine(const Matrix<T> &x, const Matrix<T> &w, std::span<const T> b, Matrix<T> &y);
template <typename T>
void accumulate_weight_grad(const Matrix<T> &dy, const Matrix<T> &x, Matrix<T> &dw);
template <typename T>
void accumulate_bias_grad(const Matrix<T> &dy, std::span<T> db);
template <typename T>
void input_grad(const Matrix<T> &dy, const Matrix<T> &w, Matrix<T> &dx);
void cosine_matrix(const Matrix<float> &q, const Matrix<float> &k, Matrix<double> &s);
}  // namespace serial

// OpenMP versions; parallel over output rows, same inner reduction order.
namespace omp {
template <typename T>
void affine(const Matrix<T> &x, const Matrix<T> &w, std::span<const T> b, Matrix<T> &y);
template <typename T>
void accumulate_weight_grad(const Matrix<T> &dy, const Matrix<T> &x, Matrix<T> &dw);
template <typename T>
void accumulate_bias_grad(const Matrix<T> &dy, std::span<T> db);
template <typename T>
void input_grad(const Matrix<T> &dy, const Matrix<T> &w, Matrix<T> &dx);
void cosine_matrix(const Matrix<float> &q, const Matrix<float> &k, Matrix<double> &s);
}  // namespace omp

/// y = x * w^T + b.  x: n x in, w: out x in, y resized to n x out.
template <typename T>
void affine(const Matrix<T> &x, const Matrix<T> &w, std::span<const T> b, Matrix<T> &y,
            Exec exec) {
  exec == Exec::Parallel ? omp::affine(x, w, b, y) : serial::affine(x, w, b, y);
}

/// dw += dy^T * x.  dy: n x out, x: n x in, dw: out x in.  Sums over n in
/// row order.
template <typename T>
void accumulate_weight_grad(const Matrix<T> &dy, const Matrix<T> &x, Matrix<T> &dw, Exec exec) {
  exec == Exec::Parallel ? omp::accumulate_weight_grad(dy, x, dw)
                         : serial::accumulate_weight_grad(dy, x, dw);
}

/// db += column sums of dy.
template <typename T>
void accumulate_bias_grad(const Matrix<T> &dy, std::span<T> db, Exec exec) {
  exec == Exec::Parallel ? omp::accumulate_bias_grad(dy, db) : serial::accumulate_bias_grad(dy, db);
}

/// dx = dy * w.  dy: n x out, w: out x in, dx resized to n x in.
template <typename T>
void input_grad(const Matrix<T> &dy, const Matrix<T> &w, Matrix<T> &dx, Exec exec) {
  exec == Exec::Parallel ? omp::input_grad(dy, w, dx) : serial::input_grad(dy, w, dx);
}

/// s(i, j) = cosine similarity of q row i and k row j, double accumulation.
/// Zero-norm rows give an error.
inline void cosine_matrix(const Matrix<float> &q, const Matrix<float> &k, Matrix<double> &s,
                          Exec exec) {
  exec == Exec::Parallel ? omp::cosine_matrix(q, k, s) : serial::cosine_matrix(q, k, s);
}

/// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int max_threads();

}  // namespace kernels
}  // namespace mlsd

#endif  // MLSD_KERNELS_H_
