// src/kernel_rows.h

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

// Per-row bodies shared by the serial and OpenMP kernels so both reduce in
// exactly the same order.

#ifndef MLSD_SRC_KERNEL_ROWS_H_
#define MLSD_SRC_KERNEL_ROWS_H_

#include <algorithm>
#include <cmath>
#include <string>

#include "mlsd/error.h"
#include "mlsd/matrix.h"

namespace mlsd::kernels::detail {

template <typename T>
void check_affine(const Matrix<T> &x, const Matrix<T> &w, std::span<const T> b, Matrix<T> &y) {
  if (x.cols != w.cols || b.size() != w.rows)
    throw Error("DIM_MISMATCH", "affine: input has " + std::to_string(x.cols) +
                                    " columns, layer expects " + std::to_string(w.cols));
  if (y.rows != x.rows || y.cols != w.rows) y = Matrix<T>(x.rows, w.rows);
}

template <typename T>
inline void affine_row(const Matrix<T> &x, const Matrix<T> &w, std::span<const T> b, Matrix<T> &y,
                       size_t i) {
  const T *xi = x.data.data() + i * x.cols;
  T *yi = y.data.data() + i * y.cols;
  for (size_t o = 0; o < w.rows; ++o) {
    const T *wo = w.data.data() + o * w.cols;
    T acc = 0;
    for (size_t k = 0; k < w.cols; ++k) acc += wo[k] * xi[k];
    yi[o] = acc + b[o];
  }
}

template <typename T>
void check_weight_grad(const Matrix<T> &dy, const Matrix<T> &x, const Matrix<T> &dw) {
  if (dy.rows != x.rows || dw.rows != dy.cols || dw.cols != x.cols)
    throw Error("DIM_MISMATCH", "weight gradient shapes disagree");
}

template <typename T>
inline void weight_grad_row(const Matrix<T> &dy, const Matrix<T> &x, Matrix<T> &dw, size_t o) {
  T *dwo = dw.data.data() + o * dw.cols;
  for (size_t n = 0; n < dy.rows; ++n) {
    const T g = dy.data[n * dy.cols + o];
    if (g == T(0)) continue;
    const T *xn = x.data.data() + n * x.cols;
    for (size_t k = 0; k < x.cols; ++k) dwo[k] += g * xn[k];
  }
}

template <typename T>
inline void bias_grad_col(const Matrix<T> &dy, std::span<T> db, size_t o) {
  T acc = 0;
  for (size_t n = 0; n < dy.rows; ++n) acc += dy.data[n * dy.cols + o];
  db[o] += acc;
}

template <typename T>
void check_input_grad(const Matrix<T> &dy, const Matrix<T> &w, Matrix<T> &dx) {
  if (dy.cols != w.rows) throw Error("DIM_MISMATCH", "input gradient shapes disagree");
  if (dx.rows != dy.rows || dx.cols != w.cols) dx = Matrix<T>(dy.rows, w.cols);
}

template <typename T>
inline void input_grad_row(const Matrix<T> &dy, const Matrix<T> &w, Matrix<T> &dx, size_t n) {
  T *dxn = dx.data.data() + n * dx.cols;
  std::fill(dxn, dxn + dx.cols, T(0));
  const T *dyn = dy.data.data() + n * dy.cols;
  for (size_t o = 0; o < w.rows; ++o) {
    const T g = dyn[o];
    if (g == T(0)) continue;
    const T *wo = w.data.data() + o * w.cols;
    for (size_t k = 0; k < w.cols; ++k) dxn[k] += g * wo[k];
  }
}

inline std::vector<double> row_norms(const Matrix<float> &m) {
  std::vector<double> out(m.rows);
  for (size_t i = 0; i < m.rows; ++i) {
    double s = 0;
    for (float v : m.row(i)) s += static_cast<double>(v) * v;
    if (s == 0.0) throw Error("ZERO_NORM", "cosine similarity of a zero vector");
    out[i] = std::sqrt(s);
  }
  return out;
}

inline void cosine_row(const Matrix<float> &q, const Matrix<float> &k, const std::vector<double> &qn,
                       const std::vector<double> &kn, Matrix<double> &s, size_t i) {
  const float *qi = q.data.data() + i * q.cols;
  for (size_t j = 0; j < k.rows; ++j) {
    const float *kj = k.data.data() + j * k.cols;
    double acc = 0;
    for (size_t c = 0; c < q.cols; ++c) acc += static_cast<double>(qi[c]) * kj[c];
    s(i, j) = std::clamp(acc / (qn[i] * kn[j]), -1.0, 1.0);
  }
}

inline void check_cosine(const Matrix<float> &q, const Matrix<float> &k, Matrix<double> &s) {
  if (q.cols != k.cols) throw Error("DIM_MISMATCH", "cosine_matrix: dimensions differ");
  if (s.rows != q.rows || s.cols != k.rows) s = Matrix<double>(q.rows, k.rows);
}

}  // namespace mlsd::kernels::detail

#endif  // MLSD_SRC_KERNEL_ROWS_H_
