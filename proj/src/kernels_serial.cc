// src/kernels_serial.cc

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

#include "kernel_rows.h"
#include "mlsd/kernels.h"

namespace mlsd::kernels::serial {

template <typename T>
void affine(const Matrix<T> &x, const Matrix<T> &w, std::span<const T> b, Matrix<T> &y) {
  detail::check_affine(x, w, b, y);
  for (size_t i = 0; i < x.rows; ++i) detail::affine_row(x, w, b, y, i);
}

template <typename T>
void accumulate_weight_grad(const Matrix<T> &dy, const Matrix<T> &x, Matrix<T> &dw) {
  detail::check_weight_grad(dy, x, dw);
  for (size_t o = 0; o < dw.rows; ++o) detail::weight_grad_row(dy, x, dw, o);
}

template <typename T>
void accumulate_bias_grad(const Matrix<T> &dy, std::span<T> db) {
  if (db.size() != dy.cols) throw Error("DIM_MISMATCH", "bias gradient shapes disagree");
  for (size_t o = 0; o < dy.cols; ++o) detail::bias_grad_col(dy, db, o);
}

template <typename T>
void input_grad(const Matrix<T> &dy, const Matrix<T> &w, Matrix<T> &dx) {
  detail::check_input_grad(dy, w, dx);
  for (size_t n = 0; n < dy.rows; ++n) detail::input_grad_row(dy, w, dx, n);
}

void cosine_matrix(const Matrix<float> &q, const Matrix<float> &k, Matrix<double> &s) {
  detail::check_cosine(q, k, s);
  const auto qn = detail::row_norms(q), kn = detail::row_norms(k);
  for (size_t i = 0; i < q.rows; ++i) detail::cosine_row(q, k, qn, kn, s, i);
}

#define MLSD_INSTANTIATE(T)                                                                  \
  template void affine<T>(const Matrix<T> &, const Matrix<T> &, std::span<const T>, Matrix<T> &); \
  template void accumulate_weight_grad<T>(const Matrix<T> &, const Matrix<T> &, Matrix<T> &);   \
  template void accumulate_bias_grad<T>(const Matrix<T> &, std::span<T>);                       \
  template void input_grad<T>(const Matrix<T> &, const Matrix<T> &, Matrix<T> &);
MLSD_INSTANTIATE(float)
MLSD_INSTANTIATE(double)
#undef MLSD_INSTANTIATE

}  // namespace mlsd::kernels::serial
