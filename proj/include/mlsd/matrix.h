// include/mlsd/matrix.h

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

#ifndef MLSD_MATRIX_H_
#define MLSD_MATRIX_H_

#include <cstddef>
#include <span>
#include <vector>

namespace mlsd {

/// Row-major dense matrix.  Owns its storage; copies are deep.
template <typename T>
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(size_t r, size_t c, T fill = T(0)) : rows(r), cols(c), data(r * c, fill) {}
  Matrix(size_t r, size_t c, std::vector<T> values) : rows(r), cols(c), data(std::move(values)) {}

  T &operator()(size_t i, size_t j) { return data[i * cols + j]; }
  const T &operator()(size_t i, size_t j) const { return data[i * cols + j]; }
  std::span<T> row(size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const T> row(size_t i) const { return {data.data() + i * cols, cols}; }

  bool operator==(const Matrix &) const = default;
};

template <typename To, typename From>
Matrix<To> matrix_cast(const Matrix<From> &m) {
  Matrix<To> out(m.rows, m.cols);
  for (size_t i = 0; i < m.data.size(); ++i) out.data[i] = static_cast<To>(m.data[i]);
  return out;
}

}  // namespace mlsd

#endif  // MLSD_MATRIX_H_
