// src/embed_store.cc

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

#include "mlsd/embed_store.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "mlsd/error.h"

namespace mlsd {

namespace {

constexpr char kMagic[8] = {'M', 'L', 'S', 'D', 'E', 'M', 'B', '1'};

template <typename U>
void put_le(std::ostream &out, U value) {
  std::array<char, sizeof(U)> bytes;
  for (size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream &in) {
  std::array<unsigned char, sizeof(U)> bytes;
  in.read(reinterpret_cast<char *>(bytes.data()), bytes.size());
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw Error("TRUNCATED", "truncated payload");
  U value = 0;
  for (size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

void check_dims(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size())
    throw Error("DIM_MISMATCH", "vector dimensions differ: " + std::to_string(u.size()) + " vs " +
                                    std::to_string(v.size()));
}

}  // namespace

EmbeddingStore::EmbeddingStore(uint32_t dim, std::vector<uint64_t> ids, std::vector<float> values)
    : dim_(dim), ids_(std::move(ids)), values_(std::move(values)) {
  if (dim_ == 0) throw Error("BAD_DIM", "embedding dimension must be positive");
  if (values_.size() != ids_.size() * dim_)
    throw Error("BAD_SHAPE", "value buffer does not match count x dim");
  index_.reserve(ids_.size());
  for (size_t r = 0; r < ids_.size(); ++r) {
    if (!index_.emplace(ids_[r], r).second)
      throw Error("DUPLICATE_ID", "duplicate id " + std::to_string(ids_[r]));
    for (float x : row(r))
      if (!std::isfinite(x))
        throw Error("NON_FINITE", "non-finite value at id " + std::to_string(ids_[r]));
  }
}

size_t EmbeddingStore::row_of(uint64_t id) const {
  auto it = index_.find(id);
  if (it == index_.end())
    throw Error("MISSING_EMBEDDING", "no embedding for id " + std::to_string(id));
  return it->second;
}

std::vector<float> EmbeddingStore::gather(std::span<const uint64_t> ids) const {
  std::vector<float> out;
  out.reserve(ids.size() * dim_);
  for (uint64_t id : ids) {
    auto r = at(id);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

void write_store(const EmbeddingStore &store, std::ostream &out) {
  out.write(kMagic, sizeof kMagic);
  put_le<uint32_t>(out, store.dim());
  put_le<uint64_t>(out, store.count());
  for (size_t r = 0; r < store.count(); ++r) {
    put_le<uint64_t>(out, store.ids()[r]);
    for (float x : store.row(r)) put_le<uint32_t>(out, std::bit_cast<uint32_t>(x));
  }
}

EmbeddingStore read_store(std::istream &in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (in.gcount() != sizeof magic || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw Error("BAD_MAGIC", "bad magic: not an MLSDEMB1 store");
  const uint32_t dim = get_le<uint32_t>(in);
  const uint64_t count = get_le<uint64_t>(in);
  if (dim == 0) throw Error("BAD_DIM", "embedding dimension must be positive");
  std::vector<uint64_t> ids;
  std::vector<float> values;
  // count comes from the file; grow as records arrive instead of trusting it.
  for (uint64_t r = 0; r < count; ++r) {
    const uint64_t id = get_le<uint64_t>(in);
    ids.push_back(id);
    for (uint32_t k = 0; k < dim; ++k) {
      const float x = std::bit_cast<float>(get_le<uint32_t>(in));
      if (!std::isfinite(x))
        throw Error("NON_FINITE", "non-finite value at id " + std::to_string(id));
      values.push_back(x);
    }
  }
  return EmbeddingStore(dim, std::move(ids), std::move(values));
}

void save_store(const EmbeddingStore &store, const std::filesystem::path &path) {
  if (store.dim() == 0) throw Error("BAD_DIM", "cannot save a store without a dimension");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("IO_ERROR", "cannot write " + path.string());
  write_store(store, out);
  if (!out) throw Error("IO_ERROR", "write failed for " + path.string());
}

EmbeddingStore load_store(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("FILE_NOT_FOUND", "cannot open " + path.string());
  EmbeddingStore store = read_store(in);
  if (in.peek() != std::char_traits<char>::eof())
    throw Error("TRAILING_BYTES", "unexpected bytes after the last record in " + path.string());
  return store;
}

double dot(std::span<const float> u, std::span<const float> v) {
  check_dims(u, v);
  double s = 0.0;
  for (size_t i = 0; i < u.size(); ++i) s += static_cast<double>(u[i]) * v[i];
  return s;
}

double cosine_similarity(std::span<const float> u, std::span<const float> v) {
  check_dims(u, v);
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    uv += static_cast<double>(u[i]) * v[i];
    uu += static_cast<double>(u[i]) * u[i];
    vv += static_cast<double>(v[i]) * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw Error("ZERO_NORM", "cosine similarity of a zero vector");
  return std::clamp(uv / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

double euclidean_distance(std::span<const float> u, std::span<const float> v) {
  check_dims(u, v);
  double s = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    const double d = static_cast<double>(u[i]) - v[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace mlsd
