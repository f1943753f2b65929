// include/mlsd/embed_store.h

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

#ifndef MLSD_EMBED_STORE_H_
#define MLSD_EMBED_STORE_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

namespace mlsd {

/// Dense float32 vectors of one dimension, keyed by example id.
///
/// On-disk layout (little-endian):
///   "MLSDEMB1" | u32 dim | u64 count | count x (u64 id | dim x f32)
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  /// Throws on zero dim, size mismatch, duplicate id or non-finite value.
  EmbeddingStore(uint32_t dim, std::vector<uint64_t> ids, std::vector<float> values);

  uint32_t dim() const { return dim_; }
  size_t count() const { return ids_.size(); }
  const std::vector<uint64_t> &ids() const { return ids_; }
  const std::vector<float> &values() const { return values_; }

  bool contains(uint64_t id) const { return index_.count(id) > 0; }
  /// Row position of `id`; throws Error("MISSING_EMBEDDING").
  size_t row_of(uint64_t id) const;
  std::span<const float> row(size_t r) const {
    return {values_.data() + r * dim_, dim_};
  }
  std::span<const float> at(uint64_t id) const { return row(row_of(id)); }

  /// Copies the rows for `ids`, in order, into one row-major buffer.
  std::vector<float> gather(std::span<const uint64_t> ids) const;

  bool operator==(const EmbeddingStore &o) const {
    return dim_ == o.dim_ && ids_ == o.ids_ && values_ == o.values_;
  }

 private:
  uint32_t dim_ = 0;
  std::vector<uint64_t> ids_;
  std::vector<float> values_;
  std::unordered_map<uint64_t, size_t> index_;
};

void write_store(const EmbeddingStore &store, std::ostream &out);
/// Reads one store section from the current position of `in`.
EmbeddingStore read_store(std::istream &in);

void save_store(const EmbeddingStore &store, const std::filesystem::path &path);
EmbeddingStore load_store(const std::filesystem::path &path);

/// Exact file size for a store of `count` vectors of `dim` floats.
constexpr uint64_t store_file_size(uint32_t dim, uint64_t count) {
  return 8 + 4 + 8 + count * (8 + 4 * static_cast<uint64_t>(dim));
}

// Distances on raw vectors, accumulated in double.

/// dot(u,v) / (|u||v|), clamped to [-1, 1].  Throws on dim mismatch or a
/// zero-norm argument.
double cosine_similarity(std::span<const float> u, std::span<const float> v);
double euclidean_distance(std::span<const float> u, std::span<const float> v);
double dot(std::span<const float> u, std::span<const float> v);

}  // namespace mlsd

#endif  // MLSD_EMBED_STORE_H_
