// tests/test_embed_store.cc

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

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "mlsd/embed_store.h"
#include "mlsd/rng.h"
#include "test_util.h"

using namespace mlsd;
using mlsd::test::error_code;
using mlsd::test::error_message;
using mlsd::test::read_file;
using mlsd::test::TempDir;
using mlsd::test::write_file;

TEST_CASE("file size of two 4-d vectors") {
  TempDir dir("store_size");
  const EmbeddingStore s(4, {10, 11}, {1, 2, 3, 4, 5, 6, 7, 8});
  save_store(s, dir / "s.bin");
  CHECK(std::filesystem::file_size(dir / "s.bin") == 8 + 4 + 8 + 2 * (8 + 16));
  CHECK(store_file_size(4, 2) == 68);
}

TEST_CASE("byte layout is little-endian and fixed") {
  const EmbeddingStore s(2, {0x0102030405060708ULL}, {1.0f, -2.0f});
  std::ostringstream out;
  write_store(s, out);
  const std::string b = out.str();
  REQUIRE(b.size() == store_file_size(2, 1));
  CHECK(b.substr(0, 8) == "MLSDEMB1");
  CHECK(static_cast<unsigned char>(b[8]) == 2);
  CHECK(b[9] == 0);
  CHECK(static_cast<unsigned char>(b[12]) == 1);
  CHECK(static_cast<unsigned char>(b[20]) == 0x08);
  CHECK(static_cast<unsigned char>(b[27]) == 0x01);
  // 1.0f = 0x3f800000, -2.0f = 0xc0000000
  CHECK(static_cast<unsigned char>(b[31]) == 0x3f);
  CHECK(static_cast<unsigned char>(b[30]) == 0x80);
  CHECK(static_cast<unsigned char>(b[35]) == 0xc0);
}

TEST_CASE("empty store round trip") {
  TempDir dir("store_empty");
  const EmbeddingStore s(8, {}, {});
  save_store(s, dir / "e.bin");
  const EmbeddingStore back = load_store(dir / "e.bin");
  CHECK(back.count() == 0);
  CHECK(back.dim() == 8);
  CHECK(back == s);
}

TEST_CASE("round trip preserves every bit") {
  TempDir dir("store_rt");
  Rng rng(3);
  std::vector<uint64_t> ids;
  std::vector<float> values;
  for (uint64_t i = 0; i < 50; ++i) {
    ids.push_back(i * 7919 + 3);
    for (int k = 0; k < 5; ++k) values.push_back(static_cast<float>(rng.normal()));
  }
  values[3] = -0.0f;
  values[4] = std::numeric_limits<float>::denorm_min();
  const EmbeddingStore s(5, ids, values);
  save_store(s, dir / "a.bin");
  const EmbeddingStore back = load_store(dir / "a.bin");
  CHECK(back.ids() == s.ids());
  CHECK(std::memcmp(back.values().data(), s.values().data(), values.size() * sizeof(float)) == 0);
  save_store(back, dir / "b.bin");
  CHECK(read_file(dir / "a.bin") == read_file(dir / "b.bin"));
  CHECK(back.at(ids[10])[2] == values[52]);
}

TEST_CASE("non-finite values are rejected with the offending id") {
  TempDir dir("store_nan");
  const EmbeddingStore s(2, {5, 9}, {1, 2, 3, 4});
  save_store(s, dir / "ok.bin");
  std::string bytes = read_file(dir / "ok.bin");
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(&bytes[20 + 16 + 8 + 4], &nan, 4);  // second record, second component
  write_file(dir / "nan.bin", bytes);
  CHECK(error_code([&] { load_store(dir / "nan.bin"); }) == "NON_FINITE");
  CHECK(error_message([&] { load_store(dir / "nan.bin"); }) == "non-finite value at id 9");
  CHECK(error_code([] { EmbeddingStore(1, {1}, {std::numeric_limits<float>::infinity()}); }) == "NON_FINITE");
}

TEST_CASE("corrupt files") {
  TempDir dir("store_bad");
  const EmbeddingStore s(2, {5, 9}, {1, 2, 3, 4});
  save_store(s, dir / "ok.bin");
  const std::string bytes = read_file(dir / "ok.bin");
  write_file(dir / "magic.bin", "MLSDEMB2" + bytes.substr(8));
  CHECK(error_code([&] { load_store(dir / "magic.bin"); }) == "BAD_MAGIC");
  write_file(dir / "trunc.bin", bytes.substr(0, bytes.size() - 1));
  CHECK(error_code([&] { load_store(dir / "trunc.bin"); }) == "TRUNCATED");
  write_file(dir / "hdr.bin", bytes.substr(0, 10));
  CHECK(error_code([&] { load_store(dir / "hdr.bin"); }) == "TRUNCATED");
  write_file(dir / "extra.bin", bytes + "x");
  CHECK(error_code([&] { load_store(dir / "extra.bin"); }) != "");
  std::string dup = bytes;
  std::memcpy(&dup[20 + 16], &dup[20], 8);
  write_file(dir / "dup.bin", dup);
  CHECK(error_code([&] { load_store(dir / "dup.bin"); }) == "DUPLICATE_ID");
}

TEST_CASE("construction and lookup errors") {
  CHECK(error_code([] { EmbeddingStore(0, {}, {}); }) != "");
  CHECK(error_code([] { EmbeddingStore(2, {1}, {1, 2, 3}); }) != "");
  const EmbeddingStore s(2, {4, 2}, {1, 2, 3, 4});
  CHECK(s.row_of(2) == 1);
  CHECK(error_code([&] { s.row_of(3); }) == "MISSING_EMBEDDING");
  CHECK(s.gather(std::vector<uint64_t>{2, 4}) == std::vector<float>{3, 4, 1, 2});
}

TEST_CASE("distances") {
  const std::vector<float> u{1, 2, 3}, v{4, 5, 6};
  CHECK(cosine_similarity(u, v) == doctest::Approx(0.9746318461970762).epsilon(1e-12));
  CHECK(cosine_similarity(u, u) == 1.0);
  const std::vector<float> neg{-1, -2, -3};
  CHECK(cosine_similarity(u, neg) == -1.0);
  CHECK(euclidean_distance(std::vector<float>{0, 0}, std::vector<float>{3, 4}) == 5.0);
  CHECK(dot(u, v) == 32.0);
  CHECK(error_code([&] { cosine_similarity(u, std::vector<float>{1, 2}); }) == "DIM_MISMATCH");
  CHECK(error_code([&] { cosine_similarity(u, std::vector<float>{0, 0, 0}); }) == "ZERO_NORM");
}
