// tests/test_util.h

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

#ifndef MLSD_TESTS_TEST_UTIL_H_
#define MLSD_TESTS_TEST_UTIL_H_

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "mlsd/corpus.h"
#include "mlsd/error.h"

namespace mlsd::test {

// Fresh directory under the build tree, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string &name) {
    path_ = std::filesystem::temp_directory_path() / ("mlsd_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path &p, const std::string &text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Code of the mlsd::Error thrown by `f`, or "" when nothing is thrown.
template <typename F>
std::string error_code(F &&f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  return "";
}

template <typename F>
std::string error_message(F &&f) {
  try {
    f();
  } catch (const Error &e) {
    return e.what();
  }
  return "";
}

inline Example make_example(uint64_t id, const std::string &target, size_t label,
                            Split split = Split::Train, Scheme scheme = Scheme::ThreeWay) {
  return {id, "text " + std::to_string(id), target, StanceLabel(scheme, label), split};
}

}  // namespace mlsd::test

#endif  // MLSD_TESTS_TEST_UTIL_H_
