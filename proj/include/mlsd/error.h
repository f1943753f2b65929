// include/mlsd/error.h

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

#ifndef MLSD_ERROR_H_
#define MLSD_ERROR_H_

#include <stdexcept>
#include <string>

namespace mlsd {

/// Every failure raised by the library.  `code()` is a short machine-readable
/// tag (e.g. "MALFORMED_ROW", "MISSING_CHECKPOINT") that the CLI surfaces
/// verbatim; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string &message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string &code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace mlsd

#endif  // MLSD_ERROR_H_
