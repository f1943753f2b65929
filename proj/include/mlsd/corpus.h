// include/mlsd/corpus.h

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

#ifndef MLSD_CORPUS_H_
#define MLSD_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mlsd {

/// Stance label vocabularies.  ThreeWay is the SemEval-2016 scheme
/// (FAVOR/AGAINST/NEITHER), FourWay the WT-WT scheme
/// (SUPPORT/REFUTE/COMMENT/UNRELATED).
enum class Scheme { ThreeWay, FourWay };

const char *scheme_name(Scheme s);
Scheme parse_scheme(std::string_view name);
size_t num_classes(Scheme s);
/// Canonical upper-case class name, e.g. class_name(ThreeWay, 2) == "NEITHER".
std::string class_name(Scheme s, size_t index);
/// Classes scored by macro-F1: FAVOR and AGAINST for ThreeWay, all four for
/// FourWay.
std::vector<size_t> classes_of_interest(Scheme s);

class StanceLabel {
 public:
  StanceLabel(Scheme scheme, size_t index);

  /// Case-insensitive; accepts NONE as an alias of NEITHER.  Throws
  /// Error("UNKNOWN_STANCE") for strings outside the scheme.
  static StanceLabel parse(Scheme scheme, std::string_view text);
  /// Tries ThreeWay, then FourWay.
  static std::optional<StanceLabel> parse_any(std::string_view text);

  Scheme scheme() const { return scheme_; }
  size_t index() const { return index_; }
  std::string name() const { return class_name(scheme_, index_); }

  /// Throws Error("SCHEME_MISMATCH") when schemes differ.
  bool operator==(const StanceLabel &other) const;

 private:
  Scheme scheme_;
  size_t index_;
};

enum class Split { Train, Test };
const char *split_name(Split s);
Split parse_split(std::string_view name);

struct Example {
  uint64_t id = 0;
  std::string text;
  std::string target;
  StanceLabel stance{Scheme::ThreeWay, 0};
  Split split = Split::Train;

  bool operator==(const Example &) const = default;
};

/// Immutable, validated list of examples sharing one label scheme.
class Dataset {
 public:
  /// Validates: ids unique, text and target non-empty, one scheme.
  Dataset(Scheme scheme, std::vector<Example> examples);

  Scheme scheme() const { return scheme_; }
  size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }
  const std::vector<Example> &examples() const { return examples_; }
  const Example &operator[](size_t i) const { return examples_[i]; }
  auto begin() const { return examples_.begin(); }
  auto end() const { return examples_.end(); }

  std::vector<uint64_t> ids() const;
  /// Per-class example counts, indexed by class.
  std::vector<size_t> class_counts() const;

  bool operator==(const Dataset &) const = default;

 private:
  Scheme scheme_;
  std::vector<Example> examples_;
};

enum class CorpusFormat { SemevalTsv, WtwtJsonl, GenericCsv };
CorpusFormat parse_format(std::string_view name);
const char *format_name(CorpusFormat f);

/// Reads a corpus file.  Files without an id column get sequential ids
/// from 0; files without a split column are marked `default_split`.
/// SemEval target names are mapped to their short tags (Atheism -> AT ...),
/// WT-WT mergers to their industry (DIS_FOXA -> ENT, the rest -> HLT).
Dataset load_dataset(const std::filesystem::path &path, CorpusFormat format,
                     Split default_split = Split::Train);

/// Writes the generic-csv form; load_dataset(GenericCsv) reads it back
/// unchanged.
void save_dataset(const Dataset &d, const std::filesystem::path &path);

Dataset filter_target(const Dataset &d, std::string_view target);
Dataset filter_split(const Dataset &d, Split split);

/// Concatenates datasets of one scheme and retags every example `target`
/// (used to build the POL domain from HC and DT).
Dataset concat_as(const std::vector<Dataset> &parts, const std::string &target);

/// Class-balanced subsample of `size` examples, input order kept.  Per-class
/// quotas are filled round-robin, largest remaining supply first, so quotas
/// differ by at most one except where a class runs out.  Throws when
/// size > d.size().
Dataset subsample_balanced(const Dataset &d, size_t size, uint64_t seed);

}  // namespace mlsd

#endif  // MLSD_CORPUS_H_
