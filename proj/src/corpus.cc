// src/corpus.cc

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

#include "mlsd/corpus.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "mlsd/error.h"
#include "mlsd/rng.h"

namespace mlsd {

namespace {

constexpr std::array<const char *, 3> kThreeWay = {"FAVOR", "AGAINST", "NEITHER"};
constexpr std::array<const char *, 4> kFourWay = {"SUPPORT", "REFUTE", "COMMENT",
                                                  "UNRELATED"};

std::string upper(std::string_view s) {
  std::string out(s);
  for (char &c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("FILE_NOT_FOUND", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// RFC 4180 reader: quoted fields may hold delimiters, newlines and "" escapes.
// Returns rows paired with the 1-based line on which each row starts.
std::vector<std::pair<size_t, std::vector<std::string>>> parse_csv(const std::string &s,
                                                                   char delim) {
  std::vector<std::pair<size_t, std::vector<std::string>>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false, field_started = false;
  size_t line = 1, row_line = 1;
  auto end_row = [&]() {
    row.push_back(std::move(field));
    field.clear();
    if (!(row.size() == 1 && row[0].empty())) rows.emplace_back(row_line, std::move(row));
    row.clear();
    field_started = false;
  };
  for (size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < s.size() && s[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == delim) {
      row.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\r' && i + 1 < s.size() && s[i + 1] == '\n') {
      // swallowed; the '\n' ends the row
    } else if (c == '\n') {
      end_row();
      row_line = ++line;
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw Error("MALFORMED_ROW", "unterminated quote in row at line " +
                                                  std::to_string(row_line));
  if (!field.empty() || !row.empty()) end_row();
  return rows;
}

std::string csv_escape(const std::string &s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

uint64_t parse_id(const std::string &s, size_t line) {
  const std::string t = trim(s);
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw Error("MALFORMED_ROW", "malformed row at line " + std::to_string(line) +
                                     ": bad id '" + t + "'");
  try {
    return std::stoull(t);
  } catch (const std::exception &) {
    throw Error("MALFORMED_ROW", "malformed row at line " + std::to_string(line) +
                                     ": id out of range '" + t + "'");
  }
}

std::string semeval_tag(const std::string &target) {
  static const std::map<std::string, std::string> kTags = {
      {"ATHEISM", "AT"},
      {"CLIMATE CHANGE IS A REAL CONCERN", "CC"},
      {"CLIMATE CHANGE IS REAL CONCERN", "CC"},
      {"FEMINIST MOVEMENT", "FM"},
      {"HILLARY CLINTON", "HC"},
      {"LEGALIZATION OF ABORTION", "LA"},
      {"DONALD TRUMP", "DT"},
  };
  auto it = kTags.find(upper(target));
  return it == kTags.end() ? target : it->second;
}

std::string wtwt_domain(const std::string &merger) {
  static const std::map<std::string, std::string> kDomains = {
      {"DIS_FOXA", "ENT"}, {"CVS_AET", "HLT"}, {"CI_ESRX", "HLT"},
      {"ANTM_CI", "HLT"},  {"AET_HUM", "HLT"},
  };
  auto it = kDomains.find(upper(merger));
  return it == kDomains.end() ? merger : it->second;
}

StanceLabel parse_stance_at(Scheme scheme, const std::string &text, size_t line) {
  try {
    return StanceLabel::parse(scheme, text);
  } catch (const Error &e) {
    throw Error(e.code(), std::string(e.what()) + " at line " + std::to_string(line));
  }
}

Dataset load_semeval(const std::string &content, Split default_split) {
  std::vector<Example> out;
  std::istringstream in(content);
  std::string line;
  size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::string_view rest(line);
    for (size_t p; (p = rest.find('\t')) != std::string_view::npos; rest.remove_prefix(p + 1))
      cols.emplace_back(rest.substr(0, p));
    cols.emplace_back(rest);
    if (!header_seen) {
      if (cols.size() < 4 || trim(cols[0]) != "ID" || trim(cols[1]) != "Target" ||
          trim(cols[2]) != "Tweet" || trim(cols[3]) != "Stance")
        throw Error("MALFORMED_ROW", "malformed row at line 1: expected header ID\\tTarget\\tTweet\\tStance");
      header_seen = true;
      continue;
    }
    if (cols.size() != 4)
      throw Error("MALFORMED_ROW", "malformed row at line " + std::to_string(lineno) +
                                       ": expected 4 columns, got " + std::to_string(cols.size()));
    Example ex;
    ex.id = parse_id(cols[0], lineno);
    ex.target = semeval_tag(trim(cols[1]));
    ex.text = cols[2];
    ex.stance = parse_stance_at(Scheme::ThreeWay, trim(cols[3]), lineno);
    ex.split = default_split;
    out.push_back(std::move(ex));
  }
  return Dataset(Scheme::ThreeWay, std::move(out));
}

Dataset load_wtwt(const std::string &content, Split default_split) {
  std::vector<Example> out;
  std::istringstream in(content);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto bad = [&](const std::string &why) {
      return Error("MALFORMED_ROW", "malformed row at line " + std::to_string(lineno) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      throw bad(e.what());
    }
    if (!j.is_object()) throw bad("not a JSON object");
    for (const char *key : {"tweet_id", "text", "merger", "stance"})
      if (!j.contains(key)) throw bad(std::string("missing key ") + key);
    Example ex;
    const auto &tid = j["tweet_id"];
    if (tid.is_number_unsigned())
      ex.id = tid.get<uint64_t>();
    else if (tid.is_string())
      ex.id = parse_id(tid.get<std::string>(), lineno);
    else
      throw bad("tweet_id must be a non-negative integer");
    if (!j["text"].is_string() || !j["merger"].is_string() || !j["stance"].is_string())
      throw bad("text, merger and stance must be strings");
    ex.text = j["text"].get<std::string>();
    ex.target = wtwt_domain(j["merger"].get<std::string>());
    ex.stance = parse_stance_at(Scheme::FourWay, j["stance"].get<std::string>(), lineno);
    ex.split = default_split;
    out.push_back(std::move(ex));
  }
  return Dataset(Scheme::FourWay, std::move(out));
}

Dataset load_generic(const std::string &content, Split default_split) {
  const auto rows = parse_csv(content, ',');
  if (rows.empty()) throw Error("EMPTY_FILE", "empty file");
  const auto &header = rows[0].second;
  std::map<std::string, size_t> col;
  for (size_t i = 0; i < header.size(); ++i) col[trim(header[i])] = i;
  for (const char *key : {"text", "target", "stance"})
    if (!col.count(key))
      throw Error("MALFORMED_ROW", std::string("malformed row at line 1: header lacks column ") + key);
  const bool has_id = col.count("id") > 0, has_split = col.count("split") > 0;

  std::optional<Scheme> scheme;
  std::vector<Example> out;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto &[line, fields] = rows[r];
    if (fields.size() != header.size())
      throw Error("MALFORMED_ROW", "malformed row at line " + std::to_string(line) + ": expected " +
                                       std::to_string(header.size()) + " columns, got " +
                                       std::to_string(fields.size()));
    Example ex;
    ex.id = has_id ? parse_id(fields[col["id"]], line) : out.size();
    ex.text = fields[col["text"]];
    ex.target = trim(fields[col["target"]]);
    const std::string stance = trim(fields[col["stance"]]);
    if (!scheme) {
      auto label = StanceLabel::parse_any(stance);
      if (!label)
        throw Error("UNKNOWN_STANCE", "unknown stance string '" + stance + "' at line " +
                                          std::to_string(line));
      scheme = label->scheme();
    }
    ex.stance = parse_stance_at(*scheme, stance, line);
    ex.split = default_split;
    if (has_split) {
      try {
        ex.split = parse_split(trim(fields[col["split"]]));
      } catch (const Error &) {
        throw Error("MALFORMED_ROW", "malformed row at line " + std::to_string(line) + ": bad split");
      }
    }
    out.push_back(std::move(ex));
  }
  return Dataset(scheme.value_or(Scheme::ThreeWay), std::move(out));
}

}  // namespace

const char *scheme_name(Scheme s) { return s == Scheme::ThreeWay ? "three-way" : "four-way"; }

Scheme parse_scheme(std::string_view name) {
  if (name == "three-way") return Scheme::ThreeWay;
  if (name == "four-way") return Scheme::FourWay;
  throw Error("BAD_SCHEME", "unknown label scheme '" + std::string(name) + "'");
}

size_t num_classes(Scheme s) { return s == Scheme::ThreeWay ? kThreeWay.size() : kFourWay.size(); }

std::string class_name(Scheme s, size_t index) {
  if (index >= num_classes(s)) throw Error("BAD_LABEL", "class index out of range");
  return s == Scheme::ThreeWay ? kThreeWay[index] : kFourWay[index];
}

std::vector<size_t> classes_of_interest(Scheme s) {
  if (s == Scheme::ThreeWay) return {0, 1};
  return {0, 1, 2, 3};
}

StanceLabel::StanceLabel(Scheme scheme, size_t index) : scheme_(scheme), index_(index) {
  if (index >= num_classes(scheme)) throw Error("BAD_LABEL", "class index out of range");
}

StanceLabel StanceLabel::parse(Scheme scheme, std::string_view text) {
  std::string u = upper(trim(text));
  if (scheme == Scheme::ThreeWay && u == "NONE") u = "NEITHER";
  for (size_t i = 0; i < num_classes(scheme); ++i)
    if (u == class_name(scheme, i)) return StanceLabel(scheme, i);
  throw Error("UNKNOWN_STANCE", "unknown stance string '" + std::string(text) + "' for " +
                                    scheme_name(scheme) + " scheme");
}

std::optional<StanceLabel> StanceLabel::parse_any(std::string_view text) {
  for (Scheme s : {Scheme::ThreeWay, Scheme::FourWay}) {
    try {
      return parse(s, text);
    } catch (const Error &) {
    }
  }
  return std::nullopt;
}

bool StanceLabel::operator==(const StanceLabel &other) const {
  if (scheme_ != other.scheme_)
    throw Error("SCHEME_MISMATCH", "comparing labels of different schemes");
  return index_ == other.index_;
}

const char *split_name(Split s) { return s == Split::Train ? "train" : "test"; }

Split parse_split(std::string_view name) {
  const std::string u = upper(name);
  if (u == "TRAIN") return Split::Train;
  if (u == "TEST") return Split::Test;
  throw Error("BAD_SPLIT", "unknown split '" + std::string(name) + "'");
}

Dataset::Dataset(Scheme scheme, std::vector<Example> examples)
    : scheme_(scheme), examples_(std::move(examples)) {
  std::unordered_set<uint64_t> seen;
  seen.reserve(examples_.size());
  for (const auto &ex : examples_) {
    if (ex.stance.scheme() != scheme_)
      throw Error("SCHEME_MISMATCH", "example " + std::to_string(ex.id) + " has a " +
                                         scheme_name(ex.stance.scheme()) + " label in a " +
                                         scheme_name(scheme_) + " dataset");
    if (!seen.insert(ex.id).second)
      throw Error("DUPLICATE_ID", "duplicate example id " + std::to_string(ex.id));
    if (ex.text.empty()) throw Error("EMPTY_TEXT", "example " + std::to_string(ex.id) + " has empty text");
    if (ex.target.empty())
      throw Error("EMPTY_TARGET", "example " + std::to_string(ex.id) + " has empty target");
  }
}

std::vector<uint64_t> Dataset::ids() const {
  std::vector<uint64_t> out;
  out.reserve(examples_.size());
  for (const auto &ex : examples_) out.push_back(ex.id);
  return out;
}

std::vector<size_t> Dataset::class_counts() const {
  std::vector<size_t> counts(num_classes(scheme_), 0);
  for (const auto &ex : examples_) ++counts[ex.stance.index()];
  return counts;
}

CorpusFormat parse_format(std::string_view name) {
  if (name == "semeval-tsv") return CorpusFormat::SemevalTsv;
  if (name == "wtwt-jsonl") return CorpusFormat::WtwtJsonl;
  if (name == "generic-csv") return CorpusFormat::GenericCsv;
  throw Error("BAD_FORMAT", "unknown corpus format '" + std::string(name) + "'");
}

const char *format_name(CorpusFormat f) {
  switch (f) {
    case CorpusFormat::SemevalTsv: return "semeval-tsv";
    case CorpusFormat::WtwtJsonl: return "wtwt-jsonl";
    case CorpusFormat::GenericCsv: return "generic-csv";
  }
  return "?";
}

Dataset load_dataset(const std::filesystem::path &path, CorpusFormat format, Split default_split) {
  const std::string content = read_file(path);
  if (trim(content).empty()) throw Error("EMPTY_FILE", "empty file");
  switch (format) {
    case CorpusFormat::SemevalTsv: return load_semeval(content, default_split);
    case CorpusFormat::WtwtJsonl: return load_wtwt(content, default_split);
    case CorpusFormat::GenericCsv: return load_generic(content, default_split);
  }
  throw Error("BAD_FORMAT", "unknown corpus format");
}

void save_dataset(const Dataset &d, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IO_ERROR", "cannot write " + path.string());
  out << "id,text,target,stance,split\n";
  for (const auto &ex : d)
    out << ex.id << ',' << csv_escape(ex.text) << ',' << csv_escape(ex.target) << ','
        << ex.stance.name() << ',' << split_name(ex.split) << '\n';
  if (!out) throw Error("IO_ERROR", "write failed for " + path.string());
}

Dataset filter_target(const Dataset &d, std::string_view target) {
  std::vector<Example> out;
  for (const auto &ex : d)
    if (ex.target == target) out.push_back(ex);
  return Dataset(d.scheme(), std::move(out));
}

Dataset filter_split(const Dataset &d, Split split) {
  std::vector<Example> out;
  for (const auto &ex : d)
    if (ex.split == split) out.push_back(ex);
  return Dataset(d.scheme(), std::move(out));
}

Dataset concat_as(const std::vector<Dataset> &parts, const std::string &target) {
  if (parts.empty()) throw Error("EMPTY_INPUT", "nothing to concatenate");
  std::vector<Example> out;
  for (const auto &part : parts) {
    if (part.scheme() != parts[0].scheme())
      throw Error("SCHEME_MISMATCH", "cannot concatenate datasets of different schemes");
    for (Example ex : part) {
      ex.target = target;
      out.push_back(std::move(ex));
    }
  }
  return Dataset(parts[0].scheme(), std::move(out));
}

Dataset subsample_balanced(const Dataset &d, size_t size, uint64_t seed) {
  if (size > d.size())
    throw Error("SUBSAMPLE_TOO_LARGE", "requested " + std::to_string(size) +
                                           " examples from a dataset of " + std::to_string(d.size()));
  const size_t classes = num_classes(d.scheme());
  std::vector<std::vector<size_t>> members(classes);
  for (size_t i = 0; i < d.size(); ++i) members[d[i].stance.index()].push_back(i);

  std::vector<size_t> quota(classes, 0);
  size_t remaining = size;
  while (remaining > 0) {
    std::vector<size_t> active;
    for (size_t c = 0; c < classes; ++c)
      if (quota[c] < members[c].size()) active.push_back(c);
    std::stable_sort(active.begin(), active.end(), [&](size_t a, size_t b) {
      return members[a].size() - quota[a] > members[b].size() - quota[b];
    });
    for (size_t c : active) {
      if (remaining == 0) break;
      ++quota[c];
      --remaining;
    }
  }

  std::vector<char> keep(d.size(), 0);
  for (size_t c = 0; c < classes; ++c) {
    Rng rng(mix_seed(seed ^ (0x5bd1e995ULL * (c + 1))));
    rng.shuffle(std::span<size_t>(members[c]));
    for (size_t i = 0; i < quota[c]; ++i) keep[members[c][i]] = 1;
  }
  std::vector<Example> out;
  out.reserve(size);
  for (size_t i = 0; i < d.size(); ++i)
    if (keep[i]) out.push_back(d[i]);
  return Dataset(d.scheme(), std::move(out));
}

}  // namespace mlsd
