// Copyright 2026 The topparse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "topparse/tree.hpp"
#include "topparse/util.hpp"

namespace topparse {

struct CorpusEntry {
  std::string id;
  ParseTree tree;
};

struct Corpus {
  std::vector<CorpusEntry> entries;

  std::size_t size() const { return entries.size(); }
};

struct IngestResult {
  Corpus corpus;
  int kept = 0;
  int dropped_unsupported = 0;
};

// Reads the 3-column TSV corpus format: raw utterance, tokenized utterance,
// bracketed annotation. Ids are 1-based line numbers. When
// `filter_unsupported` is set, entries whose root label name is UNSUPPORTED
// are dropped and counted.
inline IngestResult ingest_tsv(const std::filesystem::path& path,
                               bool filter_unsupported,
                               ParseOptions opts = {}) {
  IngestResult result;
  std::size_t line_no = 0;
  for (const std::string& line : read_lines(path)) {
    ++line_no;
    if (line.empty()) continue;
    auto cols = split_char(line, '\t');
    if (cols.size() != 3)
      throw FileFormatError("expected 3 tab-separated columns, got " +
                                std::to_string(cols.size()),
                            line_no);
    ParseTree tree;
    try {
      tree = parse_bracketed(cols[2], opts);
    } catch (const ParseError& e) {
      throw FileFormatError(std::string("bad annotation: ") + e.what(),
                            line_no);
    }
    if (tree.tokens != split_ws(cols[1]))
      throw FileFormatError(
          "annotation tokens disagree with the tokenized column", line_no);
    if (filter_unsupported && tree.root.label().name == "UNSUPPORTED") {
      ++result.dropped_unsupported;
      continue;
    }
    result.corpus.entries.push_back({std::to_string(line_no), std::move(tree)});
    ++result.kept;
  }
  return result;
}

// JSONL interchange: one {"id", "tokens", "annotation"} object per line.
inline Corpus read_corpus_jsonl(const std::filesystem::path& path,
                                ParseOptions opts = {}) {
  Corpus corpus;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  for (const std::string& line : read_lines(path)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FileFormatError(std::string("bad JSON: ") + e.what(), line_no);
    }
    if (!j.contains("id") || !j.contains("tokens") || !j.contains("annotation"))
      throw FileFormatError("missing id/tokens/annotation field", line_no);
    std::string id = j["id"].get<std::string>();
    if (!seen.insert(id).second)
      throw FileFormatError("duplicate id '" + id + "'", line_no);
    ParseTree tree;
    try {
      tree = parse_bracketed(j["annotation"].get<std::string>(), opts);
    } catch (const ParseError& e) {
      throw FileFormatError(std::string("bad annotation: ") + e.what(),
                            line_no);
    }
    if (tree.tokens != j["tokens"].get<std::vector<std::string>>())
      throw FileFormatError("annotation tokens disagree with tokens field",
                            line_no);
    if (tree.tokens.empty())
      throw FileFormatError("empty token list", line_no);
    corpus.entries.push_back({std::move(id), std::move(tree)});
  }
  return corpus;
}

inline std::string corpus_to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const CorpusEntry& e : corpus.entries) {
    nlohmann::json j;
    j["id"] = e.id;
    j["tokens"] = e.tree.tokens;
    j["annotation"] = render_bracketed(e.tree);
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline void write_corpus_jsonl(const Corpus& corpus,
                               const std::filesystem::path& path) {
  atomic_write(path, corpus_to_jsonl(corpus));
}

}  // namespace topparse
