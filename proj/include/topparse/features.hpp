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

#include <algorithm>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "topparse/actions.hpp"
#include "topparse/util.hpp"

namespace topparse {

// Per-token real vectors for one utterance, aligned to its token list.
using TokenVectors = std::vector<std::vector<double>>;

struct VectorTable {
  std::unordered_map<std::string, TokenVectors> by_id;

  const TokenVectors* find(const std::string& id) const {
    auto it = by_id.find(id);
    return it == by_id.end() ? nullptr : &it->second;
  }
};

// JSONL: {"id": string, "vectors": [[number]]} aligned to tokens.
inline VectorTable read_vectors_jsonl(const std::filesystem::path& path) {
  VectorTable table;
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
    if (!j.contains("id") || !j.contains("vectors"))
      throw FileFormatError("missing id/vectors field", line_no);
    std::string id = j["id"].get<std::string>();
    if (!table.by_id.emplace(id, j["vectors"].get<TokenVectors>()).second)
      throw FileFormatError("duplicate id '" + id + "'", line_no);
  }
  return table;
}

// Quantile bucketizer for external vectors: each dimension is quantized into
// `num_buckets` buckets with boundaries computed on training data.
struct Bucketizer {
  int num_buckets = 16;
  std::vector<std::vector<double>> boundaries;  // per dim, num_buckets-1 each

  int dims() const { return static_cast<int>(boundaries.size()); }

  int bucket(int dim, double x) const {
    const auto& b = boundaries.at(dim);
    return static_cast<int>(std::upper_bound(b.begin(), b.end(), x) -
                            b.begin());
  }

  static Bucketizer fit(const std::vector<const TokenVectors*>& training,
                        int num_buckets = 16) {
    Bucketizer out;
    out.num_buckets = num_buckets;
    std::size_t dims = 0;
    for (const TokenVectors* tv : training)
      for (const auto& row : *tv) {
        if (dims == 0) dims = row.size();
        if (row.size() != dims)
          throw std::invalid_argument(
              "external vectors have inconsistent dimensionality");
      }
    out.boundaries.resize(dims);
    for (std::size_t d = 0; d < dims; ++d) {
      std::vector<double> values;
      for (const TokenVectors* tv : training)
        for (const auto& row : *tv) values.push_back(row[d]);
      std::sort(values.begin(), values.end());
      for (int k = 1; k < num_buckets; ++k) {
        std::size_t idx = k * values.size() / num_buckets;
        if (idx >= values.size()) idx = values.size() - 1;
        out.boundaries[d].push_back(values[idx]);
      }
    }
    return out;
  }
};

inline void to_json(nlohmann::json& j, const Bucketizer& b) {
  j = nlohmann::json{{"num_buckets", b.num_buckets},
                     {"boundaries", b.boundaries}};
}

inline void from_json(const nlohmann::json& j, Bucketizer& b) {
  j.at("num_buckets").get_to(b.num_buckets);
  j.at("boundaries").get_to(b.boundaries);
}

// Deterministic state features. Templates: innermost two open labels, the
// next three buffer tokens with lowercased and shape variants, the previous
// two actions, innermost child count, stack depth, and quantized external
// vector features for the next buffer token when vectors are supplied.
inline std::vector<std::string> extract_features(
    const ParserState& state, const std::vector<std::string>& tokens,
    const ActionSequence& prev_actions, const TokenVectors* vectors = nullptr,
    const Bucketizer* buckets = nullptr) {
  std::vector<std::string> feats;
  feats.reserve(16);

  const auto& stack = state.stack();
  feats.push_back("s0=" +
                  (stack.empty() ? "<none>" : stack.back().label.str()));
  feats.push_back(
      "s1=" + (stack.size() < 2 ? "<none>" : stack[stack.size() - 2].label.str()));

  for (int i = 0; i < 3; ++i) {
    std::size_t pos = state.cursor() + i;
    std::string tag = "b" + std::to_string(i);
    if (pos < tokens.size()) {
      feats.push_back(tag + "=" + tokens[pos]);
      feats.push_back(tag + "l=" + lowercase_ascii(tokens[pos]));
      feats.push_back(tag + "s=" + word_shape(tokens[pos]));
    } else {
      feats.push_back(tag + "=</s>");
      feats.push_back(tag + "l=</s>");
      feats.push_back(tag + "s=</s>");
    }
  }

  std::size_t na = prev_actions.size();
  feats.push_back("a1=" + (na >= 1 ? prev_actions[na - 1].str() : "<s>"));
  feats.push_back("a2=" + (na >= 2 ? prev_actions[na - 2].str() : "<s>"));

  if (stack.empty()) {
    feats.push_back("cc=<none>");
  } else {
    int cc = stack.back().children;
    feats.push_back(cc >= 5 ? "cc=5+" : "cc=" + std::to_string(cc));
  }
  int d = state.depth();
  feats.push_back(d >= 9 ? "depth=9+" : "depth=" + std::to_string(d));

  if (vectors && buckets && state.cursor() < state.num_tokens() &&
      static_cast<std::size_t>(state.cursor()) < vectors->size()) {
    const auto& row = (*vectors)[state.cursor()];
    int dims = std::min<int>(buckets->dims(), static_cast<int>(row.size()));
    for (int dim = 0; dim < dims; ++dim)
      feats.push_back("ev0:" + std::to_string(dim) + "=" +
                      std::to_string(buckets->bucket(dim, row[dim])));
  }

  return feats;
}

}  // namespace topparse
