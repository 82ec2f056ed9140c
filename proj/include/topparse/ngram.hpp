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

#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "topparse/serialize.hpp"
#include "topparse/util.hpp"

namespace topparse {

inline constexpr const char* kLmFormat = "topparse.ngram";
inline constexpr int kLmVersion = 1;
inline constexpr const char* kLmBos = "<s>";
inline constexpr const char* kLmEos = "</s>";
inline constexpr const char* kLmUnk = "<unk>";

// Interpolated Witten-Bell n-gram language model.
//
//   p(w | h) = (c(h,w) + T(h) * p(w | h')) / (c(h) + T(h))
//
// where T(h) is the number of distinct types seen after context h and h'
// drops the oldest context word. The recursion bottoms out at a uniform
// distribution over the vocabulary plus the unknown symbol, so every
// conditional distribution sums to one.
class NGramLM {
 public:
  explicit NGramLM(int order = 3) : order_(order) {
    if (order < 1) throw std::invalid_argument("LM order must be >= 1");
    counts_.resize(order);
  }

  int order() const { return order_; }
  const std::set<std::string>& vocabulary() const { return vocab_; }

  void fit(const std::vector<SerializedParse>& sequences) {
    if (sequences.empty())
      throw std::invalid_argument("cannot train LM on an empty corpus");
    for (const SerializedParse& seq : sequences) {
      std::vector<std::string> padded;
      for (int i = 0; i < order_ - 1; ++i) padded.push_back(kLmBos);
      padded.insert(padded.end(), seq.begin(), seq.end());
      padded.push_back(kLmEos);
      for (std::size_t i = order_ - 1; i < padded.size(); ++i) {
        vocab_.insert(padded[i]);
        for (int len = 0; len < order_; ++len) {
          std::vector<std::string> ctx(padded.begin() + i - len,
                                       padded.begin() + i);
          counts_[len][join(ctx, " ")][padded[i]] += 1;
        }
      }
    }
  }

  // Conditional probability of `word` given up to order-1 previous tokens.
  // Out-of-vocabulary tokens map to the unknown symbol.
  double prob(const std::string& word,
              const std::vector<std::string>& context) const {
    std::vector<std::string> ctx = clamp_context(context);
    return prob_at(map_unk(word), ctx, static_cast<int>(ctx.size()));
  }

  double log_prob(const std::string& word,
                  const std::vector<std::string>& context) const {
    return std::log(prob(word, context));
  }

  // Total log-probability of a sequence, including the end sentinel.
  double score_sequence(const SerializedParse& seq) const {
    std::vector<std::string> padded;
    for (int i = 0; i < order_ - 1; ++i) padded.push_back(kLmBos);
    padded.insert(padded.end(), seq.begin(), seq.end());
    padded.push_back(kLmEos);
    double total = 0.0;
    for (std::size_t i = order_ - 1; i < padded.size(); ++i) {
      std::vector<std::string> ctx(padded.begin() + i - (order_ - 1),
                                   padded.begin() + i);
      total += log_prob(padded[i], ctx);
    }
    return total;
  }

  double perplexity(const std::vector<SerializedParse>& sequences) const {
    double total = 0.0;
    std::size_t events = 0;
    for (const auto& seq : sequences) {
      total += score_sequence(seq);
      events += seq.size() + 1;
    }
    return std::exp(-total / static_cast<double>(events));
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format"] = kLmFormat;
    j["version"] = kLmVersion;
    j["order"] = order_;
    nlohmann::json tables = nlohmann::json::array();
    for (const auto& table : counts_) {
      std::map<std::string, std::map<std::string, long>> sorted;
      for (const auto& [ctx, words] : table)
        sorted[ctx] = std::map<std::string, long>(words.begin(), words.end());
      tables.push_back(sorted);
    }
    j["counts"] = std::move(tables);
    return j;
  }

  static NGramLM from_json(const nlohmann::json& j) {
    if (!j.contains("format") || j["format"] != kLmFormat)
      throw std::runtime_error("not an LM file");
    if (j["version"].get<int>() != kLmVersion)
      throw std::runtime_error("unsupported LM version");
    NGramLM lm(j["order"].get<int>());
    const auto& tables = j["counts"];
    for (std::size_t len = 0; len < tables.size(); ++len)
      for (const auto& [ctx, words] : tables[len].items())
        for (const auto& [w, c] : words.items()) {
          lm.counts_[len][ctx][w] = c.get<long>();
          lm.vocab_.insert(w);
        }
    return lm;
  }

 private:
  std::string map_unk(const std::string& w) const {
    return vocab_.count(w) ? w : kLmUnk;
  }

  std::vector<std::string> clamp_context(
      const std::vector<std::string>& context) const {
    std::size_t keep = std::min<std::size_t>(context.size(), order_ - 1);
    std::vector<std::string> ctx(context.end() - keep, context.end());
    for (std::string& w : ctx)
      if (w != kLmBos) w = map_unk(w);
    return ctx;
  }

  double prob_at(const std::string& word, const std::vector<std::string>& ctx,
                 int len) const {
    if (len == 0) return prob_unigram(word);
    std::vector<std::string> tail(ctx.end() - len, ctx.end());
    auto it = counts_[len].find(join(tail, " "));
    std::vector<std::string> shorter(ctx.end() - (len - 1), ctx.end());
    if (it == counts_[len].end()) return prob_at(word, shorter, len - 1);
    const auto& words = it->second;
    long total = 0;
    for (const auto& [w, c] : words) total += c;
    double types = static_cast<double>(words.size());
    auto wit = words.find(word);
    double count = wit == words.end() ? 0.0 : static_cast<double>(wit->second);
    return (count + types * prob_at(word, shorter, len - 1)) /
           (static_cast<double>(total) + types);
  }

  double prob_unigram(const std::string& word) const {
    const auto& words = counts_[0].at("");
    long total = 0;
    for (const auto& [w, c] : words) total += c;
    double types = static_cast<double>(words.size());
    double uniform = 1.0 / (static_cast<double>(vocab_.size()) + 1.0);
    auto wit = words.find(word);
    double count = wit == words.end() ? 0.0 : static_cast<double>(wit->second);
    return (count + types * uniform) / (static_cast<double>(total) + types);
  }

  int order_;
  // counts_[len]: context of `len` tokens (space-joined) -> word -> count.
  std::vector<std::unordered_map<std::string, std::unordered_map<std::string, long>>>
      counts_;
  std::set<std::string> vocab_;
};

// Trains an LM over the serialized gold trees of a corpus.
inline NGramLM train_lm(const std::vector<SerializedParse>& sequences,
                        int order = 3) {
  NGramLM lm(order);
  lm.fit(sequences);
  return lm;
}

// Total serialized-stream log-probability of a tree under the LM.
inline double lm_score(const NGramLM& lm, const ParseTree& tree) {
  return lm.score_sequence(serialize(tree));
}

// Length-normalized variant used as a ranker feature.
inline double lm_score_normalized(const NGramLM& lm, const ParseTree& tree) {
  SerializedParse seq = serialize(tree);
  return lm.score_sequence(seq) / static_cast<double>(seq.size());
}

inline void save_lm(const NGramLM& lm, const std::filesystem::path& path) {
  atomic_write(path, lm.to_json().dump(2) + "\n");
}

inline NGramLM load_lm(const std::filesystem::path& path) {
  return NGramLM::from_json(nlohmann::json::parse(read_file(path)));
}

}  // namespace topparse
