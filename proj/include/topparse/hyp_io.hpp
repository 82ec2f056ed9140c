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
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "topparse/decode.hpp"
#include "topparse/util.hpp"

namespace topparse {

// Hypothesis JSONL: one utterance per line,
//   {"id": string, "tokens": [string],
//    "hyps": [{"actions": string, "model_score": number}]}
// with an optional "aux" object per hypothesis for named extra scores.
inline std::string beams_to_jsonl(const std::vector<BeamSet>& beams) {
  std::string out;
  for (const BeamSet& bs : beams) {
    nlohmann::json j;
    j["id"] = bs.id;
    j["tokens"] = bs.tokens;
    nlohmann::json hyps = nlohmann::json::array();
    for (const Hypothesis& h : bs.hyps) {
      nlohmann::json jh;
      jh["actions"] = actions_to_string(h.actions);
      jh["model_score"] = h.model_score;
      if (!h.aux.empty()) jh["aux"] = h.aux;
      hyps.push_back(std::move(jh));
    }
    j["hyps"] = std::move(hyps);
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline void write_beams_jsonl(const std::vector<BeamSet>& beams,
                              const std::filesystem::path& path) {
  atomic_write(path, beams_to_jsonl(beams));
}

// Reads and validates hypothesis JSONL. Every action sequence must replay
// into a tree over the line's tokens; offending lines are rejected with
// their line number and reason.
inline std::vector<BeamSet> read_beams_jsonl(
    const std::filesystem::path& path, int max_depth = kDefaultMaxDepth) {
  std::vector<BeamSet> out;
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
    if (!j.contains("id") || !j.contains("tokens") || !j.contains("hyps"))
      throw FileFormatError("missing id/tokens/hyps field", line_no);
    BeamSet bs;
    bs.id = j["id"].get<std::string>();
    bs.tokens = j["tokens"].get<std::vector<std::string>>();
    if (bs.tokens.empty()) throw FileFormatError("empty token list", line_no);
    if (j["hyps"].empty())
      throw FileFormatError("beam has no hypotheses", line_no);
    std::set<ActionSequence> seen;
    for (const auto& jh : j["hyps"]) {
      Hypothesis h;
      try {
        h.actions = actions_from_string(jh.at("actions").get<std::string>());
        actions_to_tree(h.actions, bs.tokens, max_depth);
      } catch (const std::exception& e) {
        throw FileFormatError(std::string("invalid hypothesis: ") + e.what(),
                              line_no);
      }
      if (!seen.insert(h.actions).second)
        throw FileFormatError("duplicate action sequence in beam", line_no);
      h.model_score = jh.at("model_score").get<double>();
      if (h.model_score > 1e-9)
        throw FileFormatError("model_score must be <= 0", line_no);
      if (jh.contains("aux"))
        h.aux = jh["aux"].get<std::map<std::string, double>>();
      bs.hyps.push_back(std::move(h));
    }
    bs.k = static_cast<int>(bs.hyps.size());
    out.push_back(std::move(bs));
  }
  return out;
}

}  // namespace topparse
