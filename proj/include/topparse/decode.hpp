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
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "topparse/scorer.hpp"

namespace topparse {

// A candidate parse: action sequence, summed per-step log-probability, and
// named auxiliary scores (lm_score, votes, ...).
struct Hypothesis {
  ActionSequence actions;
  double model_score = 0.0;
  std::map<std::string, double> aux;

  friend bool operator==(const Hypothesis&, const Hypothesis&) = default;
};

struct BeamSet {
  std::string id;
  std::vector<std::string> tokens;
  int k = 1;
  std::vector<Hypothesis> hyps;  // ranked best-first

  friend bool operator==(const BeamSet&, const BeamSet&) = default;
};

struct DecodeConfig {
  int max_depth = kDefaultMaxDepth;
};

// Greedy decoding: at each step take the most probable valid action, ties
// broken by the fixed action order.
inline Hypothesis decode_greedy(const ScorerModel& model,
                                const std::vector<std::string>& tokens,
                                const TokenVectors* vectors = nullptr,
                                DecodeConfig cfg = {}) {
  ParserState state(static_cast<int>(tokens.size()), cfg.max_depth);
  Hypothesis hyp;
  while (!state.complete()) {
    auto scores = step_scores(model, state, tokens, hyp.actions, vectors);
    // Scores come in ascending action-id order, so strict > keeps the
    // lowest-id action on ties.
    auto best = scores.front();
    for (const auto& s : scores)
      if (s.second > best.second) best = s;
    const Action& act = model.actions()[best.first];
    state = state.apply(act);
    hyp.actions.push_back(act);
    hyp.model_score += best.second;
  }
  return hyp;
}

// Beam search over action steps. Completed hypotheses stay in the beam at
// their final score until every survivor has completed. Ties are broken by
// generation order (carried-over hypotheses first, then expansions by parent
// rank and action order).
inline BeamSet decode_beam(const ScorerModel& model, const std::string& id,
                           const std::vector<std::string>& tokens, int k,
                           const TokenVectors* vectors = nullptr,
                           DecodeConfig cfg = {}) {
  if (k < 1) throw std::invalid_argument("beam width must be >= 1");
  struct Item {
    ParserState state;
    ActionSequence actions;
    double score = 0.0;
    bool done = false;
  };
  std::vector<Item> beam{
      {ParserState(static_cast<int>(tokens.size()), cfg.max_depth), {}, 0.0}};
  while (true) {
    bool all_done = true;
    for (const Item& it : beam) all_done &= it.done;
    if (all_done) break;
    std::vector<Item> candidates;
    for (const Item& it : beam) {
      if (it.done) {
        candidates.push_back(it);
        continue;
      }
      auto scores = step_scores(model, it.state, tokens, it.actions, vectors);
      for (const auto& [action_id, logp] : scores) {
        const Action& act = model.actions()[action_id];
        Item next{it.state.apply(act), it.actions, it.score + logp};
        next.actions.push_back(act);
        next.done = next.state.complete();
        candidates.push_back(std::move(next));
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Item& a, const Item& b) { return a.score > b.score; });
    if (static_cast<int>(candidates.size()) > k) candidates.resize(k);
    beam = std::move(candidates);
  }
  BeamSet out{id, tokens, k, {}};
  for (Item& it : beam)
    out.hyps.push_back({std::move(it.actions), it.score, {}});
  return out;
}

}  // namespace topparse
