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

#include <random>
#include <string>
#include <vector>

#include "topparse/actions.hpp"
#include "topparse/corpus.hpp"
#include "topparse/tree.hpp"

namespace topparse {

struct RandomTreeParams {
  int min_tokens = 1;
  int max_tokens = 12;
  int num_intents = 3;
  int num_slots = 3;
  int max_depth = 5;
  std::vector<std::string> vocab = {"alpha", "bravo", "charlie", "delta",
                                    "echo",  "fox",   "golf",    "hotel"};
};

// Uniformly-seeded random valid tree, built by a random walk over the valid
// actions. Shift/reduce/open odds are weighted to keep shapes shallow-ish.
inline ParseTree random_tree(std::mt19937_64& rng,
                             const RandomTreeParams& params = {}) {
  std::vector<Label> intents, slots;
  for (int i = 0; i < params.num_intents; ++i)
    intents.push_back({LabelKind::Intent, "I" + std::to_string(i)});
  for (int i = 0; i < params.num_slots; ++i)
    slots.push_back({LabelKind::Slot, "S" + std::to_string(i)});

  std::uniform_int_distribution<int> n_dist(params.min_tokens,
                                            params.max_tokens);
  int n = n_dist(rng);
  std::vector<std::string> tokens;
  std::uniform_int_distribution<std::size_t> word(0, params.vocab.size() - 1);
  for (int i = 0; i < n; ++i) tokens.push_back(params.vocab[word(rng)]);

  ParserState state(n, params.max_depth);
  ActionSequence actions;
  while (!state.complete()) {
    ValidActions v = valid_actions(state);
    std::vector<std::pair<Action, double>> options;
    if (v.shift) options.push_back({Action::shift(), 5.0});
    if (v.reduce) options.push_back({Action::reduce(), 3.0});
    if (v.open_intent)
      for (const Label& l : intents) options.push_back({Action::open(l), 0.8});
    if (v.open_slot)
      for (const Label& l : slots) options.push_back({Action::open(l), 0.8});
    double total = 0.0;
    for (const auto& [a, w] : options) total += w;
    std::uniform_real_distribution<double> pick(0.0, total);
    double x = pick(rng);
    Action chosen = options.back().first;
    for (const auto& [a, w] : options) {
      if (x < w) {
        chosen = a;
        break;
      }
      x -= w;
    }
    state = state.apply(chosen);
    actions.push_back(chosen);
  }
  return actions_to_tree(actions, tokens, params.max_depth);
}

struct GrammarParams {
  double nest_prob = 0.3;
  int max_depth = 5;
};

namespace detail {

struct GrammarIntent {
  const char* name;
  std::vector<const char*> triggers;
  std::vector<int> slot_ids;
};

struct GrammarSlot {
  const char* name;
  std::vector<const char*> fillers;
  std::vector<int> nested_intent_ids;
};

// A small compositional grammar whose words correlate strongly with labels,
// so feature-based parsers can actually learn it.
inline const std::vector<GrammarIntent>& grammar_intents() {
  static const std::vector<GrammarIntent> intents = {
      {"GET_EVENT", {"show", "find", "list"}, {0, 2, 1}},
      {"GET_PLACE", {"where", "locate", "spot"}, {1, 3}},
      {"GET_TIME", {"when", "clock"}, {0, 1}},
      {"GET_ROUTE", {"directions", "navigate", "route"}, {1, 2, 3}},
  };
  return intents;
}

inline const std::vector<GrammarSlot>& grammar_slots() {
  static const std::vector<GrammarSlot> slots = {
      {"CATEGORY", {"concerts", "parties", "games", "movies"}, {}},
      {"PLACE", {"boston", "dayton", "austin", "reno"}, {1}},
      {"DATE", {"today", "tomorrow", "tonight", "friday"}, {2}},
      {"PATH", {"highway", "bridge", "downtown"}, {3}},
  };
  return slots;
}

inline Node grammar_intent_node(std::mt19937_64& rng, int intent_id, int depth,
                                const GrammarParams& params,
                                std::vector<std::string>& tokens) {
  const GrammarIntent& intent = grammar_intents()[intent_id];
  std::vector<Node> children;
  auto add_word = [&](const char* w) {
    children.push_back(Node::leaf(static_cast<int>(tokens.size())));
    tokens.push_back(w);
  };
  std::uniform_int_distribution<std::size_t> trig(0, intent.triggers.size() - 1);
  add_word(intent.triggers[trig(rng)]);

  std::uniform_int_distribution<int> n_slots(1, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int want = n_slots(rng);
  for (int s = 0; s < want; ++s) {
    std::uniform_int_distribution<std::size_t> pick(0, intent.slot_ids.size() - 1);
    const GrammarSlot& slot = grammar_slots()[intent.slot_ids[pick(rng)]];
    std::vector<Node> slot_children;
    bool nest = !slot.nested_intent_ids.empty() && depth + 2 < params.max_depth &&
                unit(rng) < params.nest_prob;
    if (nest) {
      std::uniform_int_distribution<std::size_t> ni(
          0, slot.nested_intent_ids.size() - 1);
      slot_children.push_back(grammar_intent_node(
          rng, slot.nested_intent_ids[ni(rng)], depth + 2, params, tokens));
    } else {
      std::uniform_int_distribution<std::size_t> fi(0, slot.fillers.size() - 1);
      slot_children.push_back(Node::leaf(static_cast<int>(tokens.size())));
      tokens.push_back(slot.fillers[fi(rng)]);
    }
    children.push_back(
        Node::labeled({LabelKind::Slot, slot.name}, std::move(slot_children)));
    if (s + 1 < want && unit(rng) < 0.4) add_word("and");
  }
  return Node::labeled({LabelKind::Intent, intent.name}, std::move(children));
}

}  // namespace detail

// Deterministic synthetic corpus over the compositional grammar. Utterance
// ids are "synth-<seed>-<index>".
inline Corpus synthetic_corpus(std::uint64_t seed, int size,
                               GrammarParams params = {}) {
  std::mt19937_64 rng(seed);
  Corpus corpus;
  for (int i = 0; i < size; ++i) {
    std::vector<std::string> tokens;
    std::uniform_int_distribution<std::size_t> root(
        0, detail::grammar_intents().size() - 1);
    Node node = detail::grammar_intent_node(rng, static_cast<int>(root(rng)), 1,
                                            params, tokens);
    ParseTree tree{std::move(tokens), std::move(node)};
    validate_tree(tree);
    corpus.entries.push_back(
        {"synth-" + std::to_string(seed) + "-" + std::to_string(i),
         std::move(tree)});
  }
  return corpus;
}

}  // namespace topparse
