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

#include "topparse/actions.hpp"
#include "topparse/tree.hpp"

namespace topparse {

// One utterance's top parse from each of m parsers.
struct EnsembleInput {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<ActionSequence> parses;
};

// The chosen parse always equals one of the inputs. `supporters` lists the
// parser indices backing the decision; `chosen_parser` is the lowest of them
// (or the explicitly selected parser for parser-switch and oracle).
struct EnsembleDecision {
  ActionSequence actions;
  std::string strategy;
  std::vector<int> supporters;
  int chosen_parser = 0;
  bool no_correct = false;  // oracle only: no parser matched gold
};

namespace detail {

inline void check_input(const EnsembleInput& input) {
  if (input.parses.empty())
    throw std::invalid_argument("ensemble input needs at least one parser");
}

// Multiset intersection size under minimum multiplicities; both sorted.
inline int intersection_size(const std::vector<Constituent>& a,
                             const std::vector<Constituent>& b) {
  int count = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) ++i;
    else if (b[j] < a[i]) ++j;
    else { ++count; ++i; ++j; }
  }
  return count;
}

}  // namespace detail

// Picks the action sequence predicted by the most parsers; ties go to the
// sequence first produced by the lowest parser index.
inline EnsembleDecision majority_vote(const EnsembleInput& input) {
  detail::check_input(input);
  std::map<ActionSequence, std::vector<int>> groups;
  for (std::size_t i = 0; i < input.parses.size(); ++i)
    groups[input.parses[i]].push_back(static_cast<int>(i));
  const std::vector<int>* best = nullptr;
  for (const auto& [seq, members] : groups) {
    if (!best || members.size() > best->size() ||
        (members.size() == best->size() && members.front() < best->front()))
      best = &members;
  }
  EnsembleDecision d;
  d.strategy = "majority";
  d.supporters = *best;
  d.chosen_parser = best->front();
  d.actions = input.parses[d.chosen_parser];
  return d;
}

// Left-to-right action vote: pad sequences with PAD to a common length, take
// the majority action at each position among surviving parsers, and discard
// parsers that disagree. The survivors share one full sequence.
inline EnsembleDecision greedy_action(const EnsembleInput& input) {
  detail::check_input(input);
  std::size_t max_len = 0;
  for (const auto& p : input.parses) max_len = std::max(max_len, p.size());
  auto padded_at = [&](int parser, std::size_t pos) {
    const ActionSequence& seq = input.parses[parser];
    return pos < seq.size() ? seq[pos] : Action::pad();
  };

  std::vector<int> survivors(input.parses.size());
  for (std::size_t i = 0; i < survivors.size(); ++i)
    survivors[i] = static_cast<int>(i);

  for (std::size_t pos = 0; pos < max_len && survivors.size() > 1; ++pos) {
    std::map<Action, std::vector<int>> groups;
    for (int parser : survivors) groups[padded_at(parser, pos)].push_back(parser);
    const std::vector<int>* best = nullptr;
    for (const auto& [act, members] : groups) {
      if (!best || members.size() > best->size() ||
          (members.size() == best->size() && members.front() < best->front()))
        best = &members;
    }
    survivors = *best;
  }

  EnsembleDecision d;
  d.strategy = "greedy-action";
  d.supporters = survivors;
  d.chosen_parser = survivors.front();
  d.actions = input.parses[d.chosen_parser];
  return d;
}

// Scores each parse by the summed multiset intersection of its constituent
// set with every parse's constituent set (self term included unless
// `include_self` is false), then switches to the argmax parser.
inline EnsembleDecision parser_switch(const EnsembleInput& input,
                                      bool include_self = true) {
  detail::check_input(input);
  std::vector<std::vector<Constituent>> sets;
  sets.reserve(input.parses.size());
  for (const auto& seq : input.parses)
    sets.push_back(constituents(actions_to_tree(seq, input.tokens)));

  int best = 0;
  long best_score = -1;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    long score = 0;
    for (std::size_t j = 0; j < sets.size(); ++j) {
      if (!include_self && j == i) continue;
      score += detail::intersection_size(sets[i], sets[j]);
    }
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }

  EnsembleDecision d;
  d.strategy = "parser-switch";
  d.supporters = {best};
  d.chosen_parser = best;
  d.actions = input.parses[best];
  return d;
}

// Upper-bound combiner: picks any parser matching gold, else parser 0.
inline EnsembleDecision oracle_ensemble(const EnsembleInput& input,
                                        const ParseTree& gold) {
  detail::check_input(input);
  EnsembleDecision d;
  d.strategy = "oracle";
  for (std::size_t i = 0; i < input.parses.size(); ++i) {
    ParseTree tree = actions_to_tree(input.parses[i], input.tokens);
    if (exact_match(gold, tree)) {
      d.chosen_parser = static_cast<int>(i);
      d.supporters = {d.chosen_parser};
      d.actions = input.parses[i];
      return d;
    }
  }
  d.chosen_parser = 0;
  d.supporters = {0};
  d.actions = input.parses[0];
  d.no_correct = true;
  return d;
}

}  // namespace topparse
