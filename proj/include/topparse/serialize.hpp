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

#include <stdexcept>
#include <string>
#include <vector>

#include "topparse/label.hpp"
#include "topparse/tree.hpp"

namespace topparse {

// Flat token stream for language-model scoring: each labeled node opens with
// "O_" + label (":" replaced by "_") and closes with the matching "C_"
// token; words pass through unchanged.
using SerializedParse = std::vector<std::string>;

inline std::string lm_open_token(const Label& l) {
  return (l.kind == LabelKind::Intent ? "O_IN_" : "O_SL_") + l.name;
}

inline std::string lm_close_token(const Label& l) {
  return (l.kind == LabelKind::Intent ? "C_IN_" : "C_SL_") + l.name;
}

inline SerializedParse serialize(const ParseTree& tree) {
  SerializedParse out;
  auto walk = [&](auto&& self, const Node& n) -> void {
    if (n.is_leaf()) {
      out.push_back(tree.tokens.at(n.token_index()));
      return;
    }
    out.push_back(lm_open_token(n.label()));
    for (const Node& c : n.children()) self(self, c);
    out.push_back(lm_close_token(n.label()));
  };
  walk(walk, tree.root);
  return out;
}

namespace detail {

inline std::optional<Label> lm_bracket_label(const std::string& token,
                                             char which) {
  if (token.size() < 6 || token[0] != which || token[1] != '_') return {};
  std::string_view rest = std::string_view(token).substr(2);
  LabelKind kind;
  if (rest.substr(0, 3) == "IN_") kind = LabelKind::Intent;
  else if (rest.substr(0, 3) == "SL_") kind = LabelKind::Slot;
  else return {};
  std::string name(rest.substr(3));
  if (!valid_label_name(name)) return {};
  return Label{kind, std::move(name)};
}

}  // namespace detail

// Inverse of serialize. Throws on unbalanced or mismatched O_/C_ tokens and
// on malformed trees.
inline ParseTree deserialize(const SerializedParse& stream) {
  struct Frame {
    Label label;
    std::vector<Node> children;
  };
  std::vector<Frame> stack;
  std::vector<std::string> tokens;
  std::optional<Node> root;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const std::string& tok = stream[i];
    if (root.has_value())
      throw std::invalid_argument("tokens after the root closes at position " +
                                  std::to_string(i));
    if (auto open = detail::lm_bracket_label(tok, 'O')) {
      if (stack.empty() && open->kind != LabelKind::Intent)
        throw std::invalid_argument("root constituent is not an intent");
      if (!stack.empty() && stack.back().label.kind == open->kind)
        throw std::invalid_argument("alternation violation at position " +
                                    std::to_string(i));
      stack.push_back({*open, {}});
    } else if (auto close = detail::lm_bracket_label(tok, 'C')) {
      if (stack.empty() || stack.back().label != *close)
        throw std::invalid_argument("mismatched close token '" + tok +
                                    "' at position " + std::to_string(i));
      if (stack.back().children.empty())
        throw std::invalid_argument("empty constituent at position " +
                                    std::to_string(i));
      Node node =
          Node::labeled(stack.back().label, std::move(stack.back().children));
      stack.pop_back();
      if (stack.empty())
        root = std::move(node);
      else
        stack.back().children.push_back(std::move(node));
    } else {
      if (stack.empty())
        throw std::invalid_argument("word outside any constituent at position " +
                                    std::to_string(i));
      stack.back().children.push_back(
          Node::leaf(static_cast<int>(tokens.size())));
      tokens.push_back(tok);
    }
  }
  if (!root.has_value())
    throw std::invalid_argument("unbalanced serialization: " +
                                std::to_string(stack.size()) +
                                " constituent(s) left open");
  return ParseTree{std::move(tokens), std::move(*root)};
}

}  // namespace topparse
