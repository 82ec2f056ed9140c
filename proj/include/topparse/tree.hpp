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
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "topparse/label.hpp"
#include "topparse/util.hpp"

namespace topparse {

// Error in bracketed-annotation text; `position` is the character offset of
// the offending piece.
struct ParseError : std::runtime_error {
  std::size_t position;
  ParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " (at character " + std::to_string(pos) + ")"),
        position(pos) {}
};

// Tree node: either a leaf holding a token index, or a labeled node with a
// non-empty ordered child list.
class Node {
 public:
  static Node leaf(int token_index) {
    Node n;
    n.token_ = token_index;
    return n;
  }

  static Node labeled(Label label, std::vector<Node> children) {
    Node n;
    n.label_ = std::move(label);
    n.children_ = std::move(children);
    return n;
  }

  bool is_leaf() const { return !label_.has_value(); }
  int token_index() const { return token_; }
  const Label& label() const { return *label_; }
  const std::vector<Node>& children() const { return children_; }

  friend bool operator==(const Node& a, const Node& b) {
    return a.label_ == b.label_ && a.token_ == b.token_ &&
           a.children_ == b.children_;
  }

 private:
  std::optional<Label> label_;
  int token_ = -1;
  std::vector<Node> children_;
};

struct ParseTree {
  std::vector<std::string> tokens;
  Node root;

  friend bool operator==(const ParseTree&, const ParseTree&) = default;
};

// A labeled contiguous token span. `end` is exclusive.
struct Constituent {
  Label label;
  int start = 0;
  int end = 0;

  friend auto operator<=>(const Constituent&, const Constituent&) = default;
};

struct ParseOptions {
  // Permissive mode (false) skips the intent/slot alternation check, for
  // auditing corpora with irregular nesting.
  bool enforce_alternation = true;
};

namespace detail {

struct Piece {
  std::string_view text;
  std::size_t pos;
};

inline std::vector<Piece> lex_pieces(std::string_view text) {
  std::vector<Piece> pieces;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    std::size_t start = i;
    while (i < text.size() &&
           !std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    if (i > start) pieces.push_back({text.substr(start, i - start), start});
  }
  return pieces;
}

inline void collect_leaves(const Node& n, std::vector<int>& out) {
  if (n.is_leaf()) {
    out.push_back(n.token_index());
    return;
  }
  for (const Node& c : n.children()) collect_leaves(c, out);
}

}  // namespace detail

// Parses the bracketed annotation format: "[" immediately followed by a
// label, whitespace-separated children, "]".
inline ParseTree parse_bracketed(std::string_view text,
                                 ParseOptions opts = {}) {
  struct Frame {
    Label label;
    std::vector<Node> children;
    std::size_t open_pos;
  };
  std::vector<Frame> stack;
  std::vector<std::string> tokens;
  std::optional<Node> root;

  for (const detail::Piece& piece : detail::lex_pieces(text)) {
    if (root.has_value())
      throw ParseError("content after root constituent closes", piece.pos);
    if (piece.text.front() == '[') {
      std::string_view body = piece.text.substr(1);
      auto label = try_parse_label(body);
      if (!label) {
        if (body.substr(0, 3) != "IN:" && body.substr(0, 3) != "SL:")
          throw ParseError("unknown label prefix in '" + std::string(piece.text) +
                               "' (expected IN: or SL:)",
                           piece.pos);
        throw ParseError("invalid label '" + std::string(piece.text) + "'",
                         piece.pos);
      }
      if (stack.empty()) {
        if (label->kind != LabelKind::Intent)
          throw ParseError("root constituent is not an intent", piece.pos);
      } else if (opts.enforce_alternation &&
                 stack.back().label.kind == label->kind) {
        throw ParseError("alternation violation: " + label->str() +
                             " nested under " + stack.back().label.str(),
                         piece.pos);
      }
      stack.push_back({*label, {}, piece.pos});
    } else if (piece.text == "]") {
      if (stack.empty())
        throw ParseError("unbalanced brackets: unexpected ']'", piece.pos);
      if (stack.back().children.empty())
        throw ParseError("empty constituent " + stack.back().label.str(),
                         piece.pos);
      Node node =
          Node::labeled(stack.back().label, std::move(stack.back().children));
      stack.pop_back();
      if (stack.empty())
        root = std::move(node);
      else
        stack.back().children.push_back(std::move(node));
    } else {
      if (piece.text.find('[') != std::string_view::npos ||
          piece.text.find(']') != std::string_view::npos)
        throw ParseError("unexpected bracket character in token '" +
                             std::string(piece.text) + "'",
                         piece.pos);
      if (stack.empty())
        throw ParseError("token outside any constituent", piece.pos);
      stack.back().children.push_back(
          Node::leaf(static_cast<int>(tokens.size())));
      tokens.emplace_back(piece.text);
    }
  }
  if (!stack.empty())
    throw ParseError("unbalanced brackets: " + std::to_string(stack.size()) +
                         " constituent(s) left open",
                     text.size());
  if (!root.has_value()) throw ParseError("empty annotation", 0);
  return ParseTree{std::move(tokens), std::move(*root)};
}

// Canonical form: single spaces, a space before every "]".
inline std::string render_bracketed(const ParseTree& tree) {
  std::string out;
  auto walk = [&](auto&& self, const Node& n) -> void {
    if (n.is_leaf()) {
      out += tree.tokens.at(n.token_index());
      return;
    }
    out += '[';
    out += n.label().str();
    for (const Node& c : n.children()) {
      out += ' ';
      self(self, c);
    }
    out += " ]";
  };
  walk(walk, tree.root);
  return out;
}

// One constituent per labeled node, kept with multiplicity. Sorted.
inline std::vector<Constituent> constituents(const ParseTree& tree) {
  std::vector<Constituent> out;
  // Returns (first leaf, last leaf + 1) of the subtree.
  auto walk = [&](auto&& self, const Node& n) -> std::pair<int, int> {
    if (n.is_leaf()) return {n.token_index(), n.token_index() + 1};
    int lo = -1, hi = -1;
    for (const Node& c : n.children()) {
      auto [clo, chi] = self(self, c);
      if (lo < 0) lo = clo;
      hi = chi;
    }
    out.push_back({n.label(), lo, hi});
    return {lo, hi};
  };
  walk(walk, tree.root);
  std::sort(out.begin(), out.end());
  return out;
}

// True iff the trees are structurally identical. Token lists must agree.
inline bool exact_match(const ParseTree& gold, const ParseTree& pred) {
  if (gold.tokens != pred.tokens)
    throw std::invalid_argument("exact_match: token lists differ");
  return gold.root == pred.root;
}

// Checks all structural invariants; throws std::invalid_argument on the
// first violation.
inline void validate_tree(const ParseTree& tree,
                          bool enforce_alternation = true) {
  if (tree.root.is_leaf() || tree.root.label().kind != LabelKind::Intent)
    throw std::invalid_argument("root must be an intent constituent");
  std::vector<int> leaves;
  auto walk = [&](auto&& self, const Node& n) -> void {
    if (n.is_leaf()) {
      detail::collect_leaves(n, leaves);
      return;
    }
    if (n.children().empty())
      throw std::invalid_argument("empty constituent " + n.label().str());
    if (!valid_label_name(n.label().name))
      throw std::invalid_argument("invalid label name '" + n.label().name + "'");
    for (const Node& c : n.children()) {
      if (!c.is_leaf() && enforce_alternation &&
          c.label().kind == n.label().kind)
        throw std::invalid_argument("alternation violation: " +
                                    c.label().str() + " under " +
                                    n.label().str());
      self(self, c);
    }
  };
  walk(walk, tree.root);
  std::vector<int> expect(tree.tokens.size());
  std::iota(expect.begin(), expect.end(), 0);
  if (leaves != expect)
    throw std::invalid_argument(
        "leaf sequence must cover token indices 0..n-1 in order");
}

}  // namespace topparse
