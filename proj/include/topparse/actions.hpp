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

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "topparse/label.hpp"
#include "topparse/tree.hpp"
#include "topparse/util.hpp"

namespace topparse {

// OPEN during decoding is capped at this nesting depth unless overridden.
inline constexpr int kDefaultMaxDepth = 10;

struct ActionError : std::runtime_error {
  std::size_t position;
  ActionError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " (at action " + std::to_string(pos) + ")"),
        position(pos) {}
};

// Parser action: SHIFT consumes a token, REDUCE closes the innermost open
// constituent, OPEN starts a new labeled constituent. PAD is a pseudo-action
// used only when ensembling aligns sequences of different lengths; it
// compares equal only to PAD and never appears in a real sequence.
struct Action {
  enum class Kind { Shift, Reduce, Open, Pad };

  Kind kind = Kind::Shift;
  std::optional<Label> label;  // set iff kind == Open

  static Action shift() { return {Kind::Shift, std::nullopt}; }
  static Action reduce() { return {Kind::Reduce, std::nullopt}; }
  static Action open(Label l) { return {Kind::Open, std::move(l)}; }
  static Action pad() { return {Kind::Pad, std::nullopt}; }

  std::string str() const {
    switch (kind) {
      case Kind::Shift: return "SHIFT";
      case Kind::Reduce: return "REDUCE";
      case Kind::Open: return "OPEN(" + label->str() + ")";
      case Kind::Pad: return "PAD";
    }
    return {};
  }

  static Action from_str(const std::string& text) {
    if (text == "SHIFT") return shift();
    if (text == "REDUCE") return reduce();
    if (text == "PAD") return pad();
    if (text.size() > 6 && text.substr(0, 5) == "OPEN(" && text.back() == ')') {
      auto label = try_parse_label(
          std::string_view(text).substr(5, text.size() - 6));
      if (label) return open(*label);
    }
    throw std::invalid_argument("cannot parse action '" + text + "'");
  }

  // SHIFT < REDUCE < OPEN(labels in rendered lexicographic order) < PAD.
  friend auto operator<=>(const Action&, const Action&) = default;
};

using ActionSequence = std::vector<Action>;

inline std::string actions_to_string(const ActionSequence& actions) {
  std::string out;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i > 0) out += ' ';
    out += actions[i].str();
  }
  return out;
}

inline ActionSequence actions_from_string(const std::string& text) {
  ActionSequence out;
  for (const std::string& piece : split_ws(text))
    out.push_back(Action::from_str(piece));
  return out;
}

struct OpenConstituent {
  Label label;
  int children = 0;

  friend bool operator==(const OpenConstituent&, const OpenConstituent&) =
      default;
};

// Immutable decoding state: buffer cursor, stack of open constituents, and
// the completed-root flag.
class ParserState {
 public:
  explicit ParserState(int num_tokens, int max_depth = kDefaultMaxDepth)
      : num_tokens_(num_tokens), max_depth_(max_depth) {}

  int cursor() const { return cursor_; }
  int num_tokens() const { return num_tokens_; }
  int max_depth() const { return max_depth_; }
  int depth() const { return static_cast<int>(stack_.size()); }
  bool complete() const { return complete_; }
  const std::vector<OpenConstituent>& stack() const { return stack_; }

  // Reason the action cannot be taken here, or nullptr if it can.
  const char* invalid_reason(const Action& action) const {
    if (complete_) return "parse already complete";
    switch (action.kind) {
      case Action::Kind::Pad:
        return "PAD is not an executable action";
      case Action::Kind::Shift:
        if (stack_.empty()) return "shift with no open constituent";
        if (cursor_ >= num_tokens_) return "shift past end of buffer";
        return nullptr;
      case Action::Kind::Reduce:
        if (stack_.empty()) return "reduce with no open constituent";
        if (stack_.size() == 1 && cursor_ < num_tokens_)
          return "premature root closure: tokens left over";
        if (stack_.back().children == 0) return "reduce of empty constituent";
        return nullptr;
      case Action::Kind::Open:
        if (cursor_ >= num_tokens_) return "open with exhausted buffer";
        if (depth() >= max_depth_) return "open past maximum nesting depth";
        if (stack_.empty()) {
          if (action.label->kind != LabelKind::Intent)
            return "root constituent must be an intent";
        } else if (stack_.back().label.kind == action.label->kind) {
          return "open violates intent-slot alternation";
        }
        return nullptr;
    }
    return "unknown action";
  }

  ParserState apply(const Action& action) const {
    if (const char* reason = invalid_reason(action))
      throw std::invalid_argument(reason);
    ParserState next = *this;
    switch (action.kind) {
      case Action::Kind::Shift:
        ++next.cursor_;
        ++next.stack_.back().children;
        break;
      case Action::Kind::Reduce:
        next.stack_.pop_back();
        if (next.stack_.empty())
          next.complete_ = true;
        else
          ++next.stack_.back().children;
        break;
      case Action::Kind::Open:
        next.stack_.push_back({*action.label, 0});
        break;
      case Action::Kind::Pad:
        break;
    }
    return next;
  }

 private:
  int num_tokens_;
  int max_depth_;
  int cursor_ = 0;
  std::vector<OpenConstituent> stack_;
  bool complete_ = false;
};

// Which action kinds are valid in a state. Terminal states report none.
struct ValidActions {
  bool shift = false;
  bool reduce = false;
  bool open_intent = false;
  bool open_slot = false;

  bool any() const { return shift || reduce || open_intent || open_slot; }
};

inline ValidActions valid_actions(const ParserState& state) {
  ValidActions v;
  if (state.complete()) return v;
  const auto& stack = state.stack();
  bool buffer_left = state.cursor() < state.num_tokens();
  v.shift = buffer_left && !stack.empty();
  v.reduce = !stack.empty() && stack.back().children >= 1 &&
             (stack.size() >= 2 || !buffer_left);
  if (buffer_left && state.depth() < state.max_depth()) {
    if (stack.empty()) {
      v.open_intent = true;
    } else {
      v.open_intent = stack.back().label.kind == LabelKind::Slot;
      v.open_slot = stack.back().label.kind == LabelKind::Intent;
    }
  }
  return v;
}

// Depth-first left-to-right linearization: OPEN at node entry, SHIFT per
// token, REDUCE at node exit.
inline ActionSequence tree_to_actions(const ParseTree& tree) {
  ActionSequence out;
  auto walk = [&](auto&& self, const Node& n) -> void {
    if (n.is_leaf()) {
      out.push_back(Action::shift());
      return;
    }
    out.push_back(Action::open(n.label()));
    for (const Node& c : n.children()) self(self, c);
    out.push_back(Action::reduce());
  };
  walk(walk, tree.root);
  return out;
}

// Replays an action sequence into the unique corresponding tree. Invalid
// actions are reported with their 0-based position.
inline ParseTree actions_to_tree(const ActionSequence& actions,
                                 const std::vector<std::string>& tokens,
                                 int max_depth = kDefaultMaxDepth) {
  struct Frame {
    Label label;
    std::vector<Node> children;
  };
  ParserState state(static_cast<int>(tokens.size()), max_depth);
  std::vector<Frame> build;
  std::optional<Node> root;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const Action& a = actions[i];
    if (const char* reason = state.invalid_reason(a))
      throw ActionError(std::string(reason) + " [" + a.str() + "]", i);
    switch (a.kind) {
      case Action::Kind::Shift:
        build.back().children.push_back(Node::leaf(state.cursor()));
        break;
      case Action::Kind::Open:
        build.push_back({*a.label, {}});
        break;
      case Action::Kind::Reduce: {
        Node node =
            Node::labeled(build.back().label, std::move(build.back().children));
        build.pop_back();
        if (build.empty())
          root = std::move(node);
        else
          build.back().children.push_back(std::move(node));
        break;
      }
      case Action::Kind::Pad:
        break;  // unreachable: invalid_reason rejects PAD
    }
    state = state.apply(a);
  }
  if (!state.complete())
    throw ActionError("sequence ends before the root constituent closes",
                      actions.size());
  return ParseTree{tokens, std::move(*root)};
}

// True iff the sequence replays cleanly over `tokens`.
inline bool valid_sequence(const ActionSequence& actions,
                           const std::vector<std::string>& tokens,
                           int max_depth = kDefaultMaxDepth) {
  try {
    actions_to_tree(actions, tokens, max_depth);
    return true;
  } catch (const ActionError&) {
    return false;
  }
}

}  // namespace topparse
