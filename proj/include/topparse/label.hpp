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
#include <string>
#include <string_view>

namespace topparse {

enum class LabelKind { Intent, Slot };

// A non-terminal label. Intents render as "IN:NAME", slots as "SL:NAME".
struct Label {
  LabelKind kind = LabelKind::Intent;
  std::string name;

  std::string str() const {
    return (kind == LabelKind::Intent ? "IN:" : "SL:") + name;
  }

  // Kind-then-name ordering coincides with lexicographic order of the
  // rendered form, since "IN:" < "SL:".
  friend auto operator<=>(const Label&, const Label&) = default;
};

inline bool valid_label_name(std::string_view name) {
  if (name.empty()) return false;
  for (char c : name) {
    if (c == '[' || c == ']' || std::isspace(static_cast<unsigned char>(c)))
      return false;
  }
  return true;
}

// Parses "IN:NAME" / "SL:NAME"; nullopt on bad prefix or bad name.
inline std::optional<Label> try_parse_label(std::string_view text) {
  LabelKind kind;
  if (text.substr(0, 3) == "IN:") kind = LabelKind::Intent;
  else if (text.substr(0, 3) == "SL:") kind = LabelKind::Slot;
  else return std::nullopt;
  std::string_view name = text.substr(3);
  if (!valid_label_name(name)) return std::nullopt;
  return Label{kind, std::string(name)};
}

}  // namespace topparse
