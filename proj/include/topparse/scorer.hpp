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
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "topparse/actions.hpp"
#include "topparse/features.hpp"
#include "topparse/util.hpp"

namespace topparse {

inline constexpr const char* kScorerFormat = "topparse.scorer";
inline constexpr int kScorerVersion = 1;

// Log-linear per-action scorer. Actions are interned in the fixed decoding
// order SHIFT < REDUCE < OPEN(label) with labels sorted by rendered form.
// Weight lookups add a deterministic per-(feature, action) jitter derived
// from `jitter_seed` when `jitter_eps` > 0; this is the parameter
// initialization diversity knob and is zero by default.
class ScorerModel {
 public:
  ScorerModel() { rebuild_actions(); }

  void set_labels(std::vector<Label> intents, std::vector<Label> slots) {
    auto dedup = [](std::vector<Label>& v) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    dedup(intents);
    dedup(slots);
    intent_labels_ = std::move(intents);
    slot_labels_ = std::move(slots);
    rebuild_actions();
  }

  const std::vector<Label>& intent_labels() const { return intent_labels_; }
  const std::vector<Label>& slot_labels() const { return slot_labels_; }

  const std::vector<Action>& actions() const { return actions_; }
  int num_actions() const { return static_cast<int>(actions_.size()); }

  int action_id(const Action& a) const {
    auto it = action_ids_.find(a.str());
    if (it == action_ids_.end())
      throw std::invalid_argument("unknown action " + a.str());
    return it->second;
  }

  double weight(const std::string& feature, int action) const {
    double w = 0.0;
    auto it = weights_.find(feature);
    if (it != weights_.end()) w = it->second[action];
    if (jitter_eps > 0.0) w += jitter(feature, action);
    return w;
  }

  void add_weight(const std::string& feature, int action, double delta) {
    auto it = weights_.find(feature);
    if (it == weights_.end())
      it = weights_.emplace(feature, std::vector<double>(actions_.size(), 0.0))
               .first;
    it->second[action] += delta;
  }

  void set_weights(std::unordered_map<std::string, std::vector<double>> w) {
    weights_ = std::move(w);
  }
  const std::unordered_map<std::string, std::vector<double>>& weights() const {
    return weights_;
  }

  double jitter(const std::string& feature, int action) const {
    std::uint64_t h =
        splitmix64(fnv1a64(feature) ^ (jitter_seed + 0x9e37 * (action + 1)));
    return (hash_unit(h) - 0.5) * 2.0 * jitter_eps;
  }

  double jitter_eps = 0.0;
  std::uint64_t jitter_seed = 0;
  std::uint64_t train_seed = 0;
  std::optional<Bucketizer> buckets;

 private:
  void rebuild_actions() {
    actions_.clear();
    action_ids_.clear();
    actions_.push_back(Action::shift());
    actions_.push_back(Action::reduce());
    std::vector<Label> all = intent_labels_;
    all.insert(all.end(), slot_labels_.begin(), slot_labels_.end());
    std::sort(all.begin(), all.end());
    for (const Label& l : all) actions_.push_back(Action::open(l));
    for (std::size_t i = 0; i < actions_.size(); ++i)
      action_ids_[actions_[i].str()] = static_cast<int>(i);
  }

  std::vector<Label> intent_labels_, slot_labels_;
  std::vector<Action> actions_;
  std::unordered_map<std::string, int> action_ids_;
  std::unordered_map<std::string, std::vector<double>> weights_;
};

namespace detail {

// Valid action ids in fixed decoding order.
inline std::vector<int> valid_action_ids(const ScorerModel& model,
                                         const ParserState& state) {
  ValidActions v = valid_actions(state);
  std::vector<int> ids;
  if (v.shift) ids.push_back(0);
  if (v.reduce) ids.push_back(1);
  if (v.open_intent || v.open_slot) {
    const auto& acts = model.actions();
    for (int i = 2; i < model.num_actions(); ++i) {
      bool is_intent = acts[i].label->kind == LabelKind::Intent;
      if ((is_intent && v.open_intent) || (!is_intent && v.open_slot))
        ids.push_back(i);
    }
  }
  return ids;
}

// Log-softmax over the given action ids. `masked` (optional) suppresses
// individual features during training.
template <typename MaskFn>
inline std::vector<std::pair<int, double>> score_actions(
    const ScorerModel& model, const std::vector<std::string>& feats,
    const std::vector<int>& ids, MaskFn&& masked) {
  std::vector<std::pair<int, double>> out;
  out.reserve(ids.size());
  for (int id : ids) {
    double z = 0.0;
    for (const std::string& f : feats)
      if (!masked(f)) z += model.weight(f, id);
    out.emplace_back(id, z);
  }
  double hi = out.front().second;
  for (const auto& [id, z] : out) hi = std::max(hi, z);
  double sum = 0.0;
  for (const auto& [id, z] : out) sum += std::exp(z - hi);
  double lse = hi + std::log(sum);
  for (auto& [id, z] : out) z -= lse;
  return out;
}

inline bool no_mask(const std::string&) { return false; }

}  // namespace detail

// Per-step scores: log-probabilities over exactly the valid actions,
// normalized so their exponentials sum to 1. Throws on terminal states.
inline std::vector<std::pair<int, double>> step_scores(
    const ScorerModel& model, const ParserState& state,
    const std::vector<std::string>& tokens, const ActionSequence& prev_actions,
    const TokenVectors* vectors = nullptr) {
  std::vector<int> ids = detail::valid_action_ids(model, state);
  if (ids.empty())
    throw std::invalid_argument("no valid actions in terminal state");
  const Bucketizer* b = model.buckets ? &*model.buckets : nullptr;
  auto feats = extract_features(state, tokens, prev_actions, vectors, b);
  return detail::score_actions(model, feats, ids, detail::no_mask);
}

inline nlohmann::json model_to_json(const ScorerModel& model) {
  nlohmann::json j;
  j["format"] = kScorerFormat;
  j["version"] = kScorerVersion;
  auto labels = [](const std::vector<Label>& ls) {
    std::vector<std::string> out;
    for (const Label& l : ls) out.push_back(l.str());
    return out;
  };
  j["intent_labels"] = labels(model.intent_labels());
  j["slot_labels"] = labels(model.slot_labels());
  j["jitter_eps"] = model.jitter_eps;
  j["jitter_seed"] = model.jitter_seed;
  j["train_seed"] = model.train_seed;
  if (model.buckets) j["buckets"] = *model.buckets;
  // std::map keys the dump so output is byte-stable.
  std::map<std::string, std::vector<double>> sorted(model.weights().begin(),
                                                    model.weights().end());
  j["weights"] = sorted;
  return j;
}

inline ScorerModel model_from_json(const nlohmann::json& j) {
  if (!j.contains("format") || j["format"] != kScorerFormat)
    throw std::runtime_error("not a scorer model file");
  if (j["version"].get<int>() != kScorerVersion)
    throw std::runtime_error("unsupported scorer model version");
  ScorerModel model;
  auto labels = [](const nlohmann::json& arr) {
    std::vector<Label> out;
    for (const auto& s : arr) {
      auto l = try_parse_label(s.get<std::string>());
      if (!l) throw std::runtime_error("bad label in model file");
      out.push_back(*l);
    }
    return out;
  };
  model.set_labels(labels(j["intent_labels"]), labels(j["slot_labels"]));
  model.jitter_eps = j["jitter_eps"].get<double>();
  model.jitter_seed = j["jitter_seed"].get<std::uint64_t>();
  model.train_seed = j.value("train_seed", std::uint64_t{0});
  if (j.contains("buckets")) model.buckets = j["buckets"].get<Bucketizer>();
  std::unordered_map<std::string, std::vector<double>> w;
  for (const auto& [feat, arr] : j["weights"].items()) {
    auto v = arr.get<std::vector<double>>();
    if (v.size() != static_cast<std::size_t>(model.num_actions()))
      throw std::runtime_error("weight row size mismatch in model file");
    w.emplace(feat, std::move(v));
  }
  model.set_weights(std::move(w));
  return model;
}

inline void save_model(const ScorerModel& model,
                       const std::filesystem::path& path) {
  atomic_write(path, model_to_json(model).dump(2) + "\n");
}

inline ScorerModel load_model(const std::filesystem::path& path) {
  return model_from_json(nlohmann::json::parse(read_file(path)));
}

}  // namespace topparse
