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
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "topparse/corpus.hpp"
#include "topparse/decode.hpp"
#include "topparse/scorer.hpp"

namespace topparse {

struct TrainConfig {
  int epochs = 5;
  int beam_width = 5;
  std::uint64_t seed = 1;
  // Diversity knobs for ensembling: weight-initialization jitter and
  // per-epoch random feature masking.
  double jitter_eps = 0.0;
  double mask_prob = 0.0;
  int max_depth = kDefaultMaxDepth;
  int num_buckets = 16;
};

namespace detail {

// Averaged-perceptron weight store with lazy averaging. `t` is the 1-based
// sentence counter; the average is over the weight vector after each
// sentence.
class AveragedWeights {
 public:
  explicit AveragedWeights(int num_actions) : num_actions_(num_actions) {}

  double value(const std::string& f, int a) const {
    auto it = rows_.find(f);
    return it == rows_.end() ? 0.0 : it->second.w[a];
  }

  void update(const std::string& f, int a, double delta, long t) {
    Row& row = rows_.try_emplace(f, Row(num_actions_)).first->second;
    row.acc[a] += row.w[a] * static_cast<double>(t - row.last[a]);
    row.last[a] = t;
    row.w[a] += delta;
  }

  std::unordered_map<std::string, std::vector<double>> finalize(long total) {
    std::unordered_map<std::string, std::vector<double>> out;
    for (auto& [f, row] : rows_) {
      std::vector<double> avg(num_actions_, 0.0);
      bool nonzero = false;
      for (int a = 0; a < num_actions_; ++a) {
        row.acc[a] += row.w[a] * static_cast<double>(total - row.last[a] + 1);
        avg[a] = row.acc[a] / static_cast<double>(total);
        nonzero |= std::abs(avg[a]) > 1e-12;
      }
      if (nonzero) out.emplace(f, std::move(avg));
    }
    return out;
  }

 private:
  struct Row {
    explicit Row(int n) : w(n, 0.0), acc(n, 0.0), last(n, 0) {}
    std::vector<double> w;
    std::vector<double> acc;
    std::vector<long> last;
  };
  int num_actions_;
  std::unordered_map<std::string, Row> rows_;
};

}  // namespace detail

// Trains a parser by averaged structured perceptron with early update under
// beam search. Per-epoch sentence order is shuffled from the seed; the whole
// procedure is single-threaded and reproducible.
inline ScorerModel train_parser(const Corpus& corpus, const TrainConfig& cfg,
                                const VectorTable* vectors = nullptr) {
  if (corpus.entries.empty())
    throw std::invalid_argument("cannot train on an empty corpus");

  std::vector<Label> intents, slots;
  std::vector<ActionSequence> gold_actions;
  gold_actions.reserve(corpus.entries.size());
  for (const CorpusEntry& e : corpus.entries) {
    validate_tree(e.tree);  // rejects alternation violations
    auto collect = [&](auto&& self, const Node& n) -> void {
      if (n.is_leaf()) return;
      (n.label().kind == LabelKind::Intent ? intents : slots)
          .push_back(n.label());
      for (const Node& c : n.children()) self(self, c);
    };
    collect(collect, e.tree.root);
    ActionSequence acts = tree_to_actions(e.tree);
    if (!valid_sequence(acts, e.tree.tokens, cfg.max_depth))
      throw std::invalid_argument("tree for id " + e.id +
                                  " exceeds maximum nesting depth");
    gold_actions.push_back(std::move(acts));
  }

  ScorerModel model;
  model.set_labels(std::move(intents), std::move(slots));
  model.jitter_eps = cfg.jitter_eps;
  model.jitter_seed = derive_seed(cfg.seed, "jitter");
  model.train_seed = cfg.seed;
  if (vectors) {
    std::vector<const TokenVectors*> rows;
    for (const CorpusEntry& e : corpus.entries)
      if (const TokenVectors* tv = vectors->find(e.id)) rows.push_back(tv);
    if (!rows.empty()) model.buckets = Bucketizer::fit(rows, cfg.num_buckets);
  }
  const Bucketizer* buckets = model.buckets ? &*model.buckets : nullptr;

  detail::AveragedWeights avg(model.num_actions());
  long t = 0;

  // Score features against the live (non-averaged) weights plus jitter.
  auto live_weight = [&](const std::string& f, int a) {
    double w = avg.value(f, a);
    if (model.jitter_eps > 0.0) w += model.jitter(f, a);
    return w;
  };

  struct Item {
    ParserState state;
    ActionSequence actions;
    double score = 0.0;
    bool done = false;
    bool gold = false;
  };

  // Feature-occurrence deltas of (sequence minus sequence), applied in replay
  // order.
  auto apply_update = [&](const std::vector<std::string>& tokens,
                          const TokenVectors* tv, const ActionSequence& plus,
                          const ActionSequence& minus, auto&& masked) {
    auto replay = [&](const ActionSequence& seq, double sign) {
      ParserState state(static_cast<int>(tokens.size()), cfg.max_depth);
      ActionSequence prev;
      for (const Action& a : seq) {
        for (const std::string& f :
             extract_features(state, tokens, prev, tv, buckets))
          if (!masked(f)) avg.update(f, model.action_id(a), sign, t);
        state = state.apply(a);
        prev.push_back(a);
      }
    };
    replay(plus, +1.0);
    replay(minus, -1.0);
  };

  std::vector<std::size_t> order(corpus.entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(derive_seed(cfg.seed, "shuffle"));
  std::uint64_t mask_seed = derive_seed(cfg.seed, "mask");

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    std::uint64_t epoch_salt = splitmix64(mask_seed + epoch);
    auto masked = [&](const std::string& f) {
      return cfg.mask_prob > 0.0 &&
             hash_unit(fnv1a64(f) ^ epoch_salt) < cfg.mask_prob;
    };

    for (std::size_t idx : order) {
      ++t;
      const CorpusEntry& entry = corpus.entries[idx];
      const std::vector<std::string>& tokens = entry.tree.tokens;
      const TokenVectors* tv = vectors ? vectors->find(entry.id) : nullptr;
      const ActionSequence& gold = gold_actions[idx];

      std::vector<Item> beam{
          {ParserState(static_cast<int>(tokens.size()), cfg.max_depth),
           {},
           0.0,
           false,
           true}};
      bool updated = false;
      for (std::size_t step = 0; step < gold.size(); ++step) {
        std::vector<Item> candidates;
        for (const Item& it : beam) {
          if (it.done) {
            candidates.push_back(it);
            continue;
          }
          std::vector<int> ids = detail::valid_action_ids(model, it.state);
          auto feats =
              extract_features(it.state, tokens, it.actions, tv, buckets);
          std::vector<std::pair<int, double>> scored;
          scored.reserve(ids.size());
          for (int id : ids) {
            double z = 0.0;
            for (const std::string& f : feats)
              if (!masked(f)) z += live_weight(f, id);
            scored.emplace_back(id, z);
          }
          double hi = scored.front().second;
          for (const auto& s : scored) hi = std::max(hi, s.second);
          double sum = 0.0;
          for (const auto& s : scored) sum += std::exp(s.second - hi);
          double lse = hi + std::log(sum);
          for (const auto& [id, z] : scored) {
            const Action& act = model.actions()[id];
            Item next{it.state.apply(act), it.actions, it.score + (z - lse)};
            next.actions.push_back(act);
            next.done = next.state.complete();
            next.gold = it.gold && step < gold.size() && act == gold[step];
            candidates.push_back(std::move(next));
          }
        }
        std::stable_sort(
            candidates.begin(), candidates.end(),
            [](const Item& a, const Item& b) { return a.score > b.score; });
        if (static_cast<int>(candidates.size()) > cfg.beam_width)
          candidates.resize(cfg.beam_width);
        beam = std::move(candidates);

        bool gold_alive = false;
        for (const Item& it : beam) gold_alive |= it.gold;
        if (!gold_alive) {
          // Early update against the beam's current best.
          ActionSequence gold_prefix(gold.begin(),
                                     gold.begin() + static_cast<long>(step) + 1);
          apply_update(tokens, tv, gold_prefix, beam.front().actions, masked);
          updated = true;
          break;
        }
      }
      if (!updated && !beam.front().gold)
        apply_update(tokens, tv, gold, beam.front().actions, masked);
    }
  }

  model.set_weights(avg.finalize(t));
  return model;
}

}  // namespace topparse
