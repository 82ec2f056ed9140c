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
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "topparse/decode.hpp"
#include "topparse/ngram.hpp"

namespace topparse {

inline constexpr const char* kRankerFormat = "topparse.ranker";
inline constexpr int kRankerVersion = 1;

// Ranker features per hypothesis: length-normalized model score,
// length-normalized LM score, and (optionally) the number of times the
// hypothesis appears across the ensemble's beams.
struct RankFeatures {
  double model_norm = 0.0;
  double lm_norm = 0.0;
  double votes = 0.0;

  double get(int i) const {
    return i == 0 ? model_norm : i == 1 ? lm_norm : votes;
  }
};

// Pairwise linear ranker: score = w . standardize(features). Bias-free; the
// feature standardization computed on training data travels with the model.
struct RankModel {
  bool use_votes = false;
  std::vector<double> weights{0.0, 0.0, 0.0};
  std::vector<double> mean{0.0, 0.0, 0.0};
  std::vector<double> stdev{1.0, 1.0, 1.0};

  int num_features() const { return use_votes ? 3 : 2; }

  double score(const RankFeatures& f) const {
    double s = 0.0;
    for (int i = 0; i < num_features(); ++i)
      s += weights[i] * (f.get(i) - mean[i]) / stdev[i];
    return s;
  }
};

inline RankFeatures rank_features(const Hypothesis& hyp,
                                  const std::vector<std::string>& tokens,
                                  const NGramLM& lm) {
  RankFeatures f;
  f.model_norm =
      hyp.model_score / static_cast<double>(std::max<std::size_t>(1, hyp.actions.size()));
  ParseTree tree = actions_to_tree(hyp.actions, tokens);
  f.lm_norm = lm_score_normalized(lm, tree);
  auto it = hyp.aux.find("votes");
  f.votes = it == hyp.aux.end() ? 0.0 : it->second;
  return f;
}

// Re-ranks only the first `top_k` hypotheses by raw LM score (descending,
// stable); the rest of the beam is untouched.
inline BeamSet naive_rerank(BeamSet beams, const NGramLM& lm, int top_k = 2) {
  std::size_t head = std::min<std::size_t>(std::max(top_k, 0), beams.hyps.size());
  std::vector<std::pair<double, Hypothesis>> scored;
  for (std::size_t i = 0; i < head; ++i) {
    double s = lm_score(lm, actions_to_tree(beams.hyps[i].actions, beams.tokens));
    beams.hyps[i].aux["lm_score"] = s;
    scored.emplace_back(s, std::move(beams.hyps[i]));
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; i < head; ++i) beams.hyps[i] = std::move(scored[i].second);
  return beams;
}

// Re-scores every hypothesis with the learned ranker and sorts descending
// (stable on ties).
inline BeamSet rerank(BeamSet beams, const RankModel& model,
                      const NGramLM& lm) {
  std::vector<std::pair<double, Hypothesis>> scored;
  scored.reserve(beams.hyps.size());
  for (Hypothesis& hyp : beams.hyps) {
    double s = model.score(rank_features(hyp, beams.tokens, lm));
    hyp.aux["rank_score"] = s;
    scored.emplace_back(s, std::move(hyp));
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; i < scored.size(); ++i)
    beams.hyps[i] = std::move(scored[i].second);
  return beams;
}

// True iff any of the first k hypotheses matches gold exactly.
inline bool oracle_at_k(const BeamSet& beams, const ParseTree& gold, int k) {
  std::size_t limit = std::min<std::size_t>(std::max(k, 0), beams.hyps.size());
  for (std::size_t i = 0; i < limit; ++i) {
    ParseTree tree = actions_to_tree(beams.hyps[i].actions, beams.tokens);
    if (exact_match(gold, tree)) return true;
  }
  return false;
}

// Fills aux["votes"] on every hypothesis: the number of occurrences of its
// action sequence across all parsers' beams for the same utterance.
// `per_parser[p][u]` must be aligned on u across parsers.
inline void annotate_votes(std::vector<std::vector<BeamSet>>& per_parser) {
  if (per_parser.empty()) return;
  std::size_t num_utts = per_parser.front().size();
  for (const auto& beams : per_parser)
    if (beams.size() != num_utts)
      throw std::invalid_argument("parser beam files are misaligned");
  for (std::size_t u = 0; u < num_utts; ++u) {
    std::map<ActionSequence, int> counts;
    for (const auto& beams : per_parser) {
      if (beams[u].id != per_parser.front()[u].id)
        throw std::invalid_argument("parser beam ids are misaligned at row " +
                                    std::to_string(u));
      for (const Hypothesis& hyp : beams[u].hyps) counts[hyp.actions] += 1;
    }
    for (auto& beams : per_parser)
      for (Hypothesis& hyp : beams[u].hyps)
        hyp.aux["votes"] = static_cast<double>(counts[hyp.actions]);
  }
}

struct RankerTrainConfig {
  int epochs = 20;
  double learning_rate = 0.5;
  std::uint64_t seed = 1;
};

// One training beam: candidates plus the gold tree they are judged against.
struct LabeledBeam {
  BeamSet beams;
  ParseTree gold;
};

// Trains the pairwise hinge-loss ranker by subgradient descent over
// (correct, incorrect) feature-difference pairs. Throws if no training beam
// contains a correct hypothesis.
inline RankModel train_ranker(const std::vector<LabeledBeam>& data,
                              const NGramLM& lm, bool use_votes,
                              RankerTrainConfig cfg = {}) {
  RankModel model;
  model.use_votes = use_votes;
  int nf = model.num_features();

  std::vector<std::vector<RankFeatures>> feats(data.size());
  std::vector<std::optional<std::size_t>> correct(data.size());
  std::vector<double> sum(3, 0.0), sumsq(3, 0.0);
  std::size_t total = 0;
  for (std::size_t b = 0; b < data.size(); ++b) {
    const BeamSet& beams = data[b].beams;
    for (std::size_t i = 0; i < beams.hyps.size(); ++i) {
      RankFeatures f = rank_features(beams.hyps[i], beams.tokens, lm);
      for (int d = 0; d < 3; ++d) {
        sum[d] += f.get(d);
        sumsq[d] += f.get(d) * f.get(d);
      }
      ++total;
      feats[b].push_back(f);
      ParseTree tree = actions_to_tree(beams.hyps[i].actions, beams.tokens);
      if (!correct[b] && exact_match(data[b].gold, tree)) correct[b] = i;
    }
  }
  for (int d = 0; d < 3; ++d) {
    model.mean[d] = sum[d] / static_cast<double>(total);
    double var = sumsq[d] / static_cast<double>(total) - model.mean[d] * model.mean[d];
    model.stdev[d] = var > 1e-12 ? std::sqrt(var) : 1.0;
  }

  std::vector<std::pair<std::size_t, std::pair<std::size_t, std::size_t>>> pairs;
  for (std::size_t b = 0; b < data.size(); ++b) {
    if (!correct[b]) continue;
    for (std::size_t i = 0; i < feats[b].size(); ++i)
      if (i != *correct[b]) pairs.push_back({b, {*correct[b], i}});
  }
  if (pairs.empty())
    throw std::invalid_argument(
        "no training beam contains a correct hypothesis");

  auto standardized = [&](const RankFeatures& f, int d) {
    return (f.get(d) - model.mean[d]) / model.stdev[d];
  };

  std::mt19937_64 rng(derive_seed(cfg.seed, "ranker"));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(pairs.begin(), pairs.end(), rng);
    double lr = cfg.learning_rate / (1.0 + epoch);
    for (const auto& [b, pair] : pairs) {
      const RankFeatures& fc = feats[b][pair.first];
      const RankFeatures& fi = feats[b][pair.second];
      double margin = 0.0;
      for (int d = 0; d < nf; ++d)
        margin += model.weights[d] * (standardized(fc, d) - standardized(fi, d));
      if (margin < 1.0)
        for (int d = 0; d < nf; ++d)
          model.weights[d] += lr * (standardized(fc, d) - standardized(fi, d));
    }
  }
  return model;
}

inline nlohmann::json ranker_to_json(const RankModel& model) {
  return nlohmann::json{{"format", kRankerFormat},
                        {"version", kRankerVersion},
                        {"use_votes", model.use_votes},
                        {"weights", model.weights},
                        {"mean", model.mean},
                        {"stdev", model.stdev}};
}

inline RankModel ranker_from_json(const nlohmann::json& j) {
  if (!j.contains("format") || j["format"] != kRankerFormat)
    throw std::runtime_error("not a ranker file");
  if (j["version"].get<int>() != kRankerVersion)
    throw std::runtime_error("unsupported ranker version");
  RankModel model;
  model.use_votes = j["use_votes"].get<bool>();
  j["weights"].get_to(model.weights);
  j["mean"].get_to(model.mean);
  j["stdev"].get_to(model.stdev);
  return model;
}

inline void save_ranker(const RankModel& model,
                        const std::filesystem::path& path) {
  atomic_write(path, ranker_to_json(model).dump(2) + "\n");
}

inline RankModel load_ranker(const std::filesystem::path& path) {
  return ranker_from_json(nlohmann::json::parse(read_file(path)));
}

}  // namespace topparse
