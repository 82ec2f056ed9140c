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
#include <cstdio>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "topparse/corpus.hpp"
#include "topparse/tree.hpp"

namespace topparse {

// The seven error classes for a (gold, predicted) tree pair:
//   WT  wrong top intent        WL  wrong label at a matched span
//   SS  spurious span           MS  missing span
//   WS  constituent wrongly split into pieces
//   WJ  constituents wrongly joined into one
//   BB  bad boundaries
enum class ErrorTag { WT, WL, SS, MS, WS, WJ, BB };

inline constexpr ErrorTag kAllErrorTags[] = {
    ErrorTag::WT, ErrorTag::WL, ErrorTag::SS, ErrorTag::MS,
    ErrorTag::WS, ErrorTag::WJ, ErrorTag::BB};

inline const char* tag_name(ErrorTag t) {
  switch (t) {
    case ErrorTag::WT: return "WT";
    case ErrorTag::WL: return "WL";
    case ErrorTag::SS: return "SS";
    case ErrorTag::MS: return "MS";
    case ErrorTag::WS: return "WS";
    case ErrorTag::WJ: return "WJ";
    case ErrorTag::BB: return "BB";
  }
  return "?";
}

// Per-pair classification detail: the tag set, one attribution per
// span-unmatched gold constituent, and the spurious predicted constituents.
struct Classification {
  std::set<ErrorTag> tags;
  std::vector<std::pair<Constituent, ErrorTag>> attributions;
  std::vector<Constituent> spurious;
};

namespace detail {

inline bool spans_overlap(const Constituent& a, const Constituent& b) {
  return a.start < b.end && b.start < a.end;
}

// Proper span inclusion: inner within outer, spans unequal.
inline bool strictly_inside(const Constituent& inner, const Constituent& outer) {
  return inner.start >= outer.start && inner.end <= outer.end &&
         !(inner.start == outer.start && inner.end == outer.end);
}

}  // namespace detail

// Classifies a (gold, predicted) pair. A constituent is span-matched when
// the other tree has a constituent over the same token span, any label.
// Rules, each contributing independently:
//   WT  root labels differ.
//   WL  a non-root gold constituent is span-matched but no predicted
//       constituent at that span carries its label.
//   For each span-unmatched gold g, with U the span-unmatched predicted
//   constituents overlapping g:
//     U empty                                  -> MS
//     >= 2 members of U strictly inside g      -> WS
//     some p in U strictly containing g that strictly contains >= 2
//       span-unmatched gold constituents       -> WJ
//     otherwise                                -> BB
//   SS  a span-unmatched predicted constituent overlaps no span-unmatched
//       gold constituent.
inline Classification classify_detailed(const ParseTree& gold,
                                        const ParseTree& pred) {
  if (gold.tokens != pred.tokens)
    throw std::invalid_argument("classify: token lists differ");
  Classification out;

  if (gold.root.label() != pred.root.label()) out.tags.insert(ErrorTag::WT);

  std::vector<Constituent> G = constituents(gold);
  std::vector<Constituent> P = constituents(pred);
  std::set<std::pair<int, int>> g_spans, p_spans;
  for (const auto& c : G) g_spans.insert({c.start, c.end});
  for (const auto& c : P) p_spans.insert({c.start, c.end});

  Constituent root_constituent{gold.root.label(), 0,
                               static_cast<int>(gold.tokens.size())};
  for (const Constituent& g : G) {
    if (g == root_constituent) {
      // The root itself is judged by WT; skip exactly one occurrence.
      root_constituent.start = -1;
      continue;
    }
    if (!p_spans.count({g.start, g.end})) continue;
    bool label_found = false;
    for (const Constituent& p : P)
      label_found |= p.start == g.start && p.end == g.end && p.label == g.label;
    if (!label_found) out.tags.insert(ErrorTag::WL);
  }

  std::vector<Constituent> gold_unmatched, pred_unmatched;
  for (const Constituent& g : G)
    if (!p_spans.count({g.start, g.end})) gold_unmatched.push_back(g);
  for (const Constituent& p : P)
    if (!g_spans.count({p.start, p.end})) pred_unmatched.push_back(p);

  for (const Constituent& g : gold_unmatched) {
    std::vector<const Constituent*> overlapping;
    for (const Constituent& p : pred_unmatched)
      if (detail::spans_overlap(p, g)) overlapping.push_back(&p);

    ErrorTag tag;
    if (overlapping.empty()) {
      tag = ErrorTag::MS;
    } else {
      int inside = 0;
      for (const Constituent* p : overlapping)
        inside += detail::strictly_inside(*p, g);
      if (inside >= 2) {
        tag = ErrorTag::WS;
      } else {
        bool joined = false;
        for (const Constituent* p : overlapping) {
          if (!detail::strictly_inside(g, *p)) continue;
          int swallowed = 0;
          for (const Constituent& g2 : gold_unmatched)
            swallowed += detail::strictly_inside(g2, *p);
          if (swallowed >= 2) joined = true;
        }
        tag = joined ? ErrorTag::WJ : ErrorTag::BB;
      }
    }
    out.tags.insert(tag);
    out.attributions.push_back({g, tag});
  }

  for (const Constituent& p : pred_unmatched) {
    bool touches_gold = false;
    for (const Constituent& g : gold_unmatched)
      touches_gold |= detail::spans_overlap(p, g);
    if (!touches_gold) {
      out.tags.insert(ErrorTag::SS);
      out.spurious.push_back(p);
    }
  }

  return out;
}

inline std::set<ErrorTag> classify(const ParseTree& gold,
                                   const ParseTree& pred) {
  return classify_detailed(gold, pred).tags;
}

// Corpus-level error report: per-tag utterance counts plus per-utterance
// tag sets, in gold-corpus order.
struct ErrorReport {
  std::map<ErrorTag, int> counts;
  std::vector<std::pair<std::string, std::set<ErrorTag>>> per_utterance;

  int count(ErrorTag t) const {
    auto it = counts.find(t);
    return it == counts.end() ? 0 : it->second;
  }
};

inline ErrorReport error_report(const Corpus& gold, const Corpus& pred) {
  std::map<std::string, const ParseTree*> by_id;
  for (const CorpusEntry& e : pred.entries) by_id[e.id] = &e.tree;
  ErrorReport report;
  for (ErrorTag t : kAllErrorTags) report.counts[t] = 0;
  for (const CorpusEntry& e : gold.entries) {
    auto it = by_id.find(e.id);
    if (it == by_id.end())
      throw std::invalid_argument("prediction missing for id '" + e.id + "'");
    std::set<ErrorTag> tags = classify(e.tree, *it->second);
    for (ErrorTag t : tags) report.counts[t] += 1;
    report.per_utterance.push_back({e.id, std::move(tags)});
  }
  return report;
}

// Signed relative change per tag, (new - base) / base; undefined when the
// base count is zero.
struct TagChange {
  int base = 0;
  int now = 0;
  std::optional<double> relative;
};

inline std::map<ErrorTag, TagChange> compare_reports(const ErrorReport& base,
                                                     const ErrorReport& now) {
  if (base.per_utterance.size() != now.per_utterance.size())
    throw std::invalid_argument("reports cover different corpora");
  for (std::size_t i = 0; i < base.per_utterance.size(); ++i)
    if (base.per_utterance[i].first != now.per_utterance[i].first)
      throw std::invalid_argument("reports cover different corpora");
  std::map<ErrorTag, TagChange> out;
  for (ErrorTag t : kAllErrorTags) {
    TagChange c;
    c.base = base.count(t);
    c.now = now.count(t);
    if (c.base != 0)
      c.relative = static_cast<double>(c.now - c.base) / c.base;
    out[t] = c;
  }
  return out;
}

inline std::string format_change(const TagChange& c) {
  if (!c.relative) return "n/a";
  long pct = std::lround(*c.relative * 100.0);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%+ld%%", pct);
  return buf;
}

inline std::string format_report(const ErrorReport& report) {
  std::ostringstream os;
  os << "tag  count\n";
  for (ErrorTag t : kAllErrorTags)
    os << tag_name(t) << "   " << std::setw(6) << report.count(t) << "\n";
  return os.str();
}

inline std::string format_comparison(
    const std::map<ErrorTag, TagChange>& changes) {
  std::ostringstream os;
  os << "tag    base     new  change\n";
  for (ErrorTag t : kAllErrorTags) {
    const TagChange& c = changes.at(t);
    os << tag_name(t) << "   " << std::setw(6) << c.base << "  " << std::setw(6)
       << c.now << "  " << std::setw(6) << format_change(c) << "\n";
  }
  return os.str();
}

inline nlohmann::json report_to_json(const ErrorReport& report) {
  nlohmann::json j;
  for (ErrorTag t : kAllErrorTags) j[tag_name(t)] = report.count(t);
  return j;
}

inline std::string report_per_utterance_jsonl(const ErrorReport& report) {
  std::string out;
  for (const auto& [id, tags] : report.per_utterance) {
    nlohmann::json j;
    j["id"] = id;
    std::vector<std::string> names;
    for (ErrorTag t : tags) names.push_back(tag_name(t));
    j["tags"] = names;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace topparse
