// SPDX-License-Identifier: Apache-2.0
#pragma once

// Top-story queries over stored snapshots. A story is a multi-source
// component; the same event seen in many snapshots is collapsed by comparing
// story signatures (the union of the member token sets).

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "storygraph/simgraph.hpp"
#include "storygraph/snapshot_store.hpp"
#include "storygraph/time.hpp"

namespace storygraph {

struct StoryRecord {
  SnapshotId snapshot_id;
  StoryComponent component;
  std::string headline;
  Date date{};
  TokenSet signature;

  double attention_score() const { return component.attention_score; }
};

struct RankQuery {
  UtcTime from{};
  UtcTime to{};
  std::size_t k = 5;
  Ratio dedupe_threshold{27, 100};
  Ratio alpha{3, 10};  // blend used when comparing signatures

  void validate() const {
    if (from > to) throw Error(ErrorCode::InvalidArgument, "query range is empty: from > to");
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    SimilarityParams{alpha, dedupe_threshold}.validate();
  }
};

/// Multi-source components of one snapshot as story records.
inline std::vector<StoryRecord> stories_of(const Snapshot& s) {
  std::vector<std::size_t> degree(s.articles.size(), 0);
  for (const auto& e : s.edges) {
    ++degree[e.node_a];
    ++degree[e.node_b];
  }
  std::vector<StoryRecord> out;
  for (const auto& c : s.components) {
    if (!c.multi_source) continue;
    StoryRecord r;
    r.snapshot_id = s.id();
    r.component = c;
    r.date = r.snapshot_id.date;
    std::size_t hub = c.node_ids.front();
    for (std::size_t id : c.node_ids) {
      if (degree[id] > degree[hub]) hub = id;  // ascending ids keep the smallest on ties
      r.signature.merge(s.articles[id].token_set);
    }
    r.headline = s.articles[hub].title;
    out.push_back(std::move(r));
  }
  return out;
}

/// Ranking order: higher attention first, then earlier snapshot, then
/// smaller node id.
inline bool ranks_before(const StoryRecord& a, const StoryRecord& b) {
  auto cmp = compare_attention(a.component, b.component);
  if (cmp != 0) return cmp > 0;
  if (a.snapshot_id != b.snapshot_id) return a.snapshot_id < b.snapshot_id;
  return a.component.node_ids.front() < b.component.node_ids.front();
}

inline void sort_stories(std::vector<StoryRecord>& records) {
  std::stable_sort(records.begin(), records.end(), ranks_before);
}

/// Greedy filter over score-sorted candidates: a candidate is dropped when
/// its signature is similar (blend >= threshold) to an accepted story from
/// the same or an adjacent calendar day.
inline std::vector<StoryRecord> dedupe_stories(const std::vector<StoryRecord>& candidates, Ratio threshold,
                                               Ratio alpha = Ratio{3, 10}) {
  SimilarityParams p{alpha, threshold};
  p.validate();
  std::vector<StoryRecord> kept;
  for (const auto& c : candidates) {
    bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const StoryRecord& k) {
      return std::abs(days_between(k.date, c.date)) <= 1 && sim_decision(k.signature, c.signature, p).similar;
    });
    if (!duplicate) kept.push_back(c);
  }
  return kept;
}

/// Pure form of top_story_of_day over already-collected records.
inline std::optional<StoryRecord> best_story(std::vector<StoryRecord> records) {
  if (records.empty()) return std::nullopt;
  sort_stories(records);
  return records.front();
}

/// Pure form of top_k_stories over already-collected records.
inline std::vector<StoryRecord> top_k(std::vector<StoryRecord> records, const RankQuery& q) {
  q.validate();
  sort_stories(records);
  auto kept = dedupe_stories(records, q.dedupe_threshold, q.alpha);
  if (kept.size() > q.k) kept.resize(q.k);
  return kept;
}

/// Loads every snapshot in [from, to] and gathers its stories.
inline std::vector<StoryRecord> collect_stories(const std::filesystem::path& root, UtcTime from, UtcTime to) {
  std::vector<StoryRecord> out;
  for (const auto& id : list_range(root, from, to)) {
    Snapshot s = deserialize(read_file(store_path(id, root)));
    auto stories = stories_of(s);
    out.insert(out.end(), std::make_move_iterator(stories.begin()), std::make_move_iterator(stories.end()));
  }
  return out;
}

inline std::optional<StoryRecord> top_story_of_day(const std::filesystem::path& root, Date date) {
  UtcTime from = start_of_day(date);
  UtcTime to = from + std::chrono::days{1} - std::chrono::seconds{1};
  return best_story(collect_stories(root, from, to));
}

inline std::vector<StoryRecord> top_k_stories(const std::filesystem::path& root, const RankQuery& q) {
  q.validate();
  return top_k(collect_stories(root, q.from, q.to), q);
}

// ---------------------------------------------------------------------------
// Output

inline nlohmann::json story_to_json(const StoryRecord& r, std::size_t rank) {
  return {{"rank", rank},
          {"attention_score", r.component.attention_score},
          {"date", format_date(r.date)},
          {"snapshot", format_rfc3339(r.snapshot_id.time())},
          {"headline", r.headline},
          {"component", component_to_json(r.component)}};
}

inline nlohmann::json stories_to_json(const std::vector<StoryRecord>& records) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < records.size(); ++i) out.push_back(story_to_json(records[i], i + 1));
  return out;
}

/// Rank | Score | Date | Story
inline void write_story_table(std::ostream& os, const std::vector<StoryRecord>& records) {
  os << "Rank  Score   Date        Story\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    char line[64];
    std::snprintf(line, sizeof line, "%-5zu %-7.2f %-11s ", i + 1, records[i].component.attention_score,
                  format_date(records[i].date).c_str());
    os << line << records[i].headline << "\n";
  }
}

}  // namespace storygraph
