// SPDX-License-Identifier: Apache-2.0
// Builders for synthetic snapshots shared by several test programs.
#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "storygraph/snapshot_store.hpp"

namespace sgtest {

using namespace storygraph;

struct Art {
  std::string source;
  std::string title;
  std::vector<std::string> tokens;  // already normalized
  Leaning leaning = Leaning::Center;
};

inline UtcTime at(const char* rfc3339) { return *parse_rfc3339(rfc3339); }

inline EntitySet entity_set(const Art& a, std::size_t i, UtcTime t) {
  EntitySet s;
  s.article_ref.source_id = a.source;
  s.article_ref.leaning = a.leaning;
  s.article_ref.url = "https://" + a.source + ".example/a/" + std::to_string(i);
  s.article_ref.fetched_at = t;
  s.article_ref.feed_title = a.title;
  for (const auto& tok : a.tokens) s.mentions.push_back(EntityMention{EntityClass::TopKTerm, tok, {tok}});
  s.token_set = tokens_of(s.mentions);
  return s;
}

inline Snapshot snapshot_of(UtcTime t, const std::vector<Art>& arts, SimilarityParams params = {}) {
  std::vector<EntitySet> sets;
  std::vector<PlainDocument> docs;
  for (std::size_t i = 0; i < arts.size(); ++i) {
    sets.push_back(entity_set(arts[i], i, t));
    PlainDocument d;
    d.article_ref = sets.back().article_ref;
    d.title = arts[i].title;
    d.plaintext = "Body of " + arts[i].title + ".";
    docs.push_back(std::move(d));
  }
  auto graph = build_graph(sets, params, t);
  return make_snapshot(graph, sets, docs);
}

// "w1 w2 ... wn" with a prefix, for sets of a given size.
inline std::vector<std::string> words(const std::string& prefix, int from, int to) {
  std::vector<std::string> out;
  for (int i = from; i < to; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

inline std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Builds the snapshots described by an archive file (see fixtures/rank).
// Each story contributes one article per listed source, all carrying the
// event's tokens plus the story's extras; loners get private tokens.
inline std::vector<Snapshot> archive_snapshots(const std::filesystem::path& file) {
  std::ifstream in(file);
  auto j = nlohmann::json::parse(in);
  std::vector<Snapshot> out;
  for (const auto& snap : j["snapshots"]) {
    UtcTime t = at(snap["time"].get<std::string>().c_str());
    std::vector<Art> arts;
    for (const auto& story : snap["stories"]) {
      auto tokens = j["events"][story["event"].get<std::string>()].get<std::vector<std::string>>();
      if (story.contains("extra")) tokens = concat(tokens, story["extra"].get<std::vector<std::string>>());
      for (const auto& src : story["sources"]) arts.push_back({src.get<std::string>(), story["title"].get<std::string>(), tokens});
    }
    int loners = snap.value("loners", 0);
    auto stamp = std::to_string(minute_of_day(t)) + "d" + std::to_string(static_cast<unsigned>(date_of(t).day()));
    for (int i = 0; i < loners; ++i)
      arts.push_back({"loner", "Unrelated item", words("loner" + stamp + "n" + std::to_string(i) + "t", 0, 4)});
    out.push_back(snapshot_of(t, arts));
  }
  return out;
}

inline void write_archive(const std::filesystem::path& file, const std::filesystem::path& root) {
  for (auto& s : archive_snapshots(file)) write_snapshot(root, std::move(s));
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("storygraph-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  static int& counter() {
    static int n = 0;
    return n;
  }
};

}  // namespace sgtest
