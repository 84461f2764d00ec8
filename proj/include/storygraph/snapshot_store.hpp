// SPDX-License-Identifier: Apache-2.0
#pragma once

// Versioned on-disk snapshots: root/YYYY/MM/DD/HHMM.json, written once via
// temp file + link so readers never observe a partial file.

#include <openssl/evp.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "storygraph/entity_extract.hpp"
#include "storygraph/error.hpp"
#include "storygraph/feed_ingest.hpp"
#include "storygraph/simgraph.hpp"
#include "storygraph/time.hpp"

namespace storygraph {

inline constexpr int kSnapshotSchemaVersion = 1;

/// Identifies one cycle: calendar date plus the cycle start minute. At the
/// default ten-minute cadence sequence() runs 0..143.
struct SnapshotId {
  Date date{};
  int minute_of_day = 0;

  int sequence() const { return minute_of_day / 10; }
  UtcTime time() const { return start_of_day(date) + std::chrono::minutes{minute_of_day}; }

  static SnapshotId from_time(UtcTime t) { return {date_of(t), storygraph::minute_of_day(t)}; }

  static SnapshotId from_sequence(Date d, int sequence) {
    if (sequence < 0 || sequence > 143) throw Error(ErrorCode::InvalidArgument, "sequence must lie in [0,143]");
    return {d, sequence * 10};
  }

  std::string label() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02d%02d", minute_of_day / 60, minute_of_day % 60);
    return format_date(date) + "/" + buf;
  }

  friend bool operator==(const SnapshotId& a, const SnapshotId& b) { return a.time() == b.time(); }
  friend auto operator<=>(const SnapshotId& a, const SnapshotId& b) { return a.time() <=> b.time(); }
};

struct PlaintextRef {
  std::string path;    // relative to the snapshot file's directory
  std::string sha256;  // lowercase hex of the UTF-8 body

  bool operator==(const PlaintextRef&) const = default;
};

struct SnapshotArticle {
  std::size_t node_id = 0;
  ArticleRef ref;
  std::string final_url;
  std::string title;
  std::optional<UtcTime> published;
  std::string plaintext;
  std::optional<PlaintextRef> plaintext_ref;
  std::vector<EntityMention> mentions;
  TokenSet token_set;

  bool operator==(const SnapshotArticle&) const = default;
};

struct SourceTally {
  int selected = 0;  // article URLs taken from the feed
  int fetched = 0;
  int kept = 0;  // made it into the graph
  int dropped = 0;

  bool operator==(const SourceTally&) const = default;
};

struct CycleDiagnostics {
  std::vector<Diagnostic> events;
  std::map<std::string, SourceTally> sources;

  bool operator==(const CycleDiagnostics&) const = default;
};

struct Snapshot {
  int schema_version = kSnapshotSchemaVersion;
  UtcTime snapshot_time{};
  SimilarityParams params;
  std::vector<SnapshotArticle> articles;
  std::vector<NewsEdge> edges;
  std::vector<StoryComponent> components;
  CycleDiagnostics diagnostics;

  bool operator==(const Snapshot&) const = default;

  SnapshotId id() const { return SnapshotId::from_time(snapshot_time); }
};

/// Assembles a snapshot from a built graph; components are recomputed here.
inline Snapshot make_snapshot(const SimilarityGraph& graph, const std::vector<EntitySet>& sets,
                              const std::vector<PlainDocument>& docs, const std::vector<std::string>& final_urls = {}) {
  Snapshot s;
  s.snapshot_time = graph.snapshot_time;
  s.params = graph.params;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    SnapshotArticle a;
    a.node_id = i;
    a.ref = sets[i].article_ref;
    a.final_url = i < final_urls.size() ? final_urls[i] : sets[i].article_ref.url;
    if (i < docs.size()) {
      a.title = docs[i].title;
      a.published = docs[i].published;
      a.plaintext = docs[i].plaintext;
    }
    a.mentions = sets[i].mentions;
    a.token_set = sets[i].token_set;
    s.articles.push_back(std::move(a));
  }
  s.edges = graph.edges;
  s.components = connected_components(graph);
  return s;
}

/// Rebuilds the graph view of a snapshot (for DOT export and ranking).
inline SimilarityGraph graph_of(const Snapshot& s) {
  SimilarityGraph g;
  g.snapshot_time = s.snapshot_time;
  g.params = s.params;
  for (const auto& a : s.articles) g.nodes.push_back({a.node_id, a.ref, a.title, a.token_set});
  g.edges = s.edges;
  return g;
}

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::StoreWriteError, "sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON schema

namespace detail {

using nlohmann::json;

[[noreturn]] inline void corrupt(const std::string& what) { throw Error(ErrorCode::CorruptSnapshot, what); }

inline const json& field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) corrupt(std::string("missing field '") + key + "'");
  return obj.at(key);
}

inline std::string str_field(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (!v.is_string()) corrupt(std::string("field '") + key + "' is not a string");
  return v.get<std::string>();
}

inline std::uint64_t uint_field(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    corrupt(std::string("field '") + key + "' is not a non-negative integer");
  return v.get<std::uint64_t>();
}

inline double real_field(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (!v.is_number()) corrupt(std::string("field '") + key + "' is not a number");
  return v.get<double>();
}

inline UtcTime time_field(const json& obj, const char* key) {
  auto t = parse_rfc3339(str_field(obj, key));
  if (!t) corrupt(std::string("field '") + key + "' is not an RFC 3339 timestamp");
  return *t;
}

inline std::optional<UtcTime> optional_time_field(const json& obj, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return time_field(obj, key);
}

inline std::vector<std::string> string_array(const json& v, const char* what) {
  if (!v.is_array()) corrupt(std::string(what) + " is not an array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) corrupt(std::string(what) + " holds a non-string");
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline json optional_time(const std::optional<UtcTime>& t) { return t ? json(format_rfc3339(*t)) : json(nullptr); }

inline json article_to_json(const SnapshotArticle& a) {
  json mentions = json::array();
  for (const auto& m : a.mentions) mentions.push_back(mention_to_json(m));
  json j = {
      {"node_id", a.node_id},
      {"source_id", a.ref.source_id},
      {"leaning", to_string(a.ref.leaning)},
      {"url", a.ref.url},
      {"final_url", a.final_url},
      {"feed_position", a.ref.feed_position},
      {"fetched_at", format_rfc3339(a.ref.fetched_at)},
      {"feed_title", a.ref.feed_title},
      {"feed_published", optional_time(a.ref.feed_published)},
      {"title", a.title},
      {"published", optional_time(a.published)},
      {"mentions", std::move(mentions)},
      {"token_set", a.token_set.items()},
  };
  if (a.plaintext_ref) {
    j["plaintext_ref"] = {{"path", a.plaintext_ref->path}, {"sha256", a.plaintext_ref->sha256}};
  } else {
    j["plaintext"] = a.plaintext;
  }
  return j;
}

inline SnapshotArticle article_from_json(const json& j) {
  SnapshotArticle a;
  a.node_id = uint_field(j, "node_id");
  a.ref.source_id = str_field(j, "source_id");
  auto leaning = parse_leaning(str_field(j, "leaning"));
  if (!leaning) corrupt("unknown leaning for node " + std::to_string(a.node_id));
  a.ref.leaning = *leaning;
  a.ref.url = str_field(j, "url");
  a.final_url = str_field(j, "final_url");
  a.ref.feed_position = static_cast<int>(uint_field(j, "feed_position"));
  a.ref.fetched_at = time_field(j, "fetched_at");
  a.ref.feed_title = str_field(j, "feed_title");
  a.ref.feed_published = optional_time_field(j, "feed_published");
  a.title = str_field(j, "title");
  a.published = optional_time_field(j, "published");
  if (j.contains("plaintext_ref")) {
    const json& r = j.at("plaintext_ref");
    a.plaintext_ref = PlaintextRef{str_field(r, "path"), str_field(r, "sha256")};
  } else {
    a.plaintext = str_field(j, "plaintext");
  }
  const json& mentions = field(j, "mentions");
  if (!mentions.is_array()) corrupt("mentions is not an array");
  try {
    for (const auto& m : mentions) a.mentions.push_back(mention_from_json(m));
  } catch (const Error& e) {
    corrupt("node " + std::to_string(a.node_id) + ": " + e.what());
  }
  auto tokens = string_array(field(j, "token_set"), "token_set");
  a.token_set = TokenSet(tokens);
  if (a.token_set.items() != tokens) corrupt("token_set of node " + std::to_string(a.node_id) + " is not sorted and unique");
  return a;
}

}  // namespace detail

inline nlohmann::json component_to_json(const StoryComponent& c) {
  return {{"node_ids", c.node_ids},
          {"edge_count", c.edge_count},
          {"attention_score", c.attention_score},
          {"source_ids", c.source_ids},
          {"multi_source", c.multi_source}};
}

inline nlohmann::json edge_to_json(const NewsEdge& e) {
  return {{"a", e.node_a}, {"b", e.node_b}, {"jaccard", e.jaccard}, {"overlap", e.overlap}, {"blended", e.blended}};
}

inline nlohmann::json snapshot_to_json(const Snapshot& s) {
  using nlohmann::json;
  json articles = json::array();
  for (const auto& a : s.articles) articles.push_back(detail::article_to_json(a));
  json edges = json::array();
  for (const auto& e : s.edges) edges.push_back(edge_to_json(e));
  json components = json::array();
  for (const auto& c : s.components) components.push_back(component_to_json(c));
  json events = json::array();
  for (const auto& d : s.diagnostics.events) {
    events.push_back({{"stage", d.stage}, {"source_id", d.source_id}, {"url", d.url}, {"outcome", d.outcome}, {"detail", d.detail}});
  }
  json sources = json::object();
  for (const auto& [id, t] : s.diagnostics.sources) {
    sources[id] = {{"selected", t.selected}, {"fetched", t.fetched}, {"kept", t.kept}, {"dropped", t.dropped}};
  }
  return {
      {"schema_version", s.schema_version},
      {"snapshot_time", format_rfc3339(s.snapshot_time)},
      {"params", {{"alpha", s.params.alpha.value()}, {"beta", s.params.beta.value()}}},
      {"articles", std::move(articles)},
      {"edges", std::move(edges)},
      {"components", std::move(components)},
      {"diagnostics", {{"events", std::move(events)}, {"sources", std::move(sources)}}},
  };
}

/// Canonical JSON: sorted keys, nodes by id, edges by id pair, RFC 3339 UTC
/// timestamps, shortest round-trip reals. Byte-identical for equal input.
inline std::string serialize(const Snapshot& s) { return snapshot_to_json(s).dump(1) + "\n"; }

/// Checks every stored relation against a recomputation from the stored
/// token sets and parameters.
inline void validate_snapshot(const Snapshot& s) {
  using detail::corrupt;
  if (s.schema_version != kSnapshotSchemaVersion)
    throw Error(ErrorCode::SchemaVersionMismatch, "unsupported schema_version " + std::to_string(s.schema_version));
  try {
    s.params.validate();
  } catch (const Error& e) {
    corrupt(std::string("params: ") + e.what());
  }
  std::vector<TokenSet> tokens;
  std::vector<std::string> sources;
  for (std::size_t i = 0; i < s.articles.size(); ++i) {
    const auto& a = s.articles[i];
    if (a.node_id != i) corrupt("node ids must run 0..n-1 in order; found " + std::to_string(a.node_id) + " at " + std::to_string(i));
    for (const auto& t : a.token_set) {
      if (!is_valid_token(t)) corrupt("malformed token '" + t + "' in node " + std::to_string(i));
    }
    if (tokens_of(a.mentions) != a.token_set) corrupt("token_set of node " + std::to_string(i) + " differs from its mentions");
    tokens.push_back(a.token_set);
    sources.push_back(a.ref.source_id);
  }
  for (std::size_t k = 0; k < s.edges.size(); ++k) {
    const auto& e = s.edges[k];
    if (e.node_a >= s.articles.size() || e.node_b >= s.articles.size())
      corrupt("edge " + std::to_string(e.node_a) + "-" + std::to_string(e.node_b) + " references a missing node");
    if (e.node_a >= e.node_b) corrupt("edge " + std::to_string(e.node_a) + "-" + std::to_string(e.node_b) + " is not ordered");
    if (k > 0 && std::pair(s.edges[k - 1].node_a, s.edges[k - 1].node_b) >= std::pair(e.node_a, e.node_b))
      corrupt("edges are not strictly ordered by node pair");
  }
  if (find_edges(tokens, s.params) != s.edges) corrupt("stored edges differ from recomputed similarity edges");
  if (components_of(s.articles.size(), s.edges, sources) != s.components)
    corrupt("stored components differ from recomputed components");
}

/// Parses and validates. Sidecar plaintext is loaded and hash-checked when
/// base_dir is given; otherwise plaintext stays empty and the ref is kept.
inline Snapshot deserialize(std::string_view bytes, const std::optional<std::filesystem::path>& base_dir = std::nullopt) {
  using detail::corrupt;
  using nlohmann::json;
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::exception& e) {
    corrupt(std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) corrupt("top level is not an object");
  const json& version = detail::field(j, "schema_version");
  if (!version.is_number_integer()) corrupt("schema_version is not an integer");
  if (version.get<std::int64_t>() != kSnapshotSchemaVersion)
    throw Error(ErrorCode::SchemaVersionMismatch, "unsupported schema_version " + version.dump());

  Snapshot s;
  try {
    s.snapshot_time = detail::time_field(j, "snapshot_time");
    const json& params = detail::field(j, "params");
    s.params = SimilarityParams{Ratio::from_double(detail::real_field(params, "alpha")),
                                Ratio::from_double(detail::real_field(params, "beta"))};
    const json& articles = detail::field(j, "articles");
    if (!articles.is_array()) corrupt("articles is not an array");
    for (const auto& a : articles) s.articles.push_back(detail::article_from_json(a));
    const json& edges = detail::field(j, "edges");
    if (!edges.is_array()) corrupt("edges is not an array");
    for (const auto& e : edges) {
      s.edges.push_back({detail::uint_field(e, "a"), detail::uint_field(e, "b"), detail::real_field(e, "jaccard"),
                         detail::real_field(e, "overlap"), detail::real_field(e, "blended")});
    }
    const json& components = detail::field(j, "components");
    if (!components.is_array()) corrupt("components is not an array");
    for (const auto& c : components) {
      StoryComponent comp;
      const json& ids = detail::field(c, "node_ids");
      if (!ids.is_array()) corrupt("node_ids is not an array");
      for (const auto& id : ids) {
        if (!id.is_number_unsigned()) corrupt("node id is not a non-negative integer");
        comp.node_ids.push_back(id.get<std::size_t>());
      }
      comp.edge_count = detail::uint_field(c, "edge_count");
      comp.attention_score = detail::real_field(c, "attention_score");
      comp.source_ids = detail::string_array(detail::field(c, "source_ids"), "source_ids");
      const json& multi = detail::field(c, "multi_source");
      if (!multi.is_boolean()) corrupt("multi_source is not a boolean");
      comp.multi_source = multi.get<bool>();
      s.components.push_back(std::move(comp));
    }
    const json& diag = detail::field(j, "diagnostics");
    const json& events = detail::field(diag, "events");
    if (!events.is_array()) corrupt("diagnostics.events is not an array");
    for (const auto& d : events) {
      s.diagnostics.events.push_back({detail::str_field(d, "stage"), detail::str_field(d, "source_id"),
                                      detail::str_field(d, "url"), detail::str_field(d, "outcome"),
                                      detail::str_field(d, "detail")});
    }
    const json& sources = detail::field(diag, "sources");
    if (!sources.is_object()) corrupt("diagnostics.sources is not an object");
    for (const auto& [id, t] : sources.items()) {
      s.diagnostics.sources[id] = {static_cast<int>(detail::uint_field(t, "selected")),
                                   static_cast<int>(detail::uint_field(t, "fetched")),
                                   static_cast<int>(detail::uint_field(t, "kept")),
                                   static_cast<int>(detail::uint_field(t, "dropped"))};
    }
  } catch (const json::exception& e) {
    corrupt(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) corrupt(e.what());
    throw;
  }

  validate_snapshot(s);

  if (base_dir) {
    for (auto& a : s.articles) {
      if (!a.plaintext_ref) continue;
      std::ifstream in(*base_dir / a.plaintext_ref->path, std::ios::binary);
      if (!in) corrupt("missing plaintext sidecar " + a.plaintext_ref->path);
      std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      if (sha256_hex(body) != a.plaintext_ref->sha256) corrupt("plaintext sidecar hash mismatch for " + a.plaintext_ref->path);
      a.plaintext = std::move(body);
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Store layout

/// root/YYYY/MM/DD/HHMM.json
inline std::filesystem::path store_path(const SnapshotId& id, const std::filesystem::path& root) {
  char dir[48], file[32];
  std::snprintf(dir, sizeof dir, "%04d/%02u/%02u", static_cast<int>(id.date.year()), static_cast<unsigned>(id.date.month()),
                static_cast<unsigned>(id.date.day()));
  std::snprintf(file, sizeof file, "%02d%02d.json", id.minute_of_day / 60, id.minute_of_day % 60);
  return root / dir / file;
}

/// Inverse of store_path for paths under root; nullopt for anything else.
inline std::optional<SnapshotId> id_from_path(const std::filesystem::path& path, const std::filesystem::path& root) {
  std::error_code ec;
  auto rel = std::filesystem::relative(path, root, ec);
  if (ec) return std::nullopt;
  std::vector<std::string> parts;
  for (const auto& p : rel) parts.push_back(p.string());
  if (parts.size() != 4) return std::nullopt;
  auto all_digits = [](const std::string& s, std::size_t n) {
    return s.size() == n && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  const std::string& file = parts[3];
  if (!all_digits(parts[0], 4) || !all_digits(parts[1], 2) || !all_digits(parts[2], 2) || file.size() != 9 ||
      !file.ends_with(".json") || !all_digits(file.substr(0, 4), 4))
    return std::nullopt;
  auto date = parse_date(parts[0] + "-" + parts[1] + "-" + parts[2]);
  int hh = std::stoi(file.substr(0, 2)), mm = std::stoi(file.substr(2, 2));
  if (!date || hh > 23 || mm > 59) return std::nullopt;
  return SnapshotId{*date, hh * 60 + mm};
}

struct WriteOptions {
  bool externalize_plaintext = false;
};

namespace detail {

/// Writes bytes to `target` only if it does not exist yet. The data goes to
/// a temp file first and is published with link(2), which refuses to
/// replace an existing name.
inline void write_once(const std::filesystem::path& target, std::string_view bytes) {
  static std::atomic<unsigned> counter{0};
  std::filesystem::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::StoreWriteError, "cannot create " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::StoreWriteError, "short write to " + tmp.string());
  }
  if (::link(tmp.c_str(), target.c_str()) != 0) {
    int err = errno;
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    if (err == EEXIST) throw Error(ErrorCode::StoreWriteError, target.string() + " already exists");
    throw Error(ErrorCode::StoreWriteError, "cannot publish " + target.string() + ": " + std::strerror(err));
  }
  std::error_code ignored;
  std::filesystem::remove(tmp, ignored);
}

}  // namespace detail

/// Writes the snapshot at store_path(snapshot.id(), root). Never
/// overwrites: a second write for the same id fails with StoreWriteError.
inline std::filesystem::path write_snapshot(const std::filesystem::path& root, Snapshot snapshot,
                                            const WriteOptions& options = {}) {
  auto path = store_path(snapshot.id(), root);
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::StoreWriteError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  if (std::filesystem::exists(path)) throw Error(ErrorCode::StoreWriteError, path.string() + " already exists");

  if (options.externalize_plaintext) {
    std::string sidecar_dir = path.stem().string() + ".d";
    std::filesystem::create_directories(path.parent_path() / sidecar_dir, ec);
    if (ec) throw Error(ErrorCode::StoreWriteError, "cannot create sidecar directory: " + ec.message());
    for (auto& a : snapshot.articles) {
      if (a.plaintext_ref) continue;
      std::string rel = sidecar_dir + "/" + std::to_string(a.node_id) + ".txt";
      detail::write_once(path.parent_path() / rel, a.plaintext);
      a.plaintext_ref = PlaintextRef{rel, sha256_hex(a.plaintext)};
    }
  }
  detail::write_once(path, serialize(snapshot));
  return path;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::CorruptSnapshot, "cannot read " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline Snapshot load_snapshot(const std::filesystem::path& path) {
  return deserialize(read_file(path), path.parent_path());
}

/// Ids of all snapshots with time in [from, to], ascending.
inline std::vector<SnapshotId> list_range(const std::filesystem::path& root, UtcTime from, UtcTime to) {
  std::vector<SnapshotId> out;
  if (from > to) return out;
  std::error_code ec;
  if (!std::filesystem::is_directory(root, ec)) return out;
  Date first = date_of(from), last = date_of(to);
  for (auto day = std::chrono::sys_days{first}; day <= std::chrono::sys_days{last}; day += std::chrono::days{1}) {
    auto dir = store_path(SnapshotId{Date{day}, 0}, root).parent_path();
    if (!std::filesystem::is_directory(dir, ec)) continue;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
      if (!entry.is_regular_file()) continue;
      auto id = id_from_path(entry.path(), root);
      if (!id) continue;
      if (id->time() >= from && id->time() <= to) out.push_back(*id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace storygraph
