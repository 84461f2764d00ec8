// SPDX-License-Identifier: Apache-2.0
#pragma once

// One collection cycle end to end, the aligned-tick scheduler that repeats
// it, and the offline replay client used for deterministic runs.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "storygraph/content_extract.hpp"
#include "storygraph/entity_extract.hpp"
#include "storygraph/error.hpp"
#include "storygraph/feed_ingest.hpp"
#include "storygraph/http.hpp"
#include "storygraph/simgraph.hpp"
#include "storygraph/snapshot_store.hpp"
#include "storygraph/time.hpp"

namespace storygraph {

struct RunConfig {
  std::vector<FeedSpec> feeds;
  int cap = 5;
  int interval_seconds = 600;
  SimilarityParams params;
  int k_terms = 10;
  std::filesystem::path store_root = "store";
  AnnotatorBackend annotator;
  FetchPolicy fetch;
  bool externalize_plaintext = false;

  void validate() const {
    if (feeds.empty()) throw Error(ErrorCode::ConfigInvalid, "no feeds configured");
    validate_roster(feeds);
    if (cap < 1) throw Error(ErrorCode::ConfigInvalid, "cap must be at least 1");
    if (interval_seconds < 60) throw Error(ErrorCode::ConfigInvalid, "interval_seconds must be at least 60");
    if (k_terms < 1) throw Error(ErrorCode::ConfigInvalid, "k_terms must be at least 1");
    if (store_root.empty()) throw Error(ErrorCode::ConfigInvalid, "store_root is empty");
    if (fetch.parallelism < 1) throw Error(ErrorCode::ConfigInvalid, "fetch.parallelism must be at least 1");
    if (fetch.max_redirects < 0) throw Error(ErrorCode::ConfigInvalid, "fetch.max_redirects must be non-negative");
    try {
      params.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigInvalid, e.what());
    }
    if (annotator.kind == AnnotatorBackend::Kind::NerService && annotator.endpoint.empty())
      throw Error(ErrorCode::ConfigInvalid, "annotator.endpoint is required for ner-service");
    if (annotator.kind == AnnotatorBackend::Kind::FixtureImport && annotator.fixture_path.empty())
      throw Error(ErrorCode::ConfigInvalid, "annotator.fixture_path is required for fixture-import");
  }
};

namespace detail {

[[noreturn]] inline void bad_config(const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); }

inline void check_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed, const char* where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      bad_config(std::string("unknown key '") + key + "' in " + where);
  }
}

inline std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace detail

/// Feed roster as a JSON array of {source_id, feed_url, leaning}.
inline std::vector<FeedSpec> feeds_from_json(const nlohmann::json& j) {
  if (!j.is_array()) detail::bad_config("feeds must be an array");
  std::vector<FeedSpec> out;
  for (const auto& f : j) {
    if (!f.is_object()) detail::bad_config("feed entry is not an object");
    detail::check_keys(f, {"source_id", "feed_url", "leaning", "name"}, "feed entry");
    FeedSpec spec;
    try {
      spec.source_id = f.at("source_id").get<std::string>();
      spec.feed_url = f.at("feed_url").get<std::string>();
      auto leaning = parse_leaning(f.at("leaning").get<std::string>());
      if (!leaning) detail::bad_config("unknown leaning for " + spec.source_id);
      spec.leaning = *leaning;
    } catch (const nlohmann::json::exception& e) {
      detail::bad_config(std::string("feed entry: ") + e.what());
    }
    out.push_back(std::move(spec));
  }
  return out;
}

/// Relative paths (feeds_file, store_root, fixture_path) resolve against
/// base_dir, normally the directory holding the config file.
inline RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  using detail::bad_config;
  if (!j.is_object()) bad_config("config must be a JSON object");
  detail::check_keys(j,
                     {"feeds", "feeds_file", "cap", "interval_seconds", "alpha", "beta", "k_terms", "store_root",
                      "annotator", "fetch", "externalize_plaintext"},
                     "config");
  RunConfig cfg;
  try {
    if (j.contains("feeds") && j.contains("feeds_file")) bad_config("give either feeds or feeds_file, not both");
    if (j.contains("feeds")) cfg.feeds = feeds_from_json(j.at("feeds"));
    if (j.contains("feeds_file")) {
      auto path = detail::resolve_path(base_dir, j.at("feeds_file").get<std::string>());
      std::ifstream in(path);
      if (!in) bad_config("cannot read feeds_file " + path.string());
      nlohmann::json feeds;
      try {
        feeds = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        bad_config(path.string() + ": " + e.what());
      }
      cfg.feeds = feeds_from_json(feeds);
    }
    cfg.cap = j.value("cap", cfg.cap);
    cfg.interval_seconds = j.value("interval_seconds", cfg.interval_seconds);
    cfg.k_terms = j.value("k_terms", cfg.k_terms);
    if (j.contains("alpha") || j.contains("beta")) {
      cfg.params = SimilarityParams::from_reals(j.value("alpha", cfg.params.alpha.value()),
                                                j.value("beta", cfg.params.beta.value()));
    }
    if (j.contains("store_root")) cfg.store_root = detail::resolve_path(base_dir, j.at("store_root").get<std::string>());
    else cfg.store_root = detail::resolve_path(base_dir, "store");
    cfg.externalize_plaintext = j.value("externalize_plaintext", false);
    if (j.contains("annotator")) {
      const auto& a = j.at("annotator");
      detail::check_keys(a, {"kind", "endpoint", "fixture_path", "timeout_ms"}, "annotator");
      auto kind = parse_annotator_kind(a.value("kind", std::string("heuristic")));
      if (!kind) bad_config("unknown annotator kind " + a.value("kind", std::string()));
      cfg.annotator.kind = *kind;
      cfg.annotator.endpoint = a.value("endpoint", std::string());
      if (a.contains("fixture_path"))
        cfg.annotator.fixture_path = detail::resolve_path(base_dir, a.at("fixture_path").get<std::string>()).string();
      cfg.annotator.timeout = std::chrono::milliseconds{a.value("timeout_ms", cfg.annotator.timeout.count())};
    }
    if (j.contains("fetch")) {
      const auto& f = j.at("fetch");
      detail::check_keys(f, {"timeout_ms", "max_body_bytes", "max_redirects", "parallelism", "user_agent"}, "fetch");
      cfg.fetch.timeout = std::chrono::milliseconds{f.value("timeout_ms", cfg.fetch.timeout.count())};
      cfg.fetch.max_body_size = f.value("max_body_bytes", cfg.fetch.max_body_size);
      cfg.fetch.max_redirects = f.value("max_redirects", cfg.fetch.max_redirects);
      cfg.fetch.parallelism = f.value("parallelism", cfg.fetch.parallelism);
      cfg.fetch.user_agent = f.value("user_agent", cfg.fetch.user_agent);
    }
  } catch (const nlohmann::json::exception& e) {
    bad_config(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    bad_config(e.what());
  }
  return cfg;
}

/// Reads and validates a config file. Validation is left to the caller when
/// overrides are still to be applied; pass validate = false for that.
inline RunConfig load_config(const std::filesystem::path& path, bool validate = true) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, path.string() + ": " + e.what());
  }
  RunConfig cfg = config_from_json(j, path.parent_path());
  if (validate) cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Logging

/// key=value lines on one stream; safe to share between threads.
class Logger {
 public:
  explicit Logger(std::ostream* out = &std::cerr) : out_(out) {}

  void log(UtcTime ts, const Diagnostic& d) {
    if (!out_) return;
    std::lock_guard lock(mu_);
    *out_ << "ts=" << format_rfc3339(ts) << " stage=" << d.stage << " source=" << (d.source_id.empty() ? "-" : d.source_id)
          << " outcome=" << d.outcome;
    if (!d.url.empty()) *out_ << " url=" << d.url;
    if (!d.detail.empty()) *out_ << " detail=" << nlohmann::json(d.detail).dump();
    *out_ << "\n";
  }

  static Logger& silent() {
    static Logger l(nullptr);
    return l;
  }

 private:
  std::ostream* out_;
  std::mutex mu_;
};

// ---------------------------------------------------------------------------
// Cycle

struct CycleResult {
  SnapshotId id;
  std::filesystem::path path;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t feeds_ok = 0;
};

/// Poll, extract, annotate, build the graph and write one snapshot. The
/// snapshot time is `now` truncated to the minute. When no feed succeeds an
/// empty snapshot carrying the diagnostics is still written, then
/// AllFeedsFailed is thrown.
inline CycleResult run_cycle(const RunConfig& cfg, UtcTime now, HttpClient& client, Annotator& annotator,
                             Logger& logger = Logger::silent()) {
  UtcTime tick = std::chrono::floor<std::chrono::minutes>(now);
  PollResult polled = poll_feeds(cfg.feeds, cfg.cap, cfg.fetch, client, tick);

  CycleDiagnostics diag;
  for (const auto& f : cfg.feeds) diag.sources[f.source_id];
  auto note = [&](Diagnostic d) {
    logger.log(tick, d);
    diag.events.push_back(std::move(d));
  };
  for (const auto& d : polled.diagnostics) {
    if (d.stage == "fetch") {
      ++diag.sources[d.source_id].selected;
      ++diag.sources[d.source_id].dropped;
    }
    note(d);
  }

  std::vector<EntitySet> sets;
  std::vector<PlainDocument> docs;
  std::vector<std::string> final_urls;
  for (const auto& raw : polled.documents) {
    SourceTally& tally = diag.sources[raw.article_ref.source_id];
    ++tally.selected;
    ++tally.fetched;
    const char* stage = "extract";
    try {
      PlainDocument doc = strip_boilerplate(raw);
      stage = "annotate";
      EntitySet set = build_entity_set(doc, annotator, cfg.k_terms);
      sets.push_back(std::move(set));
      docs.push_back(std::move(doc));
      final_urls.push_back(raw.final_url);
      ++tally.kept;
    } catch (const Error& e) {
      ++tally.dropped;
      note({stage, raw.article_ref.source_id, raw.article_ref.url, to_string(e.code()), e.what()});
    }
  }

  SimilarityGraph graph = build_graph(sets, cfg.params, tick);
  Snapshot snapshot = make_snapshot(graph, sets, docs, final_urls);
  snapshot.diagnostics = std::move(diag);

  CycleResult result;
  result.id = snapshot.id();
  result.nodes = snapshot.articles.size();
  result.edges = snapshot.edges.size();
  result.feeds_ok = polled.feeds_ok;
  result.path = write_snapshot(cfg.store_root, snapshot, {cfg.externalize_plaintext});
  logger.log(tick, {"cycle", "", result.path.string(), polled.feeds_ok == 0 ? to_string(ErrorCode::AllFeedsFailed) : "ok",
                    std::to_string(result.nodes) + " nodes, " + std::to_string(result.edges) + " edges"});
  if (polled.feeds_ok == 0)
    throw Error(ErrorCode::AllFeedsFailed, "none of " + std::to_string(cfg.feeds.size()) + " feeds succeeded; wrote " +
                                               result.path.string());
  return result;
}

// ---------------------------------------------------------------------------
// Scheduler

class Clock {
 public:
  virtual ~Clock() = default;
  virtual UtcTime now() = 0;
  /// Returns early when `stop` becomes true.
  virtual void sleep_until(UtcTime t, const std::atomic<bool>& stop) = 0;
};

class SystemClock final : public Clock {
 public:
  UtcTime now() override { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); }

  void sleep_until(UtcTime t, const std::atomic<bool>& stop) override {
    while (!stop.load()) {
      auto current = std::chrono::system_clock::now();
      if (current >= t) return;
      auto step = std::min<std::chrono::system_clock::duration>(t - current, std::chrono::milliseconds{200});
      std::this_thread::sleep_for(step);
    }
  }
};

/// First interval boundary at or after t (boundaries are multiples of the
/// interval since the Unix epoch, hence aligned to midnight UTC).
inline UtcTime align_up(UtcTime t, std::chrono::seconds interval) {
  auto s = t.time_since_epoch().count();
  auto i = interval.count();
  auto q = s / i * i;
  if (q < s) q += i;
  return UtcTime{std::chrono::seconds{q}};
}

struct SchedulerStats {
  std::size_t cycles = 0;
  std::size_t failed = 0;
  std::size_t skipped_ticks = 0;
  std::vector<UtcTime> ticks;
};

/// Fires `cycle` at aligned boundaries. A cycle that runs past the next
/// boundary causes that tick to be skipped; cycles never overlap. Setting
/// `stop` ends the loop after the in-flight cycle.
class Scheduler {
 public:
  using CycleFn = std::function<void(UtcTime tick)>;

  Scheduler(std::chrono::seconds interval, Clock& clock, CycleFn cycle, Logger& logger = Logger::silent())
      : interval_(interval), clock_(clock), cycle_(std::move(cycle)), logger_(logger) {
    if (interval_.count() < 60) throw Error(ErrorCode::ConfigInvalid, "interval must be at least 60 seconds");
  }

  SchedulerStats run(const std::atomic<bool>& stop, std::optional<std::size_t> max_cycles = std::nullopt) {
    SchedulerStats stats;
    UtcTime tick = align_up(clock_.now(), interval_);
    while (!stop.load() && (!max_cycles || stats.cycles < *max_cycles)) {
      clock_.sleep_until(tick, stop);
      if (stop.load()) break;
      stats.ticks.push_back(tick);
      ++stats.cycles;
      try {
        cycle_(tick);
      } catch (const Error& e) {
        ++stats.failed;
        logger_.log(clock_.now(), {"scheduler", "", "", to_string(e.code()), e.what()});
      } catch (const std::exception& e) {
        ++stats.failed;
        logger_.log(clock_.now(), {"scheduler", "", "", "Exception", e.what()});
      }
      UtcTime next = std::max(tick + interval_, align_up(clock_.now(), interval_));
      std::size_t missed = static_cast<std::size_t>((next - tick) / interval_) - 1;
      if (missed > 0) {
        stats.skipped_ticks += missed;
        logger_.log(clock_.now(), {"scheduler", "", "", "skipped", std::to_string(missed) + " tick(s) after overrun"});
      }
      tick = next;
    }
    return stats;
  }

 private:
  std::chrono::seconds interval_;
  Clock& clock_;
  CycleFn cycle_;
  Logger& logger_;
};

// ---------------------------------------------------------------------------
// Replay

/// Serves recorded responses from a fixture directory. manifest.json maps
/// each URL to {file, content_type, status, location}; unknown URLs fail
/// like an unreachable host.
class ReplayHttpClient final : public HttpClient {
 public:
  struct Entry {
    std::string file;
    std::string content_type = "text/html; charset=utf-8";
    int status = 200;
    std::string location;
  };

  ReplayHttpClient(std::filesystem::path dir, std::map<std::string, Entry> entries)
      : dir_(std::move(dir)), entries_(std::move(entries)) {}

  static ReplayHttpClient from_manifest(const std::filesystem::path& dir, const nlohmann::json& manifest) {
    std::map<std::string, Entry> entries;
    try {
      for (const auto& [url, e] : manifest.at("responses").items()) {
        Entry entry;
        entry.file = e.value("file", std::string());
        entry.content_type = e.value("content_type", entry.content_type);
        entry.status = e.value("status", 200);
        entry.location = e.value("location", std::string());
        entries.emplace(url, std::move(entry));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ConfigInvalid, std::string("replay manifest: ") + e.what());
    }
    return ReplayHttpClient(dir, std::move(entries));
  }

  HttpResponse send(const HttpRequest& request) override {
    auto it = entries_.find(request.url);
    if (it == entries_.end()) throw Error(ErrorCode::NetworkError, request.url + " is not in the replay manifest");
    HttpResponse r;
    r.status = it->second.status;
    r.content_type = it->second.content_type;
    r.location = it->second.location;
    if (!it->second.file.empty()) {
      std::ifstream in(dir_ / it->second.file, std::ios::binary);
      if (!in) throw Error(ErrorCode::NetworkError, "replay file missing: " + it->second.file);
      r.body.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    if (r.body.size() > request.max_body_size)
      throw Error(ErrorCode::BodyTooLarge, request.url + ": body exceeds " + std::to_string(request.max_body_size) + " bytes");
    return r;
  }

 private:
  std::filesystem::path dir_;
  std::map<std::string, Entry> entries_;
};

struct ReplaySetup {
  RunConfig config;
  UtcTime time{};
  ReplayHttpClient client;
};

/// Reads DIR/config.json and DIR/manifest.json. The manifest fixes the
/// cycle time so nothing depends on the wall clock.
inline ReplaySetup load_replay(const std::filesystem::path& dir) {
  RunConfig cfg = load_config(dir / "config.json", false);
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot read " + (dir / "manifest.json").string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("manifest.json: ") + e.what());
  }
  auto time = parse_rfc3339(manifest.value("time", std::string()));
  if (!time) throw Error(ErrorCode::ConfigInvalid, "manifest.json needs an RFC 3339 'time'");
  if (cfg.annotator.kind == AnnotatorBackend::Kind::NerService)
    throw Error(ErrorCode::ConfigInvalid, "replay cannot use the ner-service annotator");
  return {std::move(cfg), *time, ReplayHttpClient::from_manifest(dir, manifest)};
}

/// Runs one offline cycle over a fixture directory into `store_root`.
inline CycleResult replay(const std::filesystem::path& fixtures, const std::optional<std::filesystem::path>& store_root,
                          Logger& logger = Logger::silent()) {
  ReplaySetup setup = load_replay(fixtures);
  if (store_root) setup.config.store_root = *store_root;
  setup.config.validate();
  auto annotator = make_annotator(setup.config.annotator, setup.client);
  return run_cycle(setup.config, setup.time, setup.client, *annotator, logger);
}

}  // namespace storygraph
