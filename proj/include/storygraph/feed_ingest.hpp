// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_set>
#include <vector>

#include "storygraph/error.hpp"
#include "storygraph/http.hpp"
#include "storygraph/markup.hpp"
#include "storygraph/text.hpp"
#include "storygraph/time.hpp"
#include "storygraph/url.hpp"

namespace storygraph {

enum class Leaning { Left, Center, Right };

inline const char* to_string(Leaning l) {
  switch (l) {
    case Leaning::Left: return "left";
    case Leaning::Center: return "center";
    case Leaning::Right: return "right";
  }
  return "center";
}

inline std::optional<Leaning> parse_leaning(std::string_view s) {
  if (s == "left") return Leaning::Left;
  if (s == "center") return Leaning::Center;
  if (s == "right") return Leaning::Right;
  return std::nullopt;
}

struct FeedSpec {
  std::string source_id;
  std::string feed_url;
  Leaning leaning = Leaning::Center;

  bool operator==(const FeedSpec&) const = default;
};

struct ArticleRef {
  std::string source_id;
  Leaning leaning = Leaning::Center;
  std::string url;
  int feed_position = 1;  // 1-based rank within the feed
  UtcTime fetched_at{};
  // Item metadata carried from the feed; used as extraction fallbacks.
  std::string feed_title;
  std::optional<UtcTime> feed_published;

  bool operator==(const ArticleRef&) const = default;
};

struct RawDocument {
  ArticleRef article_ref;
  std::string final_url;
  int http_status = 0;
  std::string body;
  std::string content_type;
};

struct FetchPolicy {
  std::chrono::milliseconds timeout{20000};
  std::size_t max_body_size = 5 * 1024 * 1024;
  int max_redirects = 10;
  std::size_t parallelism = 8;
  std::string user_agent = "storygraph/1.0 (+news similarity research)";
};

/// One line of per-cycle bookkeeping: what happened to a feed or article.
struct Diagnostic {
  std::string stage;  // feed | fetch | extract | annotate | cycle
  std::string source_id;
  std::string url;
  std::string outcome;  // "ok" or an ErrorCode name
  std::string detail;

  bool operator==(const Diagnostic&) const = default;
};

/// Rejects duplicate source ids and non-http feed URLs.
inline void validate_roster(const std::vector<FeedSpec>& specs) {
  std::set<std::string> seen;
  for (const auto& s : specs) {
    if (s.source_id.empty()) throw Error(ErrorCode::ConfigInvalid, "feed with empty source_id");
    if (!seen.insert(s.source_id).second) throw Error(ErrorCode::ConfigInvalid, "duplicate source_id " + s.source_id);
    if (!url::is_http(s.feed_url)) throw Error(ErrorCode::ConfigInvalid, "feed_url of " + s.source_id + " is not http(s)");
  }
}

namespace detail {

struct FeedItem {
  std::string link;
  std::string alternate_href;  // Atom <link rel="alternate" href>
  std::string any_href;        // Atom <link href> with another rel
  std::string guid;
  bool guid_is_permalink = true;
  std::string title;
  std::string published;
  std::string updated;

  std::string best_link() const {
    auto trimmed = [](const std::string& s) { return normalize_whitespace(s); };
    if (auto l = trimmed(link); !l.empty()) return l;
    if (auto l = trimmed(alternate_href); !l.empty()) return l;
    if (auto l = trimmed(any_href); !l.empty()) return l;
    if (guid_is_permalink) return trimmed(guid);
    return {};
  }
};

enum class Field { None, Link, Guid, Title, Published, Updated };

inline Field field_of(std::string_view name) {
  if (name == "link") return Field::Link;
  if (name == "guid") return Field::Guid;
  if (name == "title") return Field::Title;
  if (name == "pubdate" || name == "published" || name == "dc:date" || name == "issued") return Field::Published;
  if (name == "updated" || name == "modified" || name == "a10:updated") return Field::Updated;
  return Field::None;
}

inline bool is_feed_root(std::string_view name) {
  return name == "rss" || name == "feed" || name == "rdf:rdf" || name == "rdf" || name == "channel";
}

}  // namespace detail

/// Extracts up to `cap` article references from an RSS 2.0, RSS 1.0, or
/// Atom document, in document order. Tolerates unescaped ampersands and
/// unclosed elements.
inline std::vector<ArticleRef> parse_feed(std::string_view feed_body, const FeedSpec& spec, int cap,
                                          UtcTime fetched_at = {}) {
  using detail::Field;
  if (cap < 1) throw Error(ErrorCode::InvalidArgument, "cap must be positive");
  if (feed_body.find('<') == std::string_view::npos)
    throw Error(ErrorCode::UnparseableFeed, spec.source_id + ": no markup in feed body");

  bool saw_root = false;
  std::vector<detail::FeedItem> items;
  std::optional<detail::FeedItem> current;
  Field capturing = Field::None;
  std::string capture_tag;
  std::string buffer;

  auto end_capture = [&] {
    if (!current || capturing == Field::None) return;
    switch (capturing) {
      case Field::Link: current->link += buffer; break;
      case Field::Guid: current->guid += buffer; break;
      case Field::Title: current->title += buffer; break;
      case Field::Published: if (current->published.empty()) current->published = buffer; break;
      case Field::Updated: if (current->updated.empty()) current->updated = buffer; break;
      case Field::None: break;
    }
    capturing = Field::None;
    buffer.clear();
  };
  auto end_item = [&] {
    end_capture();
    if (current) items.push_back(std::move(*current));
    current.reset();
  };

  for (const auto& tok : markup::tokenize(feed_body, markup::Mode::Xml)) {
    switch (tok.kind) {
      case markup::TokenKind::StartTag: {
        if (detail::is_feed_root(tok.name)) saw_root = true;
        if (tok.name == "item" || tok.name == "entry") {
          end_item();  // a missing </item> ends at the next item
          if (!tok.self_closing) current.emplace();
          break;
        }
        if (!current) break;
        Field f = detail::field_of(tok.name);
        if (f == Field::None) break;  // nested markup inside a field is kept as text
        end_capture();
        if (f == Field::Link) {
          if (const std::string* href = tok.attr("href")) {
            const std::string* rel = tok.attr("rel");
            if (!rel || *rel == "alternate") {
              if (current->alternate_href.empty()) current->alternate_href = *href;
            } else if (current->any_href.empty() && *rel != "enclosure" && *rel != "self") {
              current->any_href = *href;
            }
            break;
          }
        }
        if (f == Field::Guid) {
          const std::string* permalink = tok.attr("ispermalink");
          current->guid_is_permalink = !permalink || ascii_lower(*permalink) != "false";
        }
        if (!tok.self_closing) {
          capturing = f;
          capture_tag = tok.name;
        }
        break;
      }
      case markup::TokenKind::EndTag:
        if (tok.name == "item" || tok.name == "entry") {
          end_item();
        } else if (capturing != Field::None && tok.name == capture_tag) {
          end_capture();
        }
        break;
      case markup::TokenKind::Text:
        if (capturing != Field::None) buffer += tok.text;
        break;
      case markup::TokenKind::Comment:
        break;
    }
  }
  end_item();

  if (items.empty()) {
    if (!saw_root) throw Error(ErrorCode::UnparseableFeed, spec.source_id + ": no feed root or items");
    throw Error(ErrorCode::EmptyFeed, spec.source_id + ": feed has no items");
  }

  std::vector<ArticleRef> refs;
  std::unordered_set<std::string> seen;
  for (const auto& item : items) {
    std::string link = item.best_link();
    if (link.empty()) continue;
    std::string absolute = url::resolve(spec.feed_url, link);
    if (!url::is_http(absolute)) continue;
    if (!seen.insert(absolute).second) continue;
    ArticleRef ref;
    ref.source_id = spec.source_id;
    ref.leaning = spec.leaning;
    ref.url = std::move(absolute);
    ref.feed_position = static_cast<int>(refs.size()) + 1;
    ref.fetched_at = fetched_at;
    ref.feed_title = normalize_whitespace(item.title);
    std::string date = normalize_whitespace(item.published.empty() ? item.updated : item.published);
    if (!date.empty()) ref.feed_published = parse_timestamp(date);
    refs.push_back(std::move(ref));
    if (static_cast<int>(refs.size()) == cap) break;
  }
  if (refs.empty()) throw Error(ErrorCode::EmptyFeed, spec.source_id + ": no item carries a usable link");
  return refs;
}

/// GETs ref.url, following up to policy.max_redirects redirects.
inline RawDocument fetch_article(const ArticleRef& ref, const FetchPolicy& policy, HttpClient& client) {
  if (!url::is_http(ref.url)) throw Error(ErrorCode::InvalidArgument, "not an http(s) URL: " + ref.url);
  std::string current = ref.url;
  for (int hops = 0;; ++hops) {
    HttpRequest request;
    request.url = current;
    request.timeout = policy.timeout;
    request.max_body_size = policy.max_body_size;
    request.user_agent = policy.user_agent;
    request.headers.emplace_back("Accept", "text/html,application/xhtml+xml,application/xml;q=0.9,*/*;q=0.8");
    HttpResponse response = client.send(request);

    if (response.status >= 300 && response.status < 400 && !response.location.empty()) {
      if (hops + 1 > policy.max_redirects)
        throw Error(ErrorCode::TooManyRedirects, ref.url + " after " + std::to_string(hops + 1) + " redirects");
      current = url::resolve(current, response.location);
      if (!url::is_http(current)) throw Error(ErrorCode::HttpError, "redirect to non-http URL " + current, response.status);
      continue;
    }
    if (response.status < 200 || response.status >= 300)
      throw Error(ErrorCode::HttpError, current + " returned " + std::to_string(response.status), response.status);
    if (response.body.size() > policy.max_body_size)
      throw Error(ErrorCode::BodyTooLarge, current + " exceeds " + std::to_string(policy.max_body_size) + " bytes");
    if (response.body.empty())
      throw Error(ErrorCode::HttpError, current + " returned an empty body", response.status);

    RawDocument doc;
    doc.article_ref = ref;
    doc.final_url = std::move(current);
    doc.http_status = response.status;
    doc.body = std::move(response.body);
    doc.content_type = std::move(response.content_type);
    return doc;
  }
}

/// Runs job(i) for every i, at most `parallelism` at a time and never two
/// jobs with the same host at once. Jobs are started lowest index first
/// among those whose host is free. job must not throw.
template <typename Job>
void run_polite(const std::vector<std::string>& hosts, std::size_t parallelism, Job&& job) {
  const std::size_t n = hosts.size();
  if (n == 0) return;
  std::mutex mu;
  std::condition_variable cv;
  std::vector<bool> started(n, false);
  std::multiset<std::string> busy;
  std::size_t remaining = n;

  auto worker = [&] {
    while (true) {
      std::size_t pick = n;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] {
          if (remaining == 0) return true;
          for (std::size_t i = 0; i < n; ++i) {
            if (!started[i] && !busy.contains(hosts[i])) return true;
          }
          return false;
        });
        if (remaining == 0) return;
        for (std::size_t i = 0; i < n; ++i) {
          if (!started[i] && !busy.contains(hosts[i])) {
            pick = i;
            break;
          }
        }
        started[pick] = true;
        --remaining;
        busy.insert(hosts[pick]);
      }
      job(pick);
      {
        std::lock_guard lock(mu);
        busy.erase(busy.find(hosts[pick]));
      }
      cv.notify_all();
    }
  };

  std::size_t threads = std::max<std::size_t>(1, std::min(parallelism, n));
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
}

struct PollResult {
  std::vector<RawDocument> documents;  // (spec order, feed_position)
  std::vector<Diagnostic> diagnostics;
  std::size_t feeds_ok = 0;
  std::size_t articles_selected = 0;
};

/// Fetches every feed, then every selected article. Failures become
/// diagnostics; nothing here throws for a single bad feed or article.
inline PollResult poll_feeds(const std::vector<FeedSpec>& specs, int cap, const FetchPolicy& policy, HttpClient& client,
                             UtcTime fetched_at) {
  PollResult result;
  struct FeedSlot {
    std::vector<ArticleRef> refs;
    Diagnostic diagnostic;
  };
  std::vector<FeedSlot> feeds(specs.size());
  std::vector<std::string> feed_hosts;
  for (const auto& s : specs) feed_hosts.push_back(url::host(s.feed_url));

  run_polite(feed_hosts, policy.parallelism, [&](std::size_t i) {
    const FeedSpec& spec = specs[i];
    Diagnostic d{"feed", spec.source_id, spec.feed_url, "ok", {}};
    try {
      ArticleRef feed_ref;
      feed_ref.source_id = spec.source_id;
      feed_ref.leaning = spec.leaning;
      feed_ref.url = spec.feed_url;
      feed_ref.fetched_at = fetched_at;
      RawDocument feed = fetch_article(feed_ref, policy, client);
      feeds[i].refs = parse_feed(feed.body, spec, cap, fetched_at);
      d.detail = std::to_string(feeds[i].refs.size()) + " articles selected";
    } catch (const Error& e) {
      d.outcome = to_string(e.code());
      d.detail = e.what();
    } catch (const std::exception& e) {
      d.outcome = to_string(ErrorCode::NetworkError);
      d.detail = e.what();
    }
    feeds[i].diagnostic = std::move(d);
  });

  struct ArticleSlot {
    const ArticleRef* ref;
    std::optional<RawDocument> doc;
    Diagnostic diagnostic;
  };
  std::vector<ArticleSlot> articles;
  std::vector<std::string> article_hosts;
  for (auto& feed : feeds) {
    result.diagnostics.push_back(feed.diagnostic);
    if (feed.diagnostic.outcome == "ok") ++result.feeds_ok;
    for (const auto& ref : feed.refs) {
      articles.push_back({&ref, std::nullopt, {}});
      article_hosts.push_back(url::host(ref.url));
    }
  }
  result.articles_selected = articles.size();

  run_polite(article_hosts, policy.parallelism, [&](std::size_t i) {
    const ArticleRef& ref = *articles[i].ref;
    Diagnostic d{"fetch", ref.source_id, ref.url, "ok", {}};
    try {
      articles[i].doc = fetch_article(ref, policy, client);
      d.detail = "status " + std::to_string(articles[i].doc->http_status);
    } catch (const Error& e) {
      d.outcome = to_string(e.code());
      d.detail = e.what();
    } catch (const std::exception& e) {
      d.outcome = to_string(ErrorCode::NetworkError);
      d.detail = e.what();
    }
    articles[i].diagnostic = std::move(d);
  });

  for (auto& a : articles) {
    if (a.doc) {
      result.documents.push_back(std::move(*a.doc));
    } else {
      result.diagnostics.push_back(std::move(a.diagnostic));
    }
  }
  return result;
}

/// As poll_feeds, but throws AllFeedsFailed when not a single feed could be
/// fetched and parsed.
inline std::vector<RawDocument> poll_all(const std::vector<FeedSpec>& specs, int cap, const FetchPolicy& policy,
                                         HttpClient& client, UtcTime fetched_at = {}) {
  if (specs.empty()) throw Error(ErrorCode::InvalidArgument, "no feeds configured");
  PollResult result = poll_feeds(specs, cap, policy, client, fetched_at);
  if (result.feeds_ok == 0) throw Error(ErrorCode::AllFeedsFailed, "none of " + std::to_string(specs.size()) + " feeds succeeded");
  return std::move(result.documents);
}

}  // namespace storygraph
