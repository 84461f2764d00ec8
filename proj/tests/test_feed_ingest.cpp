// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <atomic>
#include <map>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "storygraph/feed_ingest.hpp"
#include "storygraph/http_curl.hpp"

using namespace storygraph;
using namespace std::chrono_literals;

namespace {

const FeedSpec kVox{"vox", "https://www.vox.com/rss/index.xml", Leaning::Left};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

// Serves canned responses keyed by URL; counts concurrency per host.
class ScriptedClient final : public HttpClient {
 public:
  std::map<std::string, HttpResponse> routes;
  std::chrono::milliseconds delay{0};
  std::atomic<int> calls{0};

  HttpResponse send(const HttpRequest& request) override {
    ++calls;
    std::string host = url::host(request.url);
    {
      std::lock_guard lock(mu_);
      int now = ++active_[host];
      max_per_host_ = std::max(max_per_host_, now);
      max_total_ = std::max(max_total_, ++total_);
    }
    if (delay.count() > 0) std::this_thread::sleep_for(delay);
    HttpResponse r;
    bool found = false;
    {
      std::lock_guard lock(mu_);
      --active_[host];
      --total_;
      if (auto it = routes.find(request.url); it != routes.end()) {
        r = it->second;
        found = true;
      }
    }
    if (!found) throw Error(ErrorCode::NetworkError, "no route to " + request.url);
    return r;
  }

  int max_per_host() const { return max_per_host_; }
  int max_total() const { return max_total_; }

 private:
  std::mutex mu_;
  std::map<std::string, int> active_;
  int total_ = 0;
  int max_per_host_ = 0;
  int max_total_ = 0;
};

HttpResponse ok(std::string body, std::string type = "text/html") { return {200, std::move(body), std::move(type), {}}; }
HttpResponse redirect(std::string to) { return {302, {}, {}, std::move(to)}; }

ArticleRef ref_for(std::string u) {
  ArticleRef r;
  r.source_id = "test";
  r.url = std::move(u);
  return r;
}

}  // namespace

TEST_CASE("rss 2.0 items in document order, capped") {
  std::string feed = R"(<?xml version="1.0"?>
<rss version="2.0"><channel><title>Vox</title>
<item><title>First &amp; foremost</title><link>https://www.vox.com/a</link><pubDate>Thu, 27 Sep 2018 14:30:00 GMT</pubDate></item>
<item><title>Second</title><link> /b </link></item>
<item><title>Dup</title><link>https://www.vox.com/a</link></item>
<item><title>Third</title><guid>https://www.vox.com/c</guid></item>
<item><title>Not a link</title><guid isPermaLink="false">tag:vox,42</guid></item>
<item><title>Fourth</title><link>https://www.vox.com/d</link></item>
<item><title>Fifth</title><link>https://www.vox.com/e</link></item>
<item><title>Sixth</title><link>https://www.vox.com/f</link></item>
</channel></rss>)";
  auto refs = parse_feed(feed, kVox, 5);
  REQUIRE(refs.size() == 5);
  CHECK(refs[0].url == "https://www.vox.com/a");
  CHECK(refs[0].feed_title == "First & foremost");
  REQUIRE(refs[0].feed_published);
  CHECK(format_rfc3339(*refs[0].feed_published) == "2018-09-27T14:30:00Z");
  CHECK(refs[1].url == "https://www.vox.com/b");
  CHECK(refs[2].url == "https://www.vox.com/c");
  CHECK(refs[3].url == "https://www.vox.com/d");
  CHECK(refs[4].url == "https://www.vox.com/e");
  for (std::size_t i = 0; i < refs.size(); ++i) {
    CHECK(refs[i].feed_position == static_cast<int>(i) + 1);
    CHECK(refs[i].source_id == "vox");
    CHECK(refs[i].leaning == Leaning::Left);
  }
}

TEST_CASE("short feed yields fewer than cap") {
  std::string feed = "<rss><channel><item><link>https://x.org/1</link></item><item><link>https://x.org/2</link></item>"
                     "</channel></rss>";
  CHECK(parse_feed(feed, kVox, 5).size() == 2);
}

TEST_CASE("atom entries prefer the alternate link") {
  std::string feed = R"(<feed xmlns="http://www.w3.org/2005/Atom">
<entry><title type="html">One</title><link rel="self" href="https://api.example.com/1"/>
<link rel="alternate" type="text/html" href="https://example.com/one"/><published>2019-03-24T10:00:00-04:00</published></entry>
<entry><title>Two</title><link href="https://example.com/two"/><updated>2019-03-24T15:00:00Z</updated></entry>
</feed>)";
  auto refs = parse_feed(feed, {"ex", "https://example.com/atom", Leaning::Center}, 5);
  REQUIRE(refs.size() == 2);
  CHECK(refs[0].url == "https://example.com/one");
  CHECK(format_rfc3339(*refs[0].feed_published) == "2019-03-24T14:00:00Z");
  CHECK(refs[1].url == "https://example.com/two");
  CHECK(format_rfc3339(*refs[1].feed_published) == "2019-03-24T15:00:00Z");
}

TEST_CASE("malformed but recoverable feeds") {
  // Missing </item>, bare ampersand, CDATA title.
  std::string feed = "<rss><channel><item><title><![CDATA[Q&A]]></title><link>https://x.org/a?x=1&y=2</link>"
                     "<item><link>https://x.org/b</link></channel></rss>";
  auto refs = parse_feed(feed, kVox, 5);
  REQUIRE(refs.size() == 2);
  CHECK(refs[0].feed_title == "Q&A");
  CHECK(refs[0].url == "https://x.org/a?x=1&y=2");
  CHECK(refs[1].url == "https://x.org/b");
}

TEST_CASE("feed errors") {
  CHECK(code_of([] { parse_feed("not xml at all", kVox, 5); }) == ErrorCode::UnparseableFeed);
  CHECK(code_of([] { parse_feed("<html><body>hi</body></html>", kVox, 5); }) == ErrorCode::UnparseableFeed);
  CHECK(code_of([] { parse_feed("<rss><channel><title>x</title></channel></rss>", kVox, 5); }) == ErrorCode::EmptyFeed);
  CHECK(code_of([] { parse_feed("<rss><channel><item><title>no link</title></item></channel></rss>", kVox, 5); }) ==
        ErrorCode::EmptyFeed);
  CHECK(code_of([] { parse_feed("<rss/>", kVox, 0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("roster validation") {
  CHECK_NOTHROW(validate_roster({kVox, {"cnn", "http://rss.cnn.com/rss/cnn_allpolitics.rss", Leaning::Center}}));
  CHECK(code_of([] { validate_roster({kVox, kVox}); }) == ErrorCode::ConfigInvalid);
  CHECK(code_of([] { validate_roster({{"x", "ftp://x", Leaning::Left}}); }) == ErrorCode::ConfigInvalid);
  CHECK(code_of([] { validate_roster({{"", "https://x", Leaning::Left}}); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("fetch follows redirects up to the limit") {
  ScriptedClient client;
  client.routes["https://a.org/start"] = redirect("/middle");
  client.routes["https://a.org/middle"] = redirect("https://b.org/final");
  client.routes["https://b.org/final"] = ok("<p>body</p>", "text/html; charset=utf-8");
  FetchPolicy policy;
  auto doc = fetch_article(ref_for("https://a.org/start"), policy, client);
  CHECK(doc.final_url == "https://b.org/final");
  CHECK(doc.http_status == 200);
  CHECK(doc.body == "<p>body</p>");
  CHECK(doc.content_type == "text/html; charset=utf-8");
  CHECK(doc.article_ref.url == "https://a.org/start");

  policy.max_redirects = 1;
  CHECK(code_of([&] { fetch_article(ref_for("https://a.org/start"), policy, client); }) == ErrorCode::TooManyRedirects);
  policy.max_redirects = 2;
  CHECK_NOTHROW(fetch_article(ref_for("https://a.org/start"), policy, client));
}

TEST_CASE("fetch error classification") {
  ScriptedClient client;
  client.routes["https://a.org/404"] = {404, "nope", "text/plain", {}};
  client.routes["https://a.org/empty"] = ok("");
  client.routes["https://a.org/loop"] = redirect("https://a.org/loop");
  client.routes["https://a.org/big"] = ok(std::string(2000, 'x'));
  FetchPolicy policy;
  policy.max_body_size = 1000;
  try {
    fetch_article(ref_for("https://a.org/404"), policy, client);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HttpError);
    CHECK(e.http_status() == 404);
  }
  CHECK(code_of([&] { fetch_article(ref_for("https://a.org/empty"), policy, client); }) == ErrorCode::HttpError);
  CHECK(code_of([&] { fetch_article(ref_for("https://a.org/loop"), policy, client); }) == ErrorCode::TooManyRedirects);
  CHECK(code_of([&] { fetch_article(ref_for("https://a.org/big"), policy, client); }) == ErrorCode::BodyTooLarge);
  CHECK(code_of([&] { fetch_article(ref_for("https://a.org/none"), policy, client); }) == ErrorCode::NetworkError);
  CHECK(code_of([&] { fetch_article(ref_for("mailto:x@y"), policy, client); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("run_polite never overlaps a host and respects the global bound") {
  std::vector<std::string> hosts;
  for (int i = 0; i < 12; ++i) hosts.push_back("h" + std::to_string(i % 4));
  std::mutex mu;
  std::map<std::string, int> active;
  int total = 0, max_total = 0, max_host = 0;
  std::vector<int> done(hosts.size(), 0);
  run_polite(hosts, 3, [&](std::size_t i) {
    {
      std::lock_guard lock(mu);
      max_host = std::max(max_host, ++active[hosts[i]]);
      max_total = std::max(max_total, ++total);
    }
    std::this_thread::sleep_for(15ms);
    std::lock_guard lock(mu);
    --active[hosts[i]];
    --total;
    ++done[i];
  });
  CHECK(max_host == 1);
  CHECK(max_total <= 3);
  CHECK(max_total >= 2);
  CHECK(std::all_of(done.begin(), done.end(), [](int d) { return d == 1; }));
}

TEST_CASE("poll_feeds keeps going past failing feeds and articles") {
  ScriptedClient client;
  client.delay = 5ms;
  FeedSpec a{"alpha", "https://alpha.test/feed", Leaning::Left};
  FeedSpec b{"beta", "https://beta.test/feed", Leaning::Right};
  FeedSpec c{"gamma", "https://gamma.test/feed", Leaning::Center};
  client.routes[a.feed_url] = ok("<rss><channel><item><link>https://alpha.test/1</link></item>"
                                 "<item><link>https://alpha.test/2</link></item></channel></rss>",
                                 "application/rss+xml");
  client.routes["https://alpha.test/1"] = ok("<p>one</p>");
  client.routes["https://alpha.test/2"] = {500, "oops", "text/plain", {}};
  client.routes[b.feed_url] = ok("garbage");
  // gamma's feed is unreachable (no route).
  auto t = *parse_rfc3339("2019-03-24T14:30:00Z");
  PollResult r = poll_feeds({a, b, c}, 5, FetchPolicy{}, client, t);
  CHECK(r.feeds_ok == 1);
  CHECK(r.articles_selected == 2);
  REQUIRE(r.documents.size() == 1);
  CHECK(r.documents[0].article_ref.url == "https://alpha.test/1");
  CHECK(r.documents[0].article_ref.fetched_at == t);
  CHECK(client.max_per_host() == 1);

  std::map<std::string, std::string> outcomes;
  for (const auto& d : r.diagnostics) outcomes[d.stage + ":" + d.source_id + ":" + d.url] = d.outcome;
  CHECK(outcomes["feed:alpha:" + a.feed_url] == "ok");
  CHECK(outcomes["feed:beta:" + b.feed_url] == "UnparseableFeed");
  CHECK(outcomes["feed:gamma:" + c.feed_url] == "NetworkError");
  CHECK(outcomes["fetch:alpha:https://alpha.test/2"] == "HttpError");

  CHECK(code_of([&] { poll_all({b, c}, 5, FetchPolicy{}, client, t); }) == ErrorCode::AllFeedsFailed);
  CHECK(code_of([&] { poll_all({}, 5, FetchPolicy{}, client, t); }) == ErrorCode::InvalidArgument);
  CHECK(poll_all({a}, 5, FetchPolicy{}, client, t).size() == 1);
}

TEST_CASE("curl client against a local server") {
  httplib::Server server;
  server.Get("/page", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("<html><body><p>hello</p></body></html>", "text/html; charset=utf-8");
  });
  server.Get("/hop1", [](const httplib::Request&, httplib::Response& res) { res.set_redirect("/hop2"); });
  server.Get("/hop2", [](const httplib::Request&, httplib::Response& res) { res.set_redirect("/page"); });
  server.Get("/slow", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(1500ms);
    res.set_content("late", "text/plain");
  });
  server.Get("/big", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(std::string(64 * 1024, 'x'), "text/plain");
  });
  server.Get("/ua", [](const httplib::Request& req, httplib::Response& res) {
    res.set_content(req.get_header_value("User-Agent"), "text/plain");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  std::string base = "http://127.0.0.1:" + std::to_string(port);

  CurlHttpClient client;
  FetchPolicy policy;
  policy.timeout = 400ms;
  policy.max_body_size = 16 * 1024;

  auto doc = fetch_article(ref_for(base + "/hop1"), policy, client);
  CHECK(doc.final_url == base + "/page");
  CHECK(doc.body.find("hello") != std::string::npos);
  CHECK(doc.content_type == "text/html; charset=utf-8");

  policy.max_redirects = 1;
  CHECK(code_of([&] { fetch_article(ref_for(base + "/hop1"), policy, client); }) == ErrorCode::TooManyRedirects);
  policy.max_redirects = 10;

  CHECK(code_of([&] { fetch_article(ref_for(base + "/missing"), policy, client); }) == ErrorCode::HttpError);
  CHECK(code_of([&] { fetch_article(ref_for(base + "/slow"), policy, client); }) == ErrorCode::FetchTimeout);
  CHECK(code_of([&] { fetch_article(ref_for(base + "/big"), policy, client); }) == ErrorCode::BodyTooLarge);

  policy.user_agent = "storygraph-test/0";
  CHECK(fetch_article(ref_for(base + "/ua"), policy, client).body == "storygraph-test/0");

  server.stop();
  listener.join();
  CHECK(code_of([&] { fetch_article(ref_for(base + "/page"), policy, client); }) == ErrorCode::NetworkError);
}
