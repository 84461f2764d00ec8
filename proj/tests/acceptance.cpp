// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any
// criterion fails. argv[1] is the storygraph CLI binary.
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>

#include "storygraph/rank.hpp"
#include "support.hpp"

using namespace storygraph;
using namespace sgtest;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kFixtures = STORYGRAPH_FIXTURES;
std::string g_cli;

// Collects failed checks for one criterion.
struct Check {
  std::vector<std::string> failures;
  void operator()(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

struct Run {
  int status;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = "'" + g_cli + "' " + args + " 2>/dev/null";
  Run r{-1, {}};
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int st = ::pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// Random corpus: n sets over a small vocabulary so edges are common.
std::vector<TokenSet> random_corpus(std::mt19937& rng) {
  std::uniform_int_distribution<int> count(1, 20), size(1, 8), vocab_size(6, 30);
  int n = count(rng), v = vocab_size(rng);
  std::uniform_int_distribution<int> word(0, v - 1);
  std::vector<TokenSet> out;
  for (int i = 0; i < n; ++i) {
    std::vector<std::string> toks;
    for (int k = size(rng); k > 0; --k) toks.push_back("w" + std::to_string(word(rng)));
    out.emplace_back(std::move(toks));
  }
  return out;
}

// Independent oracle: integer test of  a*J + (1-a)*O >= b  with a = an/ad, b = bn/bd:
//   I*(an*M + (ad-an)*U)*bd >= bn*ad*U*M
bool oracle_similar(const TokenSet& x, const TokenSet& y, long an, long ad, long bn, long bd) {
  std::set<std::string> sx(x.begin(), x.end()), sy(y.begin(), y.end()), u = sx;
  u.insert(sy.begin(), sy.end());
  long inter = 0;
  for (const auto& t : sx) inter += sy.count(t);
  long U = static_cast<long>(u.size()), M = static_cast<long>(std::min(sx.size(), sy.size()));
  if (U == 0 || M == 0) return bn == 0;
  return inter * (an * M + (ad - an) * U) * bd >= bn * ad * U * M;
}

struct OracleGraph {
  std::set<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::set<std::size_t>> parts;  // ordered by smallest member
  std::map<std::size_t, double> score;       // keyed by smallest member
};

OracleGraph oracle_graph(const std::vector<TokenSet>& sets, long bn, long bd) {
  OracleGraph g;
  std::size_t n = sets.size();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    reach[i][i] = true;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (oracle_similar(sets[i], sets[j], 3, 10, bn, bd)) {
        g.edges.insert({i, j});
        reach[i][j] = reach[j][i] = true;
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
  std::vector<bool> seen(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i]) continue;
    std::set<std::size_t> part;
    for (std::size_t j = 0; j < n; ++j)
      if (reach[i][j]) part.insert(j), seen[j] = true;
    std::size_t e = 0;
    for (const auto& [a, b] : g.edges) e += part.count(a);
    g.score[i] = 2.0 * static_cast<double>(e) / static_cast<double>(part.size());
    g.parts.push_back(std::move(part));
  }
  return g;
}

std::vector<EntitySet> as_entities(const std::vector<TokenSet>& sets) {
  std::vector<EntitySet> out;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    EntitySet e;
    e.article_ref.source_id = "s" + std::to_string(i % 4);
    e.token_set = sets[i];
    out.push_back(std::move(e));
  }
  return out;
}

// --- criteria ---------------------------------------------------------------

Check table2() {
  Check c;
  auto cli = run("--json sim " + q(kFixtures / "table2/article1.json") + " " + q(kFixtures / "table2/article2.json"));
  c(cli.status == 0, "sim exit status " + std::to_string(cli.status));
  json j = json::parse(cli.out, nullptr, false);
  c(!j.is_discarded(), "sim --json output is not JSON");
  if (!j.is_discarded()) {
    c(j.value("intersection", 0) == 11 && j.value("union", 0) == 40, "intersection/union not 11/40");
    c(std::abs(j.value("jaccard", 0.0) - 0.2750) < 1e-4, "J != 0.2750");
    c(std::abs(j.value("overlap", 0.0) - 0.7333) < 1e-4, "O != 0.7333");
    c(std::abs(j.value("blended", 0.0) - 0.5958) < 1e-4, "blended != 0.5958");
    c(j.value("similar", false), "decision is not SIMILAR");
  }
  auto text = run("sim " + q(kFixtures / "table2/article1.json") + " " + q(kFixtures / "table2/article2.json"));
  c(text.out.find("blended 0.5958") != std::string::npos && text.out.find("\nSIMILAR") != std::string::npos,
    "text output lacks 'blended 0.5958' / SIMILAR");
  return c;
}

Check attention_identities() {
  Check c;
  c(attention_score(2, 1) == 1.0, "2 nodes / 1 edge != 1.0");
  c(attention_score(1, 0) == 0.0, "singleton != 0");
  for (std::size_t n = 2; n <= 30; ++n)
    c(attention_score(n, n * (n - 1) / 2) == static_cast<double>(n - 1), "K" + std::to_string(n) + " != n-1");
  // Built through the graph: identical sets form cliques.
  for (std::size_t n : {1u, 2u, 5u, 12u}) {
    std::vector<TokenSet> sets(n, TokenSet{"alpha", "beta", "gamma"});
    auto g = build_graph(as_entities(sets), {}, UtcTime{});
    auto comps = connected_components(g);
    c(comps.size() == 1 && comps[0].attention_score == static_cast<double>(n - 1),
      "graph of " + std::to_string(n) + " identical sets is not scored n-1");
  }
  return c;
}

Check brute_force() {
  Check c;
  std::mt19937 rng(20190324);
  for (int round = 0; round < 150; ++round) {
    auto sets = random_corpus(rng);
    auto g = build_graph(as_entities(sets), {}, UtcTime{});
    auto comps = connected_components(g);
    auto o = oracle_graph(sets, 27, 100);
    std::set<std::pair<std::size_t, std::size_t>> got;
    for (const auto& e : g.edges) got.insert({e.node_a, e.node_b});
    c(got == o.edges, "edge set differs in round " + std::to_string(round));
    c(comps.size() == o.parts.size(), "component count differs in round " + std::to_string(round));
    for (const auto& comp : comps) {
      std::set<std::size_t> part(comp.node_ids.begin(), comp.node_ids.end());
      auto it = std::find(o.parts.begin(), o.parts.end(), part);
      c(it != o.parts.end(), "partition differs in round " + std::to_string(round));
      c(o.score.count(comp.node_ids.front()) && o.score[comp.node_ids.front()] == comp.attention_score,
        "score differs in round " + std::to_string(round));
    }
  }
  return c;
}

Check monotonicity() {
  Check c;
  std::mt19937 rng(7);
  std::vector<Ratio> betas{{0, 1}, {1, 10}, {27, 100}, {1, 2}, {3, 4}, {1, 1}};
  for (int round = 0; round < 100; ++round) {
    auto sets = random_corpus(rng);
    auto ents = as_entities(sets);
    std::vector<SimilarityGraph> graphs;
    for (auto b : betas) graphs.push_back(build_graph(ents, SimilarityParams{Ratio{3, 10}, b}, UtcTime{}));
    for (std::size_t k = 1; k < betas.size(); ++k) {
      std::set<std::pair<std::size_t, std::size_t>> hi, lo;
      for (const auto& e : graphs[k].edges) hi.insert({e.node_a, e.node_b});
      for (const auto& e : graphs[k - 1].edges) lo.insert({e.node_a, e.node_b});
      c(std::includes(lo.begin(), lo.end(), hi.begin(), hi.end()), "edges(beta2) not within edges(beta1)");
      auto chi = connected_components(graphs[k]), clo = connected_components(graphs[k - 1]);
      for (const auto& comp : chi) {
        bool nested = std::any_of(clo.begin(), clo.end(), [&](const StoryComponent& outer) {
          return std::includes(outer.node_ids.begin(), outer.node_ids.end(), comp.node_ids.begin(), comp.node_ids.end());
        });
        c(nested, "component at higher beta not contained in one at lower beta");
      }
    }
  }
  return c;
}

Check replay_determinism() {
  Check c;
  auto manifest = json::parse(read_file(kFixtures / "replay/manifest.json"));
  std::set<std::string> hosts;
  int pages = 0;
  for (const auto& [url, e] : manifest["responses"].items()) {
    std::string file = e.value("file", std::string());
    if (file.ends_with(".html")) {
      ++pages;
      hosts.insert(url::host(url));
    }
  }
  c(pages >= 12, "fewer than 12 fixture pages");
  c(hosts.size() >= 4, "fewer than 4 fixture sources");

  TempDir a("accept-a"), b("accept-b");
  auto ra = run("replay --fixtures " + q(kFixtures / "replay") + " --store " + q(a.path));
  auto rb = run("replay --fixtures " + q(kFixtures / "replay") + " --store " + q(b.path));
  c(ra.status == 0 && rb.status == 0, "replay failed");
  auto rel = fs::path("2019/03/24/1430.json");
  if (fs::exists(a.path / rel) && fs::exists(b.path / rel)) {
    c(read_file(a.path / rel) == read_file(b.path / rel), "replay snapshots differ");
    auto v = run("validate " + q(a.path / rel));
    c(v.status == 0, "validate rejected the replay snapshot");
    try {
      auto s = load_snapshot(a.path / rel);
      std::vector<std::string> sources;
      for (const auto& art : s.articles) sources.push_back(art.ref.source_id);
      c(components_of(s.articles.size(), s.edges, sources) == s.components, "stored components != recomputed");
      c(!s.articles.empty(), "replay produced no articles");
    } catch (const Error& e) {
      c(false, e.what());
    }
  } else {
    c(false, "replay did not write " + rel.string());
  }
  return c;
}

Check gating() {
  Check c;
  TempDir dir("accept-gating");
  Date day = *parse_date("2019-03-24");
  std::vector<Art> arts{
      {"solo", "Exclusive", words("scoop", 0, 6)},
      {"solo", "Exclusive, part two", words("scoop", 0, 6)},
      {"solo", "Exclusive, part three", words("scoop", 0, 6)},
      {"solo", "Exclusive, part four", words("scoop", 0, 6)},
      {"other", "Weather", words("rain", 0, 5)},
      {"third", "Sports", words("goal", 0, 5)},
  };
  write_snapshot(dir.path, snapshot_of(at("2019-03-24T09:00:00Z"), arts));
  auto before = top_story_of_day(dir.path, day);
  c(!before, "single-source component was ranked");

  arts.push_back({"rival", "Rival confirms scoop", words("scoop", 0, 6)});
  write_snapshot(dir.path, snapshot_of(at("2019-03-24T09:10:00Z"), arts));
  auto after = top_story_of_day(dir.path, day);
  c(after.has_value(), "adding a second source did not make the story eligible");
  if (after) {
    c(after->attention_score() == 4.0, "expected score 4.0 for five identical articles");
    c(after->snapshot_id.label() == "2019-03-24/0910", "wrong snapshot");
  }
  return c;
}

Check regimes() {
  Check c;
  std::mt19937 rng(42);
  // Slow days: disjoint sets, plus a few near-duplicate pairs.
  for (int round = 0; round < 20; ++round) {
    std::vector<Art> arts;
    std::uniform_int_distribution<int> n(20, 85), pairs(0, 4);
    int count = n(rng), dup = pairs(rng);
    for (int i = 0; i < count; ++i) arts.push_back({"src" + std::to_string(i % 17), "item", words("r" + std::to_string(round) + "a" + std::to_string(i) + "w", 0, 8)});
    for (int d = 0; d < dup; ++d) {
      auto base = arts[static_cast<std::size_t>(d)];
      base.source = "dup" + std::to_string(d);
      base.tokens.back() = "variant";
      arts.push_back(base);
    }
    auto s = snapshot_of(at("2019-03-20T12:00:00Z"), arts);
    double top = 0;
    for (const auto& comp : s.components) top = std::max(top, comp.attention_score);
    c(top <= 1.0, "slow day scored " + std::to_string(top));
  }
  // Major events: one shared core across 10..17 sources.
  for (int round = 0; round < 20; ++round) {
    std::uniform_int_distribution<int> sources(10, 17), keep(5, 8);
    std::vector<Art> arts;
    auto core = words("core", 0, 8);
    int m = sources(rng);
    for (int i = 0; i < m; ++i) {
      std::vector<std::string> toks(core.begin(), core.begin() + keep(rng));
      auto own = words("own" + std::to_string(i) + "x", 0, 6);
      arts.push_back({"src" + std::to_string(i), "event", concat(toks, own)});
    }
    for (int i = 0; i < 30; ++i) arts.push_back({"src" + std::to_string(i % 17), "noise", words("n" + std::to_string(i) + "w", 0, 8)});
    auto s = snapshot_of(at("2019-03-24T20:00:00Z"), arts);
    const auto& giant = s.components.front();
    c(giant.multi_source && giant.node_ids.size() >= 10, "no giant multi-source component");
    c(giant.attention_score >= 5.0, "major event scored " + std::to_string(giant.attention_score));
  }
  return c;
}

Check ranking_contract() {
  Check c;
  TempDir dir("accept-rank");
  write_archive(kFixtures / "rank/archive.json", dir.path);
  json oracle = json::parse(read_file(kFixtures / "rank/oracle.json"));
  auto same = [&](const StoryRecord& r, const json& want, const std::string& where) {
    c(r.attention_score() == want["score"].get<double>(), where + ": score");
    c(format_rfc3339(r.snapshot_id.time()) == want["snapshot"].get<std::string>(), where + ": snapshot");
    c(r.headline == want["headline"].get<std::string>(), where + ": headline");
  };
  for (const auto& [day, want] : oracle["top_story_of_day"].items()) {
    auto got = top_story_of_day(dir.path, *parse_date(day));
    if (want.is_null()) {
      c(!got, day + ": expected no story");
    } else if (!got) {
      c(false, day + ": no story");
    } else {
      same(*got, want, day);
    }
  }
  for (const auto& query : oracle["top_k"]) {
    RankQuery rq;
    rq.from = at(query["from"].get<std::string>().c_str());
    rq.to = at(query["to"].get<std::string>().c_str());
    rq.k = query["k"].get<std::size_t>();
    auto got = top_k_stories(dir.path, rq);
    std::string where = "top_k " + query["from"].get<std::string>() + " k=" + std::to_string(rq.k);
    c(got.size() == query["expected"].size(), where + ": length");
    for (std::size_t i = 0; i < std::min(got.size(), query["expected"].size()); ++i)
      same(got[i], query["expected"][i], where + " #" + std::to_string(i + 1));
  }
  // The same answers through the CLI.
  auto cli = run("--json top --store " + q(dir.path) + " --from 2019-03-22 --to 2019-03-25 --k 5");
  json j = json::parse(cli.out, nullptr, false);
  c(cli.status == 0 && j.is_array() && j.size() == oracle["top_k"][0]["expected"].size(), "CLI top disagrees");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <storygraph-cli>\n";
    return 2;
  }
  g_cli = argv[1];
  const std::vector<std::pair<const char*, std::function<Check()>>> criteria{
      {"1 table-2 similarity oracle", table2},
      {"2 attention-score identities", attention_identities},
      {"3 brute-force graph equivalence", brute_force},
      {"4 threshold monotonicity", monotonicity},
      {"5 replay determinism and validate", replay_determinism},
      {"6 multi-source gating", gating},
      {"7 regime discrimination", regimes},
      {"8 ranking contract", ranking_contract},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check result;
    try {
      result = fn();
    } catch (const std::exception& e) {
      result.failures.push_back(std::string("exception: ") + e.what());
    }
    std::cout << (result.failures.empty() ? "PASS" : "FAIL") << "  " << name;
    if (!result.failures.empty()) std::cout << "  (" << result.failures.front() << ", " << result.failures.size() << " total)";
    std::cout << "\n";
    failed += !result.failures.empty();
  }
  return failed == 0 ? 0 : 1;
}
