// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "storygraph/entity_extract.hpp"
#include "storygraph/error.hpp"
#include "storygraph/feed_ingest.hpp"
#include "storygraph/time.hpp"
#include "storygraph/token_set.hpp"

namespace storygraph {

/// Non-negative rational with a positive denominator. Similarity weights
/// and thresholds are kept exact so the inclusive threshold test never
/// depends on floating-point rounding.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Ratio() = default;
  constexpr Ratio(std::int64_t n, std::int64_t d) : num(n), den(d) { reduce(); }

  /// Nearest decimal with at most nine fractional digits, so 0.3 -> 3/10.
  static Ratio from_double(double v) {
    if (!std::isfinite(v) || v < 0 || v > 1e9) throw Error(ErrorCode::InvalidArgument, "ratio out of range");
    constexpr std::int64_t kScale = 1'000'000'000;
    return Ratio(static_cast<std::int64_t>(std::llround(v * kScale)), kScale);
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend constexpr std::strong_ordering operator<=>(const Ratio& a, const Ratio& b) {
    __int128 l = static_cast<__int128>(a.num) * b.den;
    __int128 r = static_cast<__int128>(b.num) * a.den;
    return l < r ? std::strong_ordering::less : l > r ? std::strong_ordering::greater : std::strong_ordering::equal;
  }
  friend constexpr bool operator==(const Ratio& a, const Ratio& b) { return (a <=> b) == 0; }

 private:
  constexpr void reduce() {
    if (den <= 0) throw Error(ErrorCode::InvalidArgument, "ratio denominator must be positive");
    if (num < 0) throw Error(ErrorCode::InvalidArgument, "ratio must be non-negative");
    std::int64_t g = std::gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
};

struct SimilarityParams {
  Ratio alpha{3, 10};   // Jaccard weight
  Ratio beta{27, 100};  // edge threshold, inclusive

  void validate() const {
    if (alpha > Ratio{1, 1}) throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0,1]");
    if (beta > Ratio{1, 1}) throw Error(ErrorCode::InvalidArgument, "beta must lie in [0,1]");
  }

  static SimilarityParams from_reals(double alpha, double beta) {
    SimilarityParams p{Ratio::from_double(alpha), Ratio::from_double(beta)};
    p.validate();
    return p;
  }

  bool operator==(const SimilarityParams&) const = default;
};

/// |A∩B| / |A∪B|, or 0 when both sets are empty.
inline double jaccard(const TokenSet& a, const TokenSet& b) {
  std::size_t inter = intersection_size(a, b);
  std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// |A∩B| / min(|A|,|B|), or 0 when either set is empty.
inline double overlap(const TokenSet& a, const TokenSet& b) {
  std::size_t inter = intersection_size(a, b);
  std::size_t smaller = std::min(a.size(), b.size());
  return smaller == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(smaller);
}

struct SimDecision {
  bool similar = false;
  double jaccard = 0;
  double overlap = 0;
  double blended = 0;
  std::size_t intersection = 0;
  std::size_t union_size = 0;
  std::size_t min_size = 0;
};

/// Decides similarity from the three set counts. The threshold test is
/// exact: I·(a·M + (1−a)·U) / (U·M) ≥ b evaluated over integers.
inline SimDecision sim_decision_from_counts(std::size_t inter, std::size_t size_a, std::size_t size_b,
                                            const SimilarityParams& p) {
  SimDecision d;
  d.intersection = inter;
  d.union_size = size_a + size_b - inter;
  d.min_size = std::min(size_a, size_b);
  d.jaccard = d.union_size == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(d.union_size);
  d.overlap = d.min_size == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(d.min_size);
  double a = p.alpha.value();
  d.blended = a * d.jaccard + (1.0 - a) * d.overlap;

  if (d.union_size == 0 || d.min_size == 0) {
    d.similar = p.beta.num == 0;
    return d;
  }
  using i128 = __int128;
  const i128 I = static_cast<i128>(inter), U = static_cast<i128>(d.union_size), M = static_cast<i128>(d.min_size);
  const i128 an = p.alpha.num, ad = p.alpha.den, bn = p.beta.num, bd = p.beta.den;
  i128 lhs = I * (an * M + (ad - an) * U) * bd;
  i128 rhs = bn * ad * U * M;
  d.similar = lhs >= rhs;
  return d;
}

inline SimDecision sim_decision(const TokenSet& a, const TokenSet& b, const SimilarityParams& p = {}) {
  return sim_decision_from_counts(intersection_size(a, b), a.size(), b.size(), p);
}

struct NewsEdge {
  std::size_t node_a = 0;  // node_a < node_b
  std::size_t node_b = 0;
  double jaccard = 0;
  double overlap = 0;
  double blended = 0;

  bool operator==(const NewsEdge&) const = default;
};

struct GraphNode {
  std::size_t id = 0;
  ArticleRef ref;
  std::string title;
  TokenSet tokens;
};

struct SimilarityGraph {
  UtcTime snapshot_time{};
  SimilarityParams params;
  std::vector<GraphNode> nodes;
  std::vector<NewsEdge> edges;  // sorted by (node_a, node_b)
  std::size_t pairs_evaluated = 0;

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> deg(nodes.size(), 0);
    for (const auto& e : edges) {
      ++deg[e.node_a];
      ++deg[e.node_b];
    }
    return deg;
  }
};

/// Evaluates every unordered pair; edges come out sorted by id pair.
inline std::vector<NewsEdge> find_edges(std::span<const TokenSet> sets, const SimilarityParams& p,
                                        std::size_t* pairs_evaluated = nullptr) {
  std::vector<NewsEdge> edges;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      ++pairs;
      SimDecision d = sim_decision(sets[i], sets[j], p);
      if (d.similar) edges.push_back({i, j, d.jaccard, d.overlap, d.blended});
    }
  }
  if (pairs_evaluated) *pairs_evaluated = pairs;
  return edges;
}

/// Node ids follow input order.
inline SimilarityGraph build_graph(std::span<const EntitySet> sets, const SimilarityParams& p, UtcTime time) {
  p.validate();
  SimilarityGraph g;
  g.snapshot_time = time;
  g.params = p;
  std::vector<TokenSet> tokens;
  tokens.reserve(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    g.nodes.push_back({i, sets[i].article_ref, {}, sets[i].token_set});
    tokens.push_back(sets[i].token_set);
  }
  g.edges = find_edges(tokens, p, &g.pairs_evaluated);
  return g;
}

/// 2|E| / |C|, the component's average degree.
inline double attention_score(std::size_t node_count, std::size_t edge_count) {
  if (node_count == 0) throw Error(ErrorCode::InvalidArgument, "component must have at least one node");
  return 2.0 * static_cast<double>(edge_count) / static_cast<double>(node_count);
}

struct StoryComponent {
  std::vector<std::size_t> node_ids;  // ascending
  std::size_t edge_count = 0;
  double attention_score = 0;
  std::vector<std::string> source_ids;  // ascending, unique
  bool multi_source = false;

  bool operator==(const StoryComponent&) const = default;
};

/// Exact comparison of two components' attention scores.
inline std::strong_ordering compare_attention(const StoryComponent& a, const StoryComponent& b) {
  // 2Ea/Na vs 2Eb/Nb  <=>  Ea*Nb vs Eb*Na
  auto l = static_cast<unsigned __int128>(a.edge_count) * b.node_ids.size();
  auto r = static_cast<unsigned __int128>(b.edge_count) * a.node_ids.size();
  return l < r ? std::strong_ordering::less : l > r ? std::strong_ordering::greater : std::strong_ordering::equal;
}

/// Union-find over `node_count` nodes. `sources[i]` is node i's source id.
/// Output is sorted by attention score descending, then smallest node id.
inline std::vector<StoryComponent> components_of(std::size_t node_count, std::span<const NewsEdge> edges,
                                                 std::span<const std::string> sources) {
  std::vector<std::size_t> parent(node_count);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& e : edges) {
    if (e.node_a >= node_count || e.node_b >= node_count)
      throw Error(ErrorCode::InvalidArgument, "edge references a missing node");
    std::size_t ra = find(e.node_a), rb = find(e.node_b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }

  // Roots are the smallest id of their component, so iterating ids in order
  // creates components in order of smallest member.
  std::vector<std::size_t> slot(node_count, node_count);
  std::vector<StoryComponent> out;
  for (std::size_t i = 0; i < node_count; ++i) {
    std::size_t r = find(i);
    if (slot[r] == node_count) {
      slot[r] = out.size();
      out.emplace_back();
    }
    StoryComponent& c = out[slot[r]];
    c.node_ids.push_back(i);
    if (i < sources.size()) c.source_ids.push_back(sources[i]);
  }
  for (const auto& e : edges) ++out[slot[find(e.node_a)]].edge_count;
  for (auto& c : out) {
    std::sort(c.source_ids.begin(), c.source_ids.end());
    c.source_ids.erase(std::unique(c.source_ids.begin(), c.source_ids.end()), c.source_ids.end());
    c.multi_source = c.source_ids.size() >= 2;
    c.attention_score = attention_score(c.node_ids.size(), c.edge_count);
  }
  std::stable_sort(out.begin(), out.end(), [](const StoryComponent& a, const StoryComponent& b) {
    auto cmp = compare_attention(a, b);
    if (cmp != 0) return cmp > 0;
    return a.node_ids.front() < b.node_ids.front();
  });
  return out;
}

inline std::vector<StoryComponent> connected_components(const SimilarityGraph& g) {
  std::vector<std::string> sources;
  sources.reserve(g.nodes.size());
  for (const auto& n : g.nodes) sources.push_back(n.ref.source_id);
  return components_of(g.nodes.size(), g.edges, sources);
}

namespace detail {

inline std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out;
}

inline const char* leaning_color(Leaning l) {
  switch (l) {
    case Leaning::Left: return "blue";
    case Leaning::Center: return "purple";
    case Leaning::Right: return "red";
  }
  return "gray";
}

}  // namespace detail

/// Graphviz rendering: nodes colored by source leaning (left blue, center
/// purple, right red), edges labelled with the blended similarity.
inline void write_dot(std::ostream& os, const SimilarityGraph& g) {
  os << "graph storygraph {\n";
  os << "  graph [label=\"" << format_rfc3339(g.snapshot_time) << "\", overlap=false];\n";
  os << "  node [shape=circle, style=filled, fontcolor=white];\n";
  for (const auto& n : g.nodes) {
    os << "  n" << n.id << " [label=\"" << detail::dot_escape(n.ref.source_id) << "\", fillcolor="
       << detail::leaning_color(n.ref.leaning) << ", tooltip=\"" << detail::dot_escape(n.title.empty() ? n.ref.url : n.title)
       << "\"];\n";
  }
  char buf[32];
  for (const auto& e : g.edges) {
    std::snprintf(buf, sizeof buf, "%.4f", e.blended);
    os << "  n" << e.node_a << " -- n" << e.node_b << " [label=\"" << buf << "\"];\n";
  }
  os << "}\n";
}

}  // namespace storygraph
