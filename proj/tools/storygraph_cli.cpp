// SPDX-License-Identifier: Apache-2.0
//
// storygraph: one binary for every stage. Exit codes: 0 ok, 1 other error,
// 2 bad configuration, 3 all feeds failed, 4 store or snapshot error.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "storygraph/http_curl.hpp"
#include "storygraph/storygraph.hpp"

namespace sg = storygraph;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

int exit_code_for(sg::ErrorCode code) {
  switch (code) {
    case sg::ErrorCode::ConfigInvalid: return 2;
    case sg::ErrorCode::AllFeedsFailed: return 3;
    case sg::ErrorCode::StoreWriteError:
    case sg::ErrorCode::CorruptSnapshot:
    case sg::ErrorCode::SchemaVersionMismatch: return 4;
    default: return 1;
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sg::Error(sg::ErrorCode::InvalidArgument, "cannot read " + path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Entity files: a JSON array of tokens, {"tokens": [...]}, {"mentions": [...]},
// or plain text with whitespace-separated terms.
sg::TokenSet load_entity_file(const std::string& path) {
  std::string text = read_text(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || (!j.is_array() && !j.is_object())) {
    std::vector<std::string> tokens;
    for (auto& t : sg::tokenize(text)) tokens.push_back(std::move(t));
    return sg::TokenSet(std::move(tokens));
  }
  std::vector<std::string> tokens;
  try {
    if (j.is_array()) {
      tokens = j.get<std::vector<std::string>>();
    } else if (j.contains("mentions")) {
      std::vector<sg::EntityMention> mentions;
      for (const auto& m : j.at("mentions")) mentions.push_back(sg::mention_from_json(m));
      return sg::tokens_of(mentions);
    } else {
      tokens = j.at("tokens").get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    throw sg::Error(sg::ErrorCode::InvalidArgument, path + ": " + e.what());
  }
  for (auto& t : tokens) t = sg::normalize_token(t);
  std::erase_if(tokens, [](const std::string& t) { return t.empty(); });
  return sg::TokenSet(std::move(tokens));
}

sg::UtcTime parse_when(const std::string& s, bool end_of_day) {
  if (auto d = sg::parse_date(s); d && s.size() == 10) {
    auto t = sg::start_of_day(*d);
    return end_of_day ? t + std::chrono::days{1} - std::chrono::seconds{1} : t;
  }
  if (auto t = sg::parse_rfc3339(s)) return *t;
  throw sg::Error(sg::ErrorCode::InvalidArgument, "not a date or RFC 3339 timestamp: " + s);
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

struct ConfigFlags {
  std::string config_path;
  std::optional<std::string> store;
  std::optional<int> cap, interval, k_terms;
  std::optional<double> alpha, beta;
  std::optional<std::string> annotator, ner_endpoint, fixture_path;

  void add_to(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "RunConfig JSON file (or STORYGRAPH_CONFIG)");
    cmd->add_option("--store", store, "Snapshot store root");
    cmd->add_option("--cap", cap, "Articles taken per feed");
    cmd->add_option("--interval", interval, "Seconds between cycles");
    cmd->add_option("--k-terms", k_terms, "Top-k body terms per article");
    cmd->add_option("--alpha", alpha, "Jaccard weight in the blend");
    cmd->add_option("--beta", beta, "Edge threshold");
    cmd->add_option("--annotator", annotator, "heuristic | ner-service | fixture-import");
    cmd->add_option("--ner-endpoint", ner_endpoint, "NER service URL (or STORYGRAPH_NER_ENDPOINT)");
    cmd->add_option("--fixture-annotations", fixture_path, "JSON Lines file for fixture-import");
  }

  sg::RunConfig load() const {
    std::string path = config_path;
    if (path.empty()) {
      if (const char* env = std::getenv("STORYGRAPH_CONFIG")) path = env;
    }
    if (path.empty()) throw sg::Error(sg::ErrorCode::ConfigInvalid, "no config: pass --config or set STORYGRAPH_CONFIG");
    sg::RunConfig cfg = sg::load_config(path, false);
    if (store) cfg.store_root = *store;
    if (cap) cfg.cap = *cap;
    if (interval) cfg.interval_seconds = *interval;
    if (k_terms) cfg.k_terms = *k_terms;
    if (alpha || beta) {
      try {
        cfg.params = sg::SimilarityParams::from_reals(alpha.value_or(cfg.params.alpha.value()),
                                                      beta.value_or(cfg.params.beta.value()));
      } catch (const sg::Error& e) {
        throw sg::Error(sg::ErrorCode::ConfigInvalid, e.what());
      }
    }
    if (annotator) {
      auto kind = sg::parse_annotator_kind(*annotator);
      if (!kind) throw sg::Error(sg::ErrorCode::ConfigInvalid, "unknown annotator " + *annotator);
      cfg.annotator.kind = *kind;
    }
    if (const char* env = std::getenv("STORYGRAPH_NER_ENDPOINT")) cfg.annotator.endpoint = env;
    if (ner_endpoint) cfg.annotator.endpoint = *ner_endpoint;
    if (fixture_path) cfg.annotator.fixture_path = *fixture_path;
    cfg.validate();
    return cfg;
  }
};

json cycle_json(const sg::CycleResult& r) {
  return {{"snapshot", r.id.label()}, {"path", r.path.string()}, {"nodes", r.nodes}, {"edges", r.edges}, {"feeds_ok", r.feeds_ok}};
}

void print_cycle(const sg::CycleResult& r, bool as_json) {
  if (as_json) {
    std::cout << cycle_json(r).dump(2) << "\n";
  } else {
    std::cout << "wrote " << r.path.string() << " (" << r.nodes << " nodes, " << r.edges << " edges, " << r.feeds_ok
              << " feeds ok)\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-source news story tracking"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "Machine-readable output")->configurable(false);

  // snapshot
  ConfigFlags snap_flags;
  std::string snap_time;
  auto* snapshot_cmd = app.add_subcommand("snapshot", "Run one collection cycle");
  snap_flags.add_to(snapshot_cmd);
  snapshot_cmd->add_option("--time", snap_time, "Cycle time (RFC 3339); defaults to now");

  // serve
  ConfigFlags serve_flags;
  std::optional<std::size_t> max_cycles;
  auto* serve_cmd = app.add_subcommand("serve", "Run cycles on aligned interval boundaries until interrupted");
  serve_flags.add_to(serve_cmd);
  serve_cmd->add_option("--max-cycles", max_cycles, "Stop after this many cycles");

  // sim
  std::string sim_a, sim_b;
  double sim_alpha = 0.3, sim_beta = 0.27;
  auto* sim_cmd = app.add_subcommand("sim", "Similarity of two entity files");
  sim_cmd->add_option("a", sim_a, "First entity file")->required();
  sim_cmd->add_option("b", sim_b, "Second entity file")->required();
  sim_cmd->add_option("--alpha", sim_alpha, "Jaccard weight");
  sim_cmd->add_option("--beta", sim_beta, "Edge threshold");

  // graph
  std::string graph_path;
  bool graph_dot = false;
  auto* graph_cmd = app.add_subcommand("graph", "Components and scores of a snapshot");
  graph_cmd->add_option("snapshot", graph_path, "Snapshot file")->required();
  graph_cmd->add_flag("--dot", graph_dot, "Emit Graphviz DOT instead");

  // top
  std::string top_store = "store", top_from, top_to, top_day;
  std::size_t top_k = 5;
  double top_threshold = 0.27;
  auto* top_cmd = app.add_subcommand("top", "Top stories over a time range");
  top_cmd->add_option("--store", top_store, "Snapshot store root");
  top_cmd->add_option("--from", top_from, "Range start (date or RFC 3339)");
  top_cmd->add_option("--to", top_to, "Range end (date or RFC 3339; a date covers the whole day)");
  top_cmd->add_option("--day", top_day, "Top story of one day instead of a range");
  top_cmd->add_option("--k", top_k, "Number of stories")->check(CLI::PositiveNumber);
  top_cmd->add_option("--dedupe-threshold", top_threshold, "Signature similarity treated as the same story");

  // validate
  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a snapshot against recomputation");
  validate_cmd->add_option("snapshot", validate_path, "Snapshot file")->required();

  // replay
  std::string replay_dir, replay_store;
  auto* replay_cmd = app.add_subcommand("replay", "Run one cycle over recorded fixtures, without network");
  replay_cmd->add_option("--fixtures", replay_dir, "Fixture directory with config.json and manifest.json")->required();
  replay_cmd->add_option("--store", replay_store, "Snapshot store root (overrides the fixture config)");

  CLI11_PARSE(app, argc, argv);

  sg::Logger logger(&std::cerr);
  try {
    if (*snapshot_cmd) {
      sg::RunConfig cfg = snap_flags.load();
      sg::UtcTime now = sg::SystemClock{}.now();
      if (!snap_time.empty()) now = parse_when(snap_time, false);
      sg::CurlHttpClient client;
      auto annotator = sg::make_annotator(cfg.annotator, client);
      print_cycle(sg::run_cycle(cfg, now, client, *annotator, logger), as_json);
    } else if (*serve_cmd) {
      sg::RunConfig cfg = serve_flags.load();
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      sg::CurlHttpClient client;
      auto annotator = sg::make_annotator(cfg.annotator, client);
      sg::SystemClock clock;
      sg::Scheduler scheduler(
          std::chrono::seconds{cfg.interval_seconds}, clock,
          [&](sg::UtcTime tick) { sg::run_cycle(cfg, tick, client, *annotator, logger); }, logger);
      auto stats = scheduler.run(g_stop, max_cycles);
      if (as_json) {
        std::cout << json{{"cycles", stats.cycles}, {"failed", stats.failed}, {"skipped_ticks", stats.skipped_ticks}}.dump(2)
                  << "\n";
      } else {
        std::cout << stats.cycles << " cycles, " << stats.failed << " failed, " << stats.skipped_ticks << " ticks skipped\n";
      }
    } else if (*sim_cmd) {
      sg::SimilarityParams p;
      try {
        p = sg::SimilarityParams::from_reals(sim_alpha, sim_beta);
      } catch (const sg::Error& e) {
        throw sg::Error(sg::ErrorCode::ConfigInvalid, e.what());
      }
      auto a = load_entity_file(sim_a);
      auto b = load_entity_file(sim_b);
      auto d = sg::sim_decision(a, b, p);
      if (as_json) {
        std::cout << json{{"size_a", a.size()},       {"size_b", b.size()},       {"intersection", d.intersection},
                          {"union", d.union_size},    {"jaccard", d.jaccard},     {"overlap", d.overlap},
                          {"blended", d.blended},     {"similar", d.similar},     {"alpha", p.alpha.value()},
                          {"beta", p.beta.value()}}
                         .dump(2)
                  << "\n";
      } else {
        std::cout << "|A|=" << a.size() << " |B|=" << b.size() << " |A∩B|=" << d.intersection << " |A∪B|=" << d.union_size
                  << "\n"
                  << "jaccard " << fixed(d.jaccard, 4) << "\n"
                  << "overlap " << fixed(d.overlap, 4) << "\n"
                  << "blended " << fixed(d.blended, 4) << "\n"
                  << (d.similar ? "SIMILAR" : "NOT SIMILAR") << "\n";
      }
    } else if (*graph_cmd) {
      sg::Snapshot s = sg::load_snapshot(graph_path);
      if (graph_dot) {
        sg::write_dot(std::cout, sg::graph_of(s));
      } else if (as_json) {
        json comps = json::array();
        for (const auto& c : s.components) comps.push_back(sg::component_to_json(c));
        std::cout << json{{"snapshot_time", sg::format_rfc3339(s.snapshot_time)},
                          {"nodes", s.articles.size()},
                          {"edges", s.edges.size()},
                          {"components", comps}}
                         .dump(2)
                  << "\n";
      } else {
        std::cout << sg::format_rfc3339(s.snapshot_time) << ": " << s.articles.size() << " nodes, " << s.edges.size()
                  << " edges, " << s.components.size() << " components\n";
        for (const auto& c : s.components) {
          std::cout << "score " << fixed(c.attention_score, 2) << "  nodes " << c.node_ids.size() << "  edges " << c.edge_count
                    << "  " << (c.multi_source ? "story" : "single-source") << "  [";
          for (std::size_t i = 0; i < c.source_ids.size(); ++i) std::cout << (i ? " " : "") << c.source_ids[i];
          std::cout << "]\n";
        }
      }
    } else if (*top_cmd) {
      std::vector<sg::StoryRecord> rows;
      if (!top_day.empty()) {
        auto day = sg::parse_date(top_day);
        if (!day) throw sg::Error(sg::ErrorCode::InvalidArgument, "not a date: " + top_day);
        if (auto best = sg::top_story_of_day(top_store, *day)) rows.push_back(*best);
      } else {
        if (top_from.empty() || top_to.empty())
          throw sg::Error(sg::ErrorCode::InvalidArgument, "top needs --from and --to, or --day");
        sg::RankQuery q;
        q.from = parse_when(top_from, false);
        q.to = parse_when(top_to, true);
        q.k = top_k;
        q.dedupe_threshold = sg::Ratio::from_double(top_threshold);
        rows = sg::top_k_stories(top_store, q);
      }
      if (as_json) {
        std::cout << sg::stories_to_json(rows).dump(2) << "\n";
      } else {
        sg::write_story_table(std::cout, rows);
      }
    } else if (*validate_cmd) {
      sg::Snapshot s = sg::load_snapshot(validate_path);
      if (as_json) {
        std::cout << json{{"valid", true}, {"nodes", s.articles.size()}, {"edges", s.edges.size()},
                          {"components", s.components.size()}}
                         .dump(2)
                  << "\n";
      } else {
        std::cout << "OK " << validate_path << ": " << s.articles.size() << " nodes, " << s.edges.size() << " edges, "
                  << s.components.size() << " components\n";
      }
    } else if (*replay_cmd) {
      std::optional<std::filesystem::path> store;
      if (!replay_store.empty()) store = replay_store;
      print_cycle(sg::replay(replay_dir, store, logger), as_json);
    }
  } catch (const sg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
