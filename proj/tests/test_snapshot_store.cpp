// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <fstream>

#include "support.hpp"

using namespace storygraph;
using namespace sgtest;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Three related articles, one loner; two sources in the big component.
Snapshot sample(const char* when = "2019-03-24T14:30:00Z") {
  auto core = words("bridge", 0, 10);
  return snapshot_of(at(when), {
                                   {"leftwire", "Bridge collapse", core, Leaning::Left},
                                   {"rightdaily", "Bridge falls", concat(core, {"norfolk"}), Leaning::Right},
                                   {"leftwire", "More on bridge", concat(words("bridge", 2, 10), {"harbor"}), Leaning::Left},
                                   {"metrotimes", "Marathon", words("race", 0, 6)},
                               });
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

std::string mutate(const Snapshot& s, const std::function<void(json&)>& edit) {
  json j = json::parse(serialize(s));
  edit(j);
  return j.dump(1);
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

}  // namespace

TEST_CASE("sample snapshot has the expected structure") {
  auto s = sample();
  REQUIRE(s.articles.size() == 4);
  CHECK(s.edges.size() == 3);
  REQUIRE(s.components.size() == 2);
  CHECK(s.components[0].node_ids == std::vector<std::size_t>{0, 1, 2});
  CHECK(s.components[0].multi_source);
  CHECK(s.components[0].attention_score == 2.0);
  CHECK_FALSE(s.components[1].multi_source);
}

TEST_CASE("serialize then deserialize is the identity") {
  auto s = sample();
  s.diagnostics.events.push_back({"fetch", "leftwire", "https://leftwire.example/x", "HttpError", "status 404"});
  s.diagnostics.sources["leftwire"] = {3, 3, 2, 1};
  std::string bytes = serialize(s);
  auto back = deserialize(bytes);
  CHECK(back == s);
  CHECK(serialize(back) == bytes);
  CHECK(back.params.alpha == Ratio{3, 10});
  CHECK(back.params.beta == Ratio{27, 100});

  // Keys come out sorted, so the encoding does not depend on insertion order.
  json j = json::parse(bytes);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(std::is_sorted(keys.begin(), keys.end()));
  CHECK(j["snapshot_time"] == "2019-03-24T14:30:00Z");

  // Empty cycles round-trip too.
  Snapshot empty;
  empty.snapshot_time = at("2019-03-24T00:00:00Z");
  CHECK(deserialize(serialize(empty)) == empty);
}

TEST_CASE("corrupt snapshots are rejected") {
  auto s = sample();

  CHECK(code_of([&] { deserialize(serialize(s).substr(0, 200)); }) == ErrorCode::CorruptSnapshot);
  CHECK(code_of([&] { deserialize(""); }) == ErrorCode::CorruptSnapshot);
  CHECK(code_of([&] { deserialize("[]"); }) == ErrorCode::CorruptSnapshot);

  // An edge that references a node which is not there.
  CHECK(code_of([&] { deserialize(mutate(s, [](json& j) { j["articles"].erase(j["articles"].size() - 2); })); }) ==
        ErrorCode::CorruptSnapshot);
  // Stored score differs from the recomputed one.
  CHECK(code_of([&] { deserialize(mutate(s, [](json& j) { j["edges"][0]["blended"] = 0.99; })); }) ==
        ErrorCode::CorruptSnapshot);
  // Dropped edge.
  CHECK(code_of([&] { deserialize(mutate(s, [](json& j) { j["edges"].erase(0); })); }) == ErrorCode::CorruptSnapshot);
  // Component bookkeeping.
  CHECK(code_of([&] { deserialize(mutate(s, [](json& j) { j["components"][0]["attention_score"] = 3.0; })); }) ==
        ErrorCode::CorruptSnapshot);
  CHECK(code_of([&] { deserialize(mutate(s, [](json& j) { j["components"][1]["multi_source"] = true; })); }) ==
        ErrorCode::CorruptSnapshot);
  // Token set must be the union of the mention tokens.
  CHECK(code_of([&] { deserialize(mutate(s, [](json& j) { j["articles"][3]["token_set"].push_back("zzz"); })); }) ==
        ErrorCode::CorruptSnapshot);
  CHECK(code_of([&] { deserialize(mutate(s, [](json& j) { j["articles"][3]["node_id"] = 7; })); }) ==
        ErrorCode::CorruptSnapshot);
  CHECK(code_of([&] { deserialize(mutate(s, [](json& j) { j["params"]["beta"] = 1.5; })); }) ==
        ErrorCode::CorruptSnapshot);
  CHECK(code_of([&] { deserialize(mutate(s, [](json& j) { j["articles"][0]["leaning"] = "up"; })); }) ==
        ErrorCode::CorruptSnapshot);
  CHECK(code_of([&] { deserialize(mutate(s, [](json& j) { j.erase("diagnostics"); })); }) ==
        ErrorCode::CorruptSnapshot);

  CHECK(code_of([&] { deserialize(mutate(s, [](json& j) { j["schema_version"] = 2; })); }) ==
        ErrorCode::SchemaVersionMismatch);
}

TEST_CASE("snapshot ids and store paths") {
  auto id = SnapshotId::from_time(at("2019-03-24T14:37:59Z"));
  CHECK(id.minute_of_day == 877);
  CHECK(id.sequence() == 87);
  CHECK(id.label() == "2019-03-24/1437");

  fs::path root = "/store";
  CHECK(store_path(SnapshotId::from_sequence(*parse_date("2019-03-24"), 87), root) == "/store/2019/03/24/1430.json");
  CHECK(store_path(SnapshotId::from_sequence(*parse_date("2019-03-24"), 0), root) == "/store/2019/03/24/0000.json");
  CHECK(store_path(SnapshotId::from_sequence(*parse_date("2019-03-24"), 143), root) == "/store/2019/03/24/2350.json");
  CHECK_THROWS_AS(SnapshotId::from_sequence(*parse_date("2019-03-24"), 144), Error);
  CHECK_THROWS_AS(SnapshotId::from_sequence(*parse_date("2019-03-24"), -1), Error);

  auto back = id_from_path("/store/2019/03/24/1430.json", root);
  REQUIRE(back);
  CHECK(back->label() == "2019-03-24/1430");
  CHECK_FALSE(id_from_path("/store/2019/03/24/1430.json.tmp.1.0", root));
  CHECK_FALSE(id_from_path("/store/2019/03/24/2460.json", root));
  CHECK_FALSE(id_from_path("/store/2019/02/30/1430.json", root));
  CHECK_FALSE(id_from_path("/store/2019/03/1430.json", root));
  CHECK_FALSE(id_from_path("/elsewhere/2019/03/24/1430.json", root));

  CHECK(SnapshotId::from_time(at("2019-03-24T00:00:00Z")) < id);
}

TEST_CASE("writes are once-only") {
  TempDir dir("store");
  auto s = sample();
  auto path = write_snapshot(dir.path, s);
  CHECK(path == dir.path / "2019/03/24/1430.json");
  std::string before = read_file(path);
  CHECK(before == serialize(s));

  auto other = sample();
  other.articles.pop_back();
  other.components.pop_back();
  CHECK(code_of([&] { write_snapshot(dir.path, other); }) == ErrorCode::StoreWriteError);
  CHECK(code_of([&] { detail::write_once(path, "x"); }) == ErrorCode::StoreWriteError);
  CHECK(read_file(path) == before);

  // No temp files are left behind.
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir.path)) files += e.is_regular_file();
  CHECK(files == 1);

  CHECK(load_snapshot(path) == s);
  CHECK(code_of([&] { load_snapshot(dir.path / "2019/03/24/1440.json"); }) == ErrorCode::CorruptSnapshot);
}

TEST_CASE("plaintext sidecars are hash-checked") {
  TempDir dir("sidecar");
  auto s = sample();
  auto path = write_snapshot(dir.path, s, WriteOptions{true});
  json j = json::parse(read_file(path));
  for (const auto& a : j["articles"]) {
    CHECK_FALSE(a.contains("plaintext"));
    CHECK(a["plaintext_ref"]["sha256"].get<std::string>().size() == 64);
  }
  CHECK(fs::exists(path.parent_path() / "1430.d/0.txt"));

  auto loaded = load_snapshot(path);
  REQUIRE(loaded.articles.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(loaded.articles[i].plaintext == s.articles[i].plaintext);
    REQUIRE(loaded.articles[i].plaintext_ref);
  }
  // Without a base directory the refs survive and plaintext stays empty.
  auto shallow = deserialize(read_file(path));
  CHECK(shallow.articles[0].plaintext.empty());

  spit(path.parent_path() / "1430.d/2.txt", "tampered");
  CHECK(code_of([&] { load_snapshot(path); }) == ErrorCode::CorruptSnapshot);
  fs::remove(path.parent_path() / "1430.d/2.txt");
  CHECK(code_of([&] { load_snapshot(path); }) == ErrorCode::CorruptSnapshot);

  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("range listing") {
  TempDir dir("range");
  Date day = *parse_date("2019-03-24");
  for (int q = 0; q < 144; ++q) {
    Snapshot s;
    s.snapshot_time = SnapshotId::from_sequence(day, q).time();
    write_snapshot(dir.path, s);
  }
  Snapshot next;
  next.snapshot_time = at("2019-03-25T00:00:00Z");
  write_snapshot(dir.path, next);

  auto from = start_of_day(day), to = start_of_day(day) + std::chrono::hours{24} - std::chrono::seconds{1};
  auto all = list_range(dir.path, from, to);
  REQUIRE(all.size() == 144);
  CHECK(std::is_sorted(all.begin(), all.end()));
  CHECK(all.front().sequence() == 0);
  CHECK(all.back().sequence() == 143);

  for (int q : {5, 70, 143}) fs::remove(store_path(SnapshotId::from_sequence(day, q), dir.path));
  auto gappy = list_range(dir.path, from, to);
  CHECK(gappy.size() == 141);

  // Bounds are inclusive; ranges may span days.
  CHECK(list_range(dir.path, at("2019-03-24T14:30:00Z"), at("2019-03-24T14:50:00Z")).size() == 3);
  CHECK(list_range(dir.path, at("2019-03-24T23:40:00Z"), at("2019-03-25T00:00:00Z")).size() == 2);
  CHECK(list_range(dir.path, to, from).empty());
  CHECK(list_range(dir.path / "missing", from, to).empty());

  // Stray files in a day directory are ignored.
  spit(dir.path / "2019/03/24/notes.txt", "x");
  CHECK(list_range(dir.path, from, to).size() == 141);
}
