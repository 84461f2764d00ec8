// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "storygraph/content_extract.hpp"
#include "storygraph/error.hpp"
#include "storygraph/gazetteer.hpp"
#include "storygraph/http.hpp"
#include "storygraph/text.hpp"
#include "storygraph/token_set.hpp"
#include "storygraph/url.hpp"

namespace storygraph {

enum class EntityClass { Person, Location, Organization, Date, Time, Money, Percent, Title, TopKTerm };

inline constexpr std::array<EntityClass, 9> kAllEntityClasses = {
    EntityClass::Person, EntityClass::Location, EntityClass::Organization, EntityClass::Date,    EntityClass::Time,
    EntityClass::Money,  EntityClass::Percent,  EntityClass::Title,        EntityClass::TopKTerm};

inline const char* to_string(EntityClass c) {
  switch (c) {
    case EntityClass::Person: return "PERSON";
    case EntityClass::Location: return "LOCATION";
    case EntityClass::Organization: return "ORGANIZATION";
    case EntityClass::Date: return "DATE";
    case EntityClass::Time: return "TIME";
    case EntityClass::Money: return "MONEY";
    case EntityClass::Percent: return "PERCENT";
    case EntityClass::Title: return "TITLE";
    case EntityClass::TopKTerm: return "TOP-K-TERM";
  }
  return "PERSON";
}

inline std::optional<EntityClass> parse_entity_class(std::string_view s) {
  for (auto c : kAllEntityClasses) {
    if (s == to_string(c)) return c;
  }
  return std::nullopt;
}

/// True for the seven classes a recognizer produces (not TITLE/TOP-K-TERM).
inline bool is_ner_class(EntityClass c) { return c != EntityClass::Title && c != EntityClass::TopKTerm; }

struct EntityMention {
  EntityClass cls = EntityClass::Person;
  std::string surface;
  std::vector<std::string> tokens;

  bool operator==(const EntityMention&) const = default;
};

struct EntitySet {
  ArticleRef article_ref;
  std::vector<EntityMention> mentions;
  TokenSet token_set;
};

inline TokenSet tokens_of(const std::vector<EntityMention>& mentions) {
  std::vector<std::string> all;
  for (const auto& m : mentions) all.insert(all.end(), m.tokens.begin(), m.tokens.end());
  return TokenSet(std::move(all));
}

/// A well-formed token is non-empty, lowercase, and whitespace-free.
inline bool is_valid_token(std::string_view t) {
  if (t.empty()) return false;
  for (std::size_t i = 0; i < t.size();) {
    char32_t cp = utf8::decode(t, i);
    if (is_space_cp(cp) || (cp >= 'A' && cp <= 'Z')) return false;
  }
  return true;
}

/// Builds a mention from a surface string; nullopt when nothing survives
/// normalization.
inline std::optional<EntityMention> make_mention(EntityClass cls, std::string surface) {
  EntityMention m{cls, std::move(surface), {}};
  m.tokens = tokenize(m.surface);
  if (m.tokens.empty()) return std::nullopt;
  return m;
}

struct AnnotatorBackend {
  enum class Kind { NerService, Heuristic, FixtureImport };
  Kind kind = Kind::Heuristic;
  std::string endpoint;      // NerService
  std::string fixture_path;  // FixtureImport
  std::chrono::milliseconds timeout{60000};
};

inline const char* to_string(AnnotatorBackend::Kind k) {
  switch (k) {
    case AnnotatorBackend::Kind::NerService: return "ner-service";
    case AnnotatorBackend::Kind::Heuristic: return "heuristic";
    case AnnotatorBackend::Kind::FixtureImport: return "fixture-import";
  }
  return "heuristic";
}

inline std::optional<AnnotatorBackend::Kind> parse_annotator_kind(std::string_view s) {
  if (s == "ner-service") return AnnotatorBackend::Kind::NerService;
  if (s == "heuristic") return AnnotatorBackend::Kind::Heuristic;
  if (s == "fixture-import") return AnnotatorBackend::Kind::FixtureImport;
  return std::nullopt;
}

/// Produces NER-class mentions for one document.
class Annotator {
 public:
  virtual ~Annotator() = default;
  virtual std::vector<EntityMention> annotate(const PlainDocument& doc) = 0;
};

// ---------------------------------------------------------------------------
// Heuristic recognizer

class HeuristicAnnotator final : public Annotator {
 public:
  std::vector<EntityMention> annotate(const PlainDocument& doc) override { return recognize(doc.plaintext); }

  struct Word {
    std::string_view raw;
    std::string core;   // leading/trailing punctuation removed
    std::string lower;  // normalize_token(core)
    bool capitalized = false;
    bool sentence_start = false;
    bool ends_sentence = false;
    bool breaks_before = false;
    bool breaks_after = false;
  };

  static std::vector<Word> words_of(std::string_view text) {
    std::vector<Word> words;
    bool next_starts_sentence = true;
    // Paragraph breaks also end sentences.
    std::size_t line_start = 0;
    while (line_start <= text.size()) {
      std::size_t nl = text.find('\n', line_start);
      std::string_view line = text.substr(line_start, nl == std::string_view::npos ? std::string_view::npos : nl - line_start);
      next_starts_sentence = true;
      for (auto raw : split_words(line)) {
        Word w = analyze(raw);
        if (w.core.empty()) continue;
        w.sentence_start = next_starts_sentence;
        next_starts_sentence = w.ends_sentence;
        words.push_back(std::move(w));
      }
      if (!words.empty()) {
        words.back().ends_sentence = true;
        words.back().breaks_after = true;
      }
      if (nl == std::string_view::npos) break;
      line_start = nl + 1;
    }
    return words;
  }

  static std::vector<EntityMention> recognize(std::string_view text) {
    std::vector<Word> words = words_of(text);
    std::vector<EntityMention> out;
    auto emit = [&](EntityClass cls, std::size_t begin, std::size_t end) {
      std::string surface;
      for (std::size_t k = begin; k < end; ++k) {
        if (!surface.empty()) surface += ' ';
        surface += words[k].core;
      }
      if (auto m = make_mention(cls, std::move(surface))) out.push_back(std::move(*m));
    };

    std::size_t i = 0;
    while (i < words.size()) {
      if (std::size_t end = match_money(words, i); end > i) {
        emit(EntityClass::Money, i, end);
        i = end;
      } else if (end = match_percent(words, i); end > i) {
        emit(EntityClass::Percent, i, end);
        i = end;
      } else if (end = match_time(words, i); end > i) {
        emit(EntityClass::Time, i, end);
        i = end;
      } else if (end = match_date(words, i); end > i) {
        emit(EntityClass::Date, i, end);
        i = end;
      } else if (words[i].capitalized) {
        i = match_name(words, i, emit);
      } else {
        ++i;
      }
    }
    return out;
  }

 private:
  static bool is_closing_punct(char32_t cp) {
    return cp == '.' || cp == ',' || cp == ';' || cp == ':' || cp == '!' || cp == '?' || cp == '"' || cp == '\'' ||
           cp == ')' || cp == ']' || cp == '}' || cp == 0x201D || cp == 0x2019 || cp == 0xBB;
  }
  static bool is_opening_punct(char32_t cp) {
    return cp == '"' || cp == '\'' || cp == '(' || cp == '[' || cp == '{' || cp == 0x201C || cp == 0x2018 || cp == 0xAB;
  }

  static Word analyze(std::string_view raw) {
    Word w;
    w.raw = raw;
    std::string_view core = raw;
    // Leading punctuation.
    while (!core.empty()) {
      std::size_t i = 0;
      char32_t cp = utf8::decode(core, i);
      if (!is_opening_punct(cp)) break;
      w.breaks_before = true;
      core.remove_prefix(i);
    }
    // Trailing punctuation, remembered for sentence and run boundaries.
    std::string trailing;
    while (!core.empty()) {
      std::size_t back = core.size() - 1;
      while (back > 0 && (static_cast<unsigned char>(core[back]) & 0xC0) == 0x80) --back;
      std::size_t i = back;
      char32_t cp = utf8::decode(core, i);
      if (!is_closing_punct(cp)) break;
      trailing.insert(0, core.substr(back));
      core.remove_suffix(core.size() - back);
    }
    w.core = std::string(core);
    w.lower = normalize_token(core);
    if (!core.empty()) {
      unsigned char c0 = static_cast<unsigned char>(core[0]);
      w.capitalized = c0 >= 'A' && c0 <= 'Z';
    }
    bool terminal = trailing.find_first_of(".!?") != std::string::npos;
    if (terminal && trailing.find_first_of("!?") == std::string::npos) {
      // A period after an abbreviation or a single initial is not a full stop.
      std::string dotless;
      for (char c : w.core) {
        if (c != '.') dotless.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      }
      bool initial = w.core.size() == 1 && w.capitalized;
      if (initial || gazetteer::contains(gazetteer::abbreviations(), dotless) || w.core.find('.') != std::string::npos)
        terminal = false;
    }
    w.ends_sentence = terminal;
    w.breaks_after = terminal || trailing.find_first_of(",;:)]}\"") != std::string::npos ||
                     trailing.find("\xE2\x80\x9D") != std::string::npos;
    return w;
  }

  static bool is_number(std::string_view s) {
    if (s.empty()) return false;
    bool digit = false;
    for (char c : s) {
      if (std::isdigit(static_cast<unsigned char>(c))) {
        digit = true;
      } else if (c != '.' && c != ',') {
        return false;
      }
    }
    return digit;
  }

  static bool is_am_pm(const Word& w) { return w.lower == "am" || w.lower == "pm"; }

  static std::size_t match_money(const std::vector<Word>& words, std::size_t i) {
    std::string_view core = words[i].core;
    std::size_t end = i;
    for (std::string_view currency : {"$", "\xE2\x82\xAC", "\xC2\xA3"}) {
      if (core.starts_with(currency) && is_number(core.substr(currency.size()))) end = i + 1;
    }
    if (end == i && is_number(core) && i + 1 < words.size() && !words[i].breaks_after &&
        (words[i + 1].lower == "dollars" || words[i + 1].lower == "cents"))
      return i + 2;
    if (end > i && !words[i].breaks_after && end < words.size() &&
        gazetteer::contains(gazetteer::money_scales(), words[end].lower))
      ++end;
    return end;
  }

  static std::size_t match_percent(const std::vector<Word>& words, std::size_t i) {
    std::string_view core = words[i].core;
    if (core.size() > 1 && core.back() == '%' && is_number(core.substr(0, core.size() - 1))) return i + 1;
    if (is_number(core) && i + 1 < words.size() && !words[i].breaks_after &&
        (words[i + 1].lower == "percent" || words[i + 1].lower == "percentage"))
      return i + 2;
    return i;
  }

  static std::size_t match_time(const std::vector<Word>& words, std::size_t i) {
    std::string_view core = words[i].core;
    auto colon = core.find(':');
    bool clock = colon != std::string_view::npos && colon > 0 && colon <= 2 && core.size() - colon == 3 &&
                 is_number(core.substr(0, colon)) && is_number(core.substr(colon + 1));
    bool hour = is_number(core) && core.size() <= 2;
    bool meridiem = i + 1 < words.size() && is_am_pm(words[i + 1]) && !words[i].breaks_after;
    if (clock) return meridiem ? i + 2 : i + 1;
    if (hour && meridiem) return i + 2;
    return i;
  }

  static bool is_year(std::string_view core) {
    return core.size() == 4 && is_number(core) && (core.starts_with("19") || core.starts_with("20"));
  }

  static std::size_t match_date(const std::vector<Word>& words, std::size_t i) {
    const Word& w = words[i];
    if (w.capitalized && gazetteer::contains(gazetteer::weekdays(), w.lower)) return i + 1;
    if (!w.capitalized && gazetteer::contains(gazetteer::relative_days(), w.lower)) return i + 1;
    if (w.capitalized && gazetteer::contains(gazetteer::months(), w.lower) && w.lower != "may") {
      std::size_t end = i + 1;
      if (end < words.size() && !words[end - 1].breaks_after && is_number(words[end].core) &&
          words[end].core.size() <= 2)
        ++end;
      if (end < words.size() && (end == i + 1 ? !words[i].breaks_after : true) && is_year(words[end].core)) ++end;
      return end;
    }
    if (w.capitalized && w.lower == "may" && i + 1 < words.size() && !w.breaks_after &&
        is_number(words[i + 1].core) && words[i + 1].core.size() <= 2) {
      std::size_t end = i + 2;
      if (end < words.size() && is_year(words[end].core)) ++end;
      return end;
    }
    if (is_year(w.core)) return i + 1;
    return i;
  }

  static bool is_date_word(const Word& w) {
    return gazetteer::contains(gazetteer::months(), w.lower) || gazetteer::contains(gazetteer::weekdays(), w.lower);
  }

  static bool is_acronym(std::string_view core) {
    if (core.size() < 2 || core.size() > 6) return false;
    return std::all_of(core.begin(), core.end(), [](char c) { return (c >= 'A' && c <= 'Z') || c == '.'; });
  }

  template <typename Emit>
  static std::size_t match_name(const std::vector<Word>& words, std::size_t i, Emit& emit) {
    std::size_t j = i;
    bool person_hint = false;
    // Leading honorifics and capitalized function words are not part of a name.
    while (j < words.size() && words[j].capitalized && !words[j].breaks_after &&
           (gazetteer::contains(gazetteer::honorifics(), words[j].lower) || is_stopword(words[j].lower))) {
      person_hint = person_hint || gazetteer::contains(gazetteer::honorifics(), words[j].lower);
      ++j;
    }
    std::size_t start = j;
    while (j < words.size()) {
      const Word& w = words[j];
      if (j > start && w.breaks_before) break;
      if (w.capitalized && !is_date_word(w)) {
        ++j;
        if (w.breaks_after) break;
        continue;
      }
      // "Bank of America" joins; "Mark Delaney of Ohio" does not.
      if (j > start && !w.capitalized && gazetteer::contains(gazetteer::name_connectors(), w.lower) &&
          !gazetteer::contains(gazetteer::first_names(), words[start].lower) &&
          j + 1 < words.size() && words[j + 1].capitalized && !w.breaks_after && !words[j + 1].breaks_before &&
          !is_date_word(words[j + 1])) {
        ++j;
        continue;
      }
      break;
    }
    std::size_t end = j;
    if (start == end) {
      // Either a bare honorific/stopword run or a word that cannot start a name.
      if (start == i && words[i].capitalized && (gazetteer::contains(gazetteer::honorifics(), words[i].lower) ||
                                                 is_stopword(words[i].lower) || is_date_word(words[i])))
        return i + 1;
      return std::max(end, i + 1);
    }

    std::vector<std::string> lowers;
    for (std::size_t k = start; k < end; ++k) lowers.push_back(words[k].lower);
    auto any_in = [&](const std::vector<std::string_view>& list) {
      return std::any_of(lowers.begin(), lowers.end(), [&](const std::string& l) { return gazetteer::contains(list, l); });
    };
    bool org = any_in(gazetteer::organization_words()) ||
               (end - start == 1 && is_acronym(words[start].core));
    bool loc = any_in(gazetteer::locations()) || lowers.back() == "york";
    bool first_name = gazetteer::contains(gazetteer::first_names(), lowers.front());

    bool single = end - start == 1;
    if (single && words[start].sentence_start && !person_hint && !org && !loc && !first_name) return end;
    if (single && is_stopword(lowers.front())) return end;

    EntityClass cls = EntityClass::Person;
    if (org) {
      cls = EntityClass::Organization;
    } else if (loc && !person_hint && !first_name) {
      cls = EntityClass::Location;
    }
    emit(cls, start, end);
    return end;
  }
};

// ---------------------------------------------------------------------------
// NER service (CoreNLP server JSON contract)

/// Maps a recognizer label onto one of the seven classes, if any.
inline std::optional<EntityClass> map_ner_label(std::string_view label) {
  if (label == "PERSON") return EntityClass::Person;
  if (label == "LOCATION" || label == "CITY" || label == "COUNTRY" || label == "STATE_OR_PROVINCE")
    return EntityClass::Location;
  if (label == "ORGANIZATION") return EntityClass::Organization;
  if (label == "DATE") return EntityClass::Date;
  if (label == "TIME") return EntityClass::Time;
  if (label == "MONEY") return EntityClass::Money;
  if (label == "PERCENT") return EntityClass::Percent;
  return std::nullopt;
}

/// Parses a CoreNLP JSON annotation document and merges adjacent
/// same-label tokens within a sentence into mentions.
inline std::vector<EntityMention> parse_ner_response(std::string_view body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::AnnotatorProtocolError, std::string("response is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("sentences") || !doc["sentences"].is_array())
    throw Error(ErrorCode::AnnotatorProtocolError, "response has no sentences array");

  std::vector<EntityMention> out;
  for (const auto& sentence : doc["sentences"]) {
    if (!sentence.is_object() || !sentence.contains("tokens") || !sentence["tokens"].is_array())
      throw Error(ErrorCode::AnnotatorProtocolError, "sentence without tokens array");
    bool open = false;
    EntityClass open_cls = EntityClass::Person;
    std::string open_label, surface;
    auto close = [&] {
      if (open) {
        if (auto m = make_mention(open_cls, surface)) out.push_back(std::move(*m));
      }
      open = false;
      open_label.clear();
      surface.clear();
    };
    for (const auto& token : sentence["tokens"]) {
      if (!token.is_object()) throw Error(ErrorCode::AnnotatorProtocolError, "token is not an object");
      std::string word;
      if (token.contains("originalText") && token["originalText"].is_string()) {
        word = token["originalText"].get<std::string>();
      } else if (token.contains("word") && token["word"].is_string()) {
        word = token["word"].get<std::string>();
      } else {
        throw Error(ErrorCode::AnnotatorProtocolError, "token without word");
      }
      std::string label = token.contains("ner") && token["ner"].is_string() ? token["ner"].get<std::string>() : "O";
      if (label != open_label) close();
      auto cls = map_ner_label(label);
      if (!cls) continue;
      if (!open) {
        open = true;
        open_cls = *cls;
        open_label = label;
      }
      if (!surface.empty()) surface += ' ';
      surface += word;
    }
    close();
  }
  return out;
}

class NerServiceAnnotator final : public Annotator {
 public:
  NerServiceAnnotator(HttpClient& client, std::string endpoint, std::chrono::milliseconds timeout = std::chrono::seconds{60})
      : client_(client), endpoint_(std::move(endpoint)), timeout_(timeout) {}

  /// Request URL: endpoint plus the properties query selecting NER with
  /// JSON output.
  std::string request_url() const {
    static const std::string kProperties = R"({"annotators":"tokenize,ssplit,ner","outputFormat":"json"})";
    char sep = endpoint_.find('?') == std::string::npos ? '?' : '&';
    return endpoint_ + sep + "properties=" + url::encode_component(kProperties);
  }

  std::vector<EntityMention> annotate(const PlainDocument& doc) override {
    HttpRequest request;
    request.method = "POST";
    request.url = request_url();
    request.body = doc.plaintext;
    request.timeout = timeout_;
    request.max_body_size = 64 * 1024 * 1024;
    request.headers.emplace_back("Content-Type", "text/plain; charset=utf-8");
    request.headers.emplace_back("Accept", "application/json");
    HttpResponse response;
    try {
      response = client_.send(request);
    } catch (const Error& e) {
      throw Error(ErrorCode::AnnotatorUnreachable, endpoint_ + ": " + e.what());
    }
    if (response.status == 502 || response.status == 503 || response.status == 504)
      throw Error(ErrorCode::AnnotatorUnreachable, endpoint_ + " returned " + std::to_string(response.status));
    if (response.status != 200)
      throw Error(ErrorCode::AnnotatorProtocolError, endpoint_ + " returned " + std::to_string(response.status));
    return parse_ner_response(response.body);
  }

 private:
  HttpClient& client_;
  std::string endpoint_;
  std::chrono::milliseconds timeout_;
};

// ---------------------------------------------------------------------------
// Fixture import: JSON Lines, one {"url", "mentions": [{class, surface, tokens}]} per article.

inline EntityMention mention_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::AnnotatorProtocolError, "mention is not an object");
  auto cls = parse_entity_class(j.value("class", std::string{}));
  if (!cls) throw Error(ErrorCode::AnnotatorProtocolError, "unknown entity class " + j.value("class", std::string{}));
  EntityMention m;
  m.cls = *cls;
  m.surface = j.value("surface", std::string{});
  if (!j.contains("tokens") || !j["tokens"].is_array())
    throw Error(ErrorCode::AnnotatorProtocolError, "mention without tokens");
  for (const auto& t : j["tokens"]) {
    if (!t.is_string() || !is_valid_token(t.get<std::string>()))
      throw Error(ErrorCode::AnnotatorProtocolError, "malformed token in mention '" + m.surface + "'");
    m.tokens.push_back(t.get<std::string>());
  }
  if (m.tokens.empty()) throw Error(ErrorCode::AnnotatorProtocolError, "mention '" + m.surface + "' has no tokens");
  return m;
}

inline nlohmann::json mention_to_json(const EntityMention& m) {
  return {{"class", to_string(m.cls)}, {"surface", m.surface}, {"tokens", m.tokens}};
}

class FixtureAnnotator final : public Annotator {
 public:
  explicit FixtureAnnotator(std::map<std::string, std::vector<EntityMention>> records) : records_(std::move(records)) {}

  static FixtureAnnotator from_stream(std::istream& in) {
    std::map<std::string, std::vector<EntityMention>> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (normalize_whitespace(line).empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::AnnotatorProtocolError, "fixture line " + std::to_string(line_no) + ": " + e.what());
      }
      if (!j.is_object() || !j.contains("url") || !j["url"].is_string() || !j.contains("mentions") ||
          !j["mentions"].is_array())
        throw Error(ErrorCode::AnnotatorProtocolError, "fixture line " + std::to_string(line_no) + " lacks url/mentions");
      auto& mentions = records[j["url"].get<std::string>()];
      for (const auto& m : j["mentions"]) mentions.push_back(mention_from_json(m));
    }
    return FixtureAnnotator(std::move(records));
  }

  static FixtureAnnotator from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::AnnotatorUnreachable, "cannot open fixture file " + path);
    return from_stream(in);
  }

  std::vector<EntityMention> annotate(const PlainDocument& doc) override {
    auto it = records_.find(doc.article_ref.url);
    if (it == records_.end()) throw Error(ErrorCode::AnnotatorProtocolError, "no fixture record for " + doc.article_ref.url);
    return it->second;
  }

 private:
  std::map<std::string, std::vector<EntityMention>> records_;
};

inline std::unique_ptr<Annotator> make_annotator(const AnnotatorBackend& backend, HttpClient& client) {
  switch (backend.kind) {
    case AnnotatorBackend::Kind::NerService:
      if (backend.endpoint.empty()) throw Error(ErrorCode::ConfigInvalid, "ner-service backend needs an endpoint");
      return std::make_unique<NerServiceAnnotator>(client, backend.endpoint, backend.timeout);
    case AnnotatorBackend::Kind::Heuristic:
      return std::make_unique<HeuristicAnnotator>();
    case AnnotatorBackend::Kind::FixtureImport:
      return std::make_unique<FixtureAnnotator>(FixtureAnnotator::from_file(backend.fixture_path));
  }
  throw Error(ErrorCode::ConfigInvalid, "unknown annotator backend");
}

// ---------------------------------------------------------------------------
// Operations

/// Recognizer mentions restricted to the seven NER classes.
inline std::vector<EntityMention> annotate_entities(const PlainDocument& doc, Annotator& annotator) {
  if (normalize_whitespace(doc.plaintext).empty())
    throw Error(ErrorCode::InvalidArgument, "cannot annotate an empty document");
  std::vector<EntityMention> mentions = annotator.annotate(doc);
  std::erase_if(mentions, [](const EntityMention& m) { return !is_ner_class(m.cls) || m.tokens.empty(); });
  return mentions;
}

inline std::vector<EntityMention> derive_title_terms(const PlainDocument& doc) {
  std::vector<EntityMention> out;
  std::vector<std::string> seen;
  for (auto word : split_words(doc.title)) {
    std::string token = normalize_token(word);
    if (token.empty() || is_stopword(token)) continue;
    if (std::find(seen.begin(), seen.end(), token) != seen.end()) continue;
    seen.push_back(token);
    out.push_back({EntityClass::Title, std::string(word), {token}});
  }
  return out;
}

/// The k most frequent non-stopword tokens of the body; ties go to the
/// lexicographically smaller token.
inline std::vector<EntityMention> derive_top_k_terms(const PlainDocument& doc, int k = 10) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  std::map<std::string, int> counts;
  for (auto& token : tokenize(doc.plaintext)) {
    if (!is_stopword(token)) ++counts[token];
  }
  std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > static_cast<std::size_t>(k)) ranked.resize(static_cast<std::size_t>(k));
  std::vector<EntityMention> out;
  for (auto& [token, count] : ranked) out.push_back({EntityClass::TopKTerm, token, {token}});
  return out;
}

inline EntitySet build_entity_set(const PlainDocument& doc, Annotator& annotator, int k = 10) {
  EntitySet set;
  set.article_ref = doc.article_ref;
  set.mentions = annotate_entities(doc, annotator);
  for (auto& m : derive_title_terms(doc)) set.mentions.push_back(std::move(m));
  for (auto& m : derive_top_k_terms(doc, k)) set.mentions.push_back(std::move(m));
  set.token_set = tokens_of(set.mentions);
  return set;
}

}  // namespace storygraph
