// SPDX-License-Identifier: Apache-2.0
#pragma once

// Lenient tag-soup tokenizer shared by the feed parser and the HTML
// extractor. It never fails: anything that does not look like markup is
// text, and unterminated constructs run to end of input.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "storygraph/text.hpp"

namespace storygraph::markup {

enum class Mode { Xml, Html };

enum class TokenKind { StartTag, EndTag, Text, Comment };

struct Attribute {
  std::string name;  // lowercased
  std::string value; // entity-decoded
};

struct Token {
  TokenKind kind = TokenKind::Text;
  std::string name;  // lowercased tag name for StartTag/EndTag
  std::vector<Attribute> attrs;
  bool self_closing = false;
  std::string text;  // decoded character data for Text
  bool cdata = false;

  const std::string* attr(std::string_view key) const {
    for (const auto& a : attrs) {
      if (a.name == key) return &a.value;
    }
    return nullptr;
  }
};

namespace detail {

struct NamedEntity {
  std::string_view name;
  char32_t cp;
};

// Sorted by name for binary search.
inline constexpr std::array<NamedEntity, 40> kNamedEntities = {{
    {"AMP", '&'},     {"GT", '>'},      {"LT", '<'},      {"QUOT", '"'},    {"amp", '&'},     {"apos", '\''},
    {"bull", 0x2022}, {"cent", 0xA2},   {"copy", 0xA9},   {"deg", 0xB0},    {"eacute", 0xE9}, {"euro", 0x20AC},
    {"gt", '>'},      {"hellip", 0x2026}, {"iexcl", 0xA1}, {"laquo", 0xAB},  {"ldquo", 0x201C}, {"lsaquo", 0x2039},
    {"lsquo", 0x2018}, {"lt", '<'},     {"mdash", 0x2014}, {"middot", 0xB7}, {"nbsp", 0xA0},   {"ndash", 0x2013},
    {"ntilde", 0xF1}, {"para", 0xB6},   {"pound", 0xA3},  {"quot", '"'},    {"raquo", 0xBB},  {"rdquo", 0x201D},
    {"reg", 0xAE},    {"rsaquo", 0x203A}, {"rsquo", 0x2019}, {"sbquo", 0x201A}, {"sect", 0xA7}, {"shy", 0xAD},
    {"thinsp", 0x2009}, {"trade", 0x2122}, {"uuml", 0xFC}, {"yen", 0xA5},
}};

inline std::optional<char32_t> lookup_entity(std::string_view name) {
  auto it = std::lower_bound(kNamedEntities.begin(), kNamedEntities.end(), name,
                             [](const NamedEntity& e, std::string_view n) { return e.name < n; });
  if (it != kNamedEntities.end() && it->name == name) return it->cp;
  return std::nullopt;
}

inline bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }

inline bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == ':' || c == '-' || c == '_' || c == '.';
}

inline bool istarts_with(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (s.size() - pos < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[pos + i])) != std::tolower(static_cast<unsigned char>(prefix[i])))
      return false;
  }
  return true;
}

inline std::size_t ifind(std::string_view s, std::string_view needle, std::size_t from) {
  for (std::size_t i = from; i + needle.size() <= s.size(); ++i) {
    if (istarts_with(s, i, needle)) return i;
  }
  return std::string_view::npos;
}

}  // namespace detail

/// Decodes character references. Bare ampersands that do not start a known
/// reference are kept literally.
inline std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c != '&') {
      out.push_back(c);
      ++i;
      continue;
    }
    std::size_t semi = s.find(';', i + 1);
    if (semi != std::string_view::npos && semi - i <= 12) {
      std::string_view ref = s.substr(i + 1, semi - i - 1);
      std::optional<char32_t> cp;
      if (!ref.empty() && ref[0] == '#') {
        std::string_view digits = ref.substr(1);
        int base = 10;
        if (!digits.empty() && (digits[0] == 'x' || digits[0] == 'X')) {
          base = 16;
          digits.remove_prefix(1);
        }
        unsigned long value = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value, base);
        if (!digits.empty() && ec == std::errc{} && ptr == digits.data() + digits.size()) {
          bool valid = value > 0 && value <= 0x10FFFF && !(value >= 0xD800 && value <= 0xDFFF);
          cp = valid ? static_cast<char32_t>(value) : utf8::kReplacement;
        }
      } else {
        cp = detail::lookup_entity(ref);
      }
      if (cp) {
        utf8::append(out, *cp);
        i = semi + 1;
        continue;
      }
    }
    out.push_back('&');
    ++i;
  }
  return out;
}

inline bool is_void_element(std::string_view name) {
  static constexpr std::array<std::string_view, 14> kVoid = {"area", "base", "br",   "col",   "embed",  "hr",    "img",
                                                             "input", "link", "meta", "param", "source", "track", "wbr"};
  return std::find(kVoid.begin(), kVoid.end(), name) != kVoid.end();
}

namespace detail {

class Lexer {
 public:
  Lexer(std::string_view doc, Mode mode) : s_(doc), mode_(mode) {}

  std::vector<Token> run() {
    std::size_t text_start = 0;
    while (pos_ < s_.size()) {
      if (s_[pos_] != '<') {
        ++pos_;
        continue;
      }
      std::size_t lt = pos_;
      std::optional<Token> tok = markup_at(lt);
      if (!tok) {
        ++pos_;
        continue;
      }
      flush_text(text_start, lt);
      bool raw = tok->kind == TokenKind::StartTag && !tok->self_closing && mode_ == Mode::Html &&
                 (tok->name == "script" || tok->name == "style" || tok->name == "textarea" || tok->name == "title");
      std::string name = tok->name;
      out_.push_back(std::move(*tok));
      if (raw) consume_raw_text(name);
      text_start = pos_;
    }
    flush_text(text_start, s_.size());
    return std::move(out_);
  }

 private:
  void flush_text(std::size_t from, std::size_t to) {
    if (to <= from) return;
    Token t;
    t.kind = TokenKind::Text;
    t.text = decode_entities(s_.substr(from, to - from));
    out_.push_back(std::move(t));
  }

  // Script/style bodies run to the matching close tag; title/textarea are
  // decoded as text.
  void consume_raw_text(const std::string& name) {
    std::string closer = "</" + name;
    std::size_t end = ifind(s_, closer, pos_);
    if (end == std::string_view::npos) end = s_.size();
    Token t;
    t.kind = TokenKind::Text;
    std::string_view body = s_.substr(pos_, end - pos_);
    t.text = (name == "title" || name == "textarea") ? decode_entities(body) : std::string(body);
    if (!t.text.empty()) out_.push_back(std::move(t));
    pos_ = end;
  }

  std::optional<Token> markup_at(std::size_t lt) {
    std::string_view rest = s_.substr(lt);
    if (rest.starts_with("<!--")) {
      std::size_t end = s_.find("-->", lt + 4);
      Token t;
      t.kind = TokenKind::Comment;
      pos_ = end == std::string_view::npos ? s_.size() : end + 3;
      return t;
    }
    if (istarts_with(s_, lt, "<![CDATA[")) {
      std::size_t end = s_.find("]]>", lt + 9);
      Token t;
      t.kind = TokenKind::Text;
      t.cdata = true;
      std::size_t stop = end == std::string_view::npos ? s_.size() : end;
      t.text = std::string(s_.substr(lt + 9, stop - lt - 9));
      pos_ = end == std::string_view::npos ? s_.size() : end + 3;
      return t;
    }
    if (rest.starts_with("<!") || rest.starts_with("<?")) {
      std::size_t end = s_.find('>', lt + 2);
      Token t;
      t.kind = TokenKind::Comment;
      pos_ = end == std::string_view::npos ? s_.size() : end + 1;
      return t;
    }
    if (rest.size() >= 3 && rest[1] == '/' && is_name_start(rest[2])) {
      std::size_t p = lt + 2;
      std::size_t name_start = p;
      while (p < s_.size() && is_name_char(s_[p])) ++p;
      Token t;
      t.kind = TokenKind::EndTag;
      t.name = ascii_lower(s_.substr(name_start, p - name_start));
      std::size_t end = s_.find('>', p);
      pos_ = end == std::string_view::npos ? s_.size() : end + 1;
      return t;
    }
    if (rest.size() >= 2 && is_name_start(rest[1])) return start_tag(lt);
    return std::nullopt;
  }

  Token start_tag(std::size_t lt) {
    std::size_t p = lt + 1;
    std::size_t name_start = p;
    while (p < s_.size() && is_name_char(s_[p])) ++p;
    Token t;
    t.kind = TokenKind::StartTag;
    t.name = ascii_lower(s_.substr(name_start, p - name_start));
    auto skip_ws = [&] {
      while (p < s_.size() && std::isspace(static_cast<unsigned char>(s_[p]))) ++p;
    };
    while (true) {
      skip_ws();
      if (p >= s_.size()) break;
      char c = s_[p];
      if (c == '>') {
        ++p;
        break;
      }
      if (c == '/') {
        ++p;
        skip_ws();
        if (p < s_.size() && s_[p] == '>') {
          t.self_closing = true;
          ++p;
          break;
        }
        continue;
      }
      if (c == '<') break;  // tag never closed; let the next tag start here
      std::size_t an = p;
      while (p < s_.size() && !std::isspace(static_cast<unsigned char>(s_[p])) && s_[p] != '=' && s_[p] != '>' &&
             s_[p] != '/' && s_[p] != '<')
        ++p;
      if (p == an) {
        ++p;
        continue;
      }
      Attribute attr;
      attr.name = ascii_lower(s_.substr(an, p - an));
      skip_ws();
      if (p < s_.size() && s_[p] == '=') {
        ++p;
        skip_ws();
        if (p < s_.size() && (s_[p] == '"' || s_[p] == '\'')) {
          char q = s_[p++];
          std::size_t close = s_.find(q, p);
          std::size_t gt = s_.find('>', p);
          // An unterminated quote ends at the tag's closing bracket.
          if (close == std::string_view::npos) close = gt == std::string_view::npos ? s_.size() : gt;
          attr.value = decode_entities(s_.substr(p, close - p));
          p = close < s_.size() && s_[close] == q ? close + 1 : close;
        } else {
          std::size_t vs = p;
          while (p < s_.size() && !std::isspace(static_cast<unsigned char>(s_[p])) && s_[p] != '>') ++p;
          attr.value = decode_entities(s_.substr(vs, p - vs));
        }
      }
      t.attrs.push_back(std::move(attr));
    }
    pos_ = p;
    if (mode_ == Mode::Html && is_void_element(t.name)) t.self_closing = true;
    return t;
  }

  std::string_view s_;
  Mode mode_;
  std::size_t pos_ = 0;
  std::vector<Token> out_;
};

}  // namespace detail

inline std::vector<Token> tokenize(std::string_view doc, Mode mode) { return detail::Lexer(doc, mode).run(); }

}  // namespace storygraph::markup
