// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "storygraph/error.hpp"
#include "storygraph/feed_ingest.hpp"
#include "storygraph/markup.hpp"
#include "storygraph/text.hpp"
#include "storygraph/time.hpp"

namespace storygraph {

struct PlainDocument {
  ArticleRef article_ref;
  std::string title;
  std::string plaintext;  // one normalized line per content block
  std::optional<UtcTime> published;
};

namespace charset {

inline std::string label_from_content_type(std::string_view content_type) {
  std::string lower = ascii_lower(content_type);
  auto pos = lower.find("charset=");
  if (pos == std::string::npos) return {};
  std::string_view v = std::string_view(lower).substr(pos + 8);
  if (!v.empty() && (v.front() == '"' || v.front() == '\'')) v.remove_prefix(1);
  auto end = v.find_first_of("\"'; \t");
  return std::string(v.substr(0, end));
}

inline std::string label_from_meta(std::string_view body) {
  // Only the head matters; 8 KiB is generous.
  auto tokens = markup::tokenize(body.substr(0, 8192), markup::Mode::Html);
  for (const auto& t : tokens) {
    if (t.kind != markup::TokenKind::StartTag || t.name != "meta") continue;
    if (const auto* cs = t.attr("charset")) return ascii_lower(normalize_whitespace(*cs));
    const auto* equiv = t.attr("http-equiv");
    const auto* content = t.attr("content");
    if (equiv && content && ascii_lower(*equiv) == "content-type") {
      auto label = label_from_content_type(*content);
      if (!label.empty()) return label;
    }
  }
  return {};
}

// Code points for bytes 0x80..0x9F under windows-1252; the rest match Latin-1.
inline constexpr std::array<char32_t, 32> kWindows1252High = {
    0x20AC, 0xFFFD, 0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021, 0x02C6, 0x2030, 0x0160,
    0x2039, 0x0152, 0xFFFD, 0x017D, 0xFFFD, 0xFFFD, 0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
    0x2013, 0x2014, 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0xFFFD, 0x017E, 0x0178};

/// Converts body to UTF-8 given a charset label. Unknown labels are
/// treated as UTF-8; invalid sequences become U+FFFD.
inline std::string to_utf8(std::string_view body, std::string_view label) {
  bool single_byte = label == "iso-8859-1" || label == "latin1" || label == "latin-1" || label == "iso8859-1" ||
                     label == "windows-1252" || label == "cp1252" || label == "us-ascii" || label == "ascii";
  if (!single_byte) return utf8::sanitize(body);
  std::string out;
  out.reserve(body.size());
  for (unsigned char c : body) {
    char32_t cp = c;
    if (c >= 0x80 && c < 0xA0) cp = kWindows1252High[c - 0x80];
    utf8::append(out, cp);
  }
  return out;
}

/// HTTP header, then meta charset, then UTF-8.
inline std::string decode_body(std::string_view body, std::string_view content_type) {
  std::string label = label_from_content_type(content_type);
  if (label.empty()) label = label_from_meta(body);
  return to_utf8(body, label);
}

}  // namespace charset

/// Pluggable main-content extractor.
class ContentExtractor {
 public:
  virtual ~ContentExtractor() = default;
  virtual PlainDocument extract(const RawDocument& doc) const = 0;
};

/// Text-density extractor. Each block-level region is scored by
/// length × (1 − link fraction); the output is the contiguous run of blocks
/// maximizing Σ(score − block_penalty), or the single best block when no
/// run is positive.
class DensityExtractor final : public ContentExtractor {
 public:
  struct Block {
    std::string text;
    std::size_t length = 0;
    std::size_t link_length = 0;
    bool heading = false;  // text of an h1..h6 element

    double link_fraction() const { return length == 0 ? 0.0 : static_cast<double>(link_length) / length; }
    double score() const { return static_cast<double>(length) * (1.0 - link_fraction()); }
  };

  struct Parsed {
    std::vector<Block> blocks;
    std::string og_title;
    std::string h1;
    std::string title;
    std::string published_meta;
  };

  explicit DensityExtractor(double block_penalty = 40.0) : block_penalty_(block_penalty) {}

  PlainDocument extract(const RawDocument& doc) const override {
    std::string html = charset::decode_body(doc.body, doc.content_type);
    Parsed parsed = parse(html);

    PlainDocument out;
    out.article_ref = doc.article_ref;
    out.plaintext = select(parsed.blocks);
    if (out.plaintext.empty()) throw Error(ErrorCode::NoContent, doc.article_ref.url + ": no main content found");

    for (const std::string* candidate : std::initializer_list<const std::string*>{&parsed.og_title, &parsed.h1, &parsed.title, &doc.article_ref.feed_title}) {
      if (!candidate->empty()) {
        out.title = normalize_whitespace(*candidate);
        break;
      }
    }
    if (!parsed.published_meta.empty()) out.published = parse_timestamp(normalize_whitespace(parsed.published_meta));
    if (!out.published) out.published = doc.article_ref.feed_published;
    return out;
  }

  /// Splits decoded HTML into scored blocks and collects head metadata.
  static Parsed parse(std::string_view html) {
    Parsed p;
    std::string text, link_text;
    std::string skip_tag;
    int skip_depth = 0;
    int link_depth = 0;
    bool in_title = false, in_h1 = false, h1_done = false, in_heading = false;

    auto flush = [&] {
      Block b;
      b.text = normalize_whitespace(text);
      if (!b.text.empty()) {
        b.length = b.text.size();
        b.link_length = std::min(b.length, normalize_whitespace(link_text).size());
        b.heading = in_heading;
        p.blocks.push_back(std::move(b));
      }
      text.clear();
      link_text.clear();
    };

    for (const auto& t : markup::tokenize(html, markup::Mode::Html)) {
      if (skip_depth > 0) {
        if (t.kind == markup::TokenKind::StartTag && t.name == skip_tag && !t.self_closing) ++skip_depth;
        if (t.kind == markup::TokenKind::EndTag && t.name == skip_tag) --skip_depth;
        continue;
      }
      switch (t.kind) {
        case markup::TokenKind::StartTag:
          if (t.name == "meta") {
            read_meta(t, p);
            break;
          }
          if (t.name == "title") {
            in_title = true;
            break;
          }
          if (!t.self_closing && (is_skipped(t.name) || is_byline(t))) {
            skip_tag = t.name;
            skip_depth = 1;
            break;
          }
          if (t.name == "h1" && !h1_done) in_h1 = true;
          if (t.name == "a" && !t.self_closing) ++link_depth;
          if (is_block(t.name)) flush();
          if (is_heading(t.name) && !t.self_closing) in_heading = true;
          break;
        case markup::TokenKind::EndTag:
          if (t.name == "title") in_title = false;
          if (t.name == "h1" && in_h1) {
            in_h1 = false;
            h1_done = !normalize_whitespace(p.h1).empty();
          }
          if (t.name == "a" && link_depth > 0) --link_depth;
          if (is_block(t.name)) flush();
          if (is_heading(t.name)) in_heading = false;
          break;
        case markup::TokenKind::Text:
          if (in_title) {
            if (p.title.empty()) p.title = t.text;
            break;
          }
          if (in_h1) p.h1 += t.text;
          text += t.text;
          if (link_depth > 0) {
            link_text += t.text;
          } else if (normalize_whitespace(t.text).empty()) {
            link_text += ' ';  // keeps "<a>x</a> <a>y</a>" entirely link text
          }
          break;
        case markup::TokenKind::Comment:
          break;
      }
    }
    flush();
    return p;
  }

  /// Maximum-sum contiguous run of (score − penalty); blocks are joined
  /// with newlines. A headline directly above the run belongs to it even
  /// when it is too short to pay its own penalty.
  std::string select(const std::vector<Block>& blocks) const {
    double best = 0.0, running = 0.0;
    std::size_t best_begin = 0, best_end = 0, run_begin = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      double v = blocks[i].score() - block_penalty_;
      if (running <= 0.0) {
        running = v;
        run_begin = i;
      } else {
        running += v;
      }
      if (running > best) {
        best = running;
        best_begin = run_begin;
        best_end = i + 1;
      }
    }
    if (best_end == best_begin) {
      // Nothing beats the penalty: fall back to the densest single block
      // that is mostly plain text.
      double top = 0.0;
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i].link_fraction() < 0.5 && blocks[i].score() > top) {
          top = blocks[i].score();
          best_begin = i;
          best_end = i + 1;
        }
      }
    }
    if (best_end > best_begin && best_begin > 0) {
      const Block& above = blocks[best_begin - 1];
      if (above.heading && above.link_fraction() < 0.5) --best_begin;
    }
    std::string out;
    for (std::size_t i = best_begin; i < best_end; ++i) {
      if (!out.empty()) out += '\n';
      out += blocks[i].text;
    }
    return out;
  }

 private:
  static bool is_block(std::string_view name) {
    static constexpr std::array<std::string_view, 38> kBlock = {
        "address", "article", "aside", "blockquote", "body", "br",    "caption", "dd",     "details", "div",
        "dl",      "dt",      "fieldset", "figcaption", "figure", "footer", "h1",  "h2",     "h3",      "h4",
        "h5",      "h6",      "header", "hr",     "li",    "main",  "nav",     "ol",     "p",       "pre",
        "section", "summary", "table",  "tbody",  "td",    "th",    "tr",      "ul"};
    return std::find(kBlock.begin(), kBlock.end(), name) != kBlock.end();
  }

  static bool is_heading(std::string_view name) {
    return name.size() == 2 && name[0] == 'h' && name[1] >= '1' && name[1] <= '6';
  }

  static bool is_skipped(std::string_view name) {
    static constexpr std::array<std::string_view, 11> kSkip = {"script", "style", "noscript", "template", "svg", "iframe",
                                                               "select", "button", "object", "canvas", "textarea"};
    return std::find(kSkip.begin(), kSkip.end(), name) != kSkip.end();
  }

  // Author/byline containers are dropped outright.
  static bool is_byline(const markup::Token& t) {
    for (const char* key : {"class", "id"}) {
      if (const auto* v = t.attr(key)) {
        std::string lower = ascii_lower(*v);
        if (lower.find("byline") != std::string::npos) return true;
      }
    }
    if (const auto* rel = t.attr("rel"); rel && ascii_lower(*rel) == "author") return true;
    if (const auto* prop = t.attr("itemprop"); prop && ascii_lower(*prop) == "author") return true;
    return false;
  }

  static void read_meta(const markup::Token& t, Parsed& p) {
    const std::string* content = t.attr("content");
    if (!content) return;
    for (const char* key : {"property", "name", "itemprop"}) {
      const std::string* k = t.attr(key);
      if (!k) continue;
      std::string name = ascii_lower(*k);
      if (name == "og:title" && p.og_title.empty()) p.og_title = *content;
      if ((name == "article:published_time" || name == "datepublished") && p.published_meta.empty())
        p.published_meta = *content;
    }
  }

  double block_penalty_;
};

/// Default extraction used by the pipeline.
inline PlainDocument strip_boilerplate(const RawDocument& doc) { return DensityExtractor{}.extract(doc); }

}  // namespace storygraph
