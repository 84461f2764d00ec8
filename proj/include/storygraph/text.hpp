// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace storygraph {

namespace utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Decodes one code point starting at s[i] and advances i. Malformed
/// sequences decode to U+FFFD and consume a single byte.
inline char32_t decode(std::string_view s, std::size_t& i) {
  auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  unsigned char b0 = byte(i);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  std::size_t len = b0 >= 0xF0 && b0 < 0xF5 ? 4 : b0 >= 0xE0 ? 3 : b0 >= 0xC2 && b0 < 0xE0 ? 2 : 0;
  if (len == 0 || i + len > s.size()) {
    ++i;
    return kReplacement;
  }
  char32_t cp = b0 & (0xFF >> (len + 1));
  for (std::size_t k = 1; k < len; ++k) {
    unsigned char b = byte(i + k);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return kReplacement;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr std::array<char32_t, 5> kMin = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++i;
    return kReplacement;
  }
  i += len;
  return cp;
}

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

/// Re-encodes s, replacing every malformed sequence with U+FFFD.
inline std::string sanitize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) append(out, decode(s, i));
  return out;
}

}  // namespace utf8

inline bool is_space_cp(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' || cp == 0xA0 ||
         (cp >= 0x2000 && cp <= 0x200B) || cp == 0x202F || cp == 0x205F || cp == 0x3000 || cp == 0xFEFF;
}

// Characters that split words as well as separating them from neighbours.
inline bool is_word_separator_cp(char32_t cp) {
  return is_space_cp(cp) || cp == '-' || cp == '/' || cp == '|' || cp == 0x2010 || cp == 0x2011 || cp == 0x2012 ||
         cp == 0x2013 || cp == 0x2014 || cp == 0x2015 || cp == 0x2026;
}

inline bool is_punct_cp(char32_t cp) {
  if (cp < 0x80) return cp < 0x30 || (cp >= 0x3A && cp <= 0x40) || (cp >= 0x5B && cp <= 0x60) || cp >= 0x7B;
  return (cp >= 0x2016 && cp <= 0x205E) || cp == 0xAB || cp == 0xBB || cp == 0xA1 || cp == 0xBF || cp == 0xB7 ||
         cp == 0xA7 || cp == 0xB6 || cp == 0xA9 || cp == 0xAE || cp == utf8::kReplacement;
}

/// Collapses every whitespace run to one ASCII space and trims both ends.
inline std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t start = i;
    char32_t cp = utf8::decode(s, i);
    if (is_space_cp(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    if (cp == utf8::kReplacement && !(i - start == 3 && s.substr(start, 3) == "\xEF\xBF\xBD")) {
      utf8::append(out, cp);
    } else {
      out.append(s.substr(start, i - start));
    }
  }
  return out;
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

/// Normalizes one whitespace-free word: possessive suffix dropped,
/// punctuation removed, ASCII letters lowercased. May return "".
inline std::string normalize_token(std::string_view word) {
  // Possessive: 's / ’s at the end.
  for (std::string_view suffix : {std::string_view{"'s"}, std::string_view{"\xE2\x80\x99s"}}) {
    if (word.size() > suffix.size() && ascii_lower(word.substr(word.size() - suffix.size())) == suffix) {
      word.remove_suffix(suffix.size());
      break;
    }
  }

  std::string out;
  out.reserve(word.size());
  for (std::size_t i = 0; i < word.size();) {
    std::size_t start = i;
    char32_t cp = utf8::decode(word, i);
    if (is_punct_cp(cp) || is_word_separator_cp(cp)) continue;
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp >= 'A' && cp <= 'Z' ? cp - 'A' + 'a' : cp));
    } else {
      out.append(word.substr(start, i - start));
    }
  }
  return out;
}

/// Splits text into raw words on whitespace, hyphens, slashes, and dashes.
inline std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t word_start = std::string_view::npos;
  for (std::size_t i = 0; i < text.size();) {
    std::size_t start = i;
    char32_t cp = utf8::decode(text, i);
    if (is_word_separator_cp(cp)) {
      if (word_start != std::string_view::npos) words.push_back(text.substr(word_start, start - word_start));
      word_start = std::string_view::npos;
    } else if (word_start == std::string_view::npos) {
      word_start = start;
    }
  }
  if (word_start != std::string_view::npos) words.push_back(text.substr(word_start));
  return words;
}

/// Lowercase, punctuation-stripped tokens in text order (duplicates kept).
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  for (auto word : split_words(text)) {
    auto token = normalize_token(word);
    if (!token.empty()) tokens.push_back(std::move(token));
  }
  return tokens;
}

// English stopword list, version 1. Changing it changes TITLE and TOP-K-TERM
// output, so bump kStopwordListVersion with any edit.
inline constexpr int kStopwordListVersion = 1;
inline constexpr std::array<std::string_view, 180> kStopwords = {
    "a",       "about",    "above",   "after",   "again",   "against", "ain",      "all",      "am",
    "an",      "and",      "any",     "are",     "aren",    "arent",   "as",       "at",       "be",
    "because", "been",     "before",  "being",   "below",   "between", "both",     "but",      "by",
    "can",     "couldn",   "couldnt", "d",       "did",     "didn",    "didnt",    "do",       "does",
    "doesn",   "doesnt",   "doing",   "don",     "dont",    "down",    "during",   "each",     "few",
    "for",     "from",     "further", "had",     "hadn",    "hadnt",   "has",      "hasn",     "hasnt",
    "have",    "haven",    "havent",  "having",  "he",      "her",     "here",     "hers",     "herself",
    "him",     "himself",  "his",     "how",     "i",       "if",      "in",       "into",     "is",
    "isn",     "isnt",     "it",      "its",     "itself",  "just",    "ll",       "m",        "ma",
    "me",      "mightn",   "mightnt", "more",    "most",    "mustn",   "mustnt",   "my",       "myself",
    "needn",   "neednt",   "no",      "nor",     "not",     "now",     "o",        "of",       "off",
    "on",      "once",     "only",    "or",      "other",   "our",     "ours",     "ourselves", "out",
    "over",    "own",      "re",      "s",       "same",    "shan",    "shant",    "she",      "shes",
    "should",  "shouldn",  "shouldnt", "shouldve", "so",    "some",    "such",     "t",        "than",
    "that",    "thatll",   "the",     "their",   "theirs",  "them",    "themselves", "then",   "there",
    "these",   "they",     "this",    "those",   "through", "to",      "too",      "under",    "until",
    "up",      "ve",       "very",    "was",     "wasn",    "wasnt",   "we",       "were",     "weren",
    "werent",  "what",     "when",    "where",   "which",   "while",   "who",      "whom",     "why",
    "will",    "with",     "won",     "wont",    "wouldn",  "wouldnt", "y",        "you",      "youd",
    "youll",   "your",     "youre",   "yours",   "yourself", "yourselves", "youve", "said",    "says",
};

inline bool is_stopword(std::string_view token) {
  static const std::vector<std::string_view> sorted = [] {
    std::vector<std::string_view> v(kStopwords.begin(), kStopwords.end());
    std::sort(v.begin(), v.end());
    return v;
  }();
  return std::binary_search(sorted.begin(), sorted.end(), token);
}

}  // namespace storygraph
