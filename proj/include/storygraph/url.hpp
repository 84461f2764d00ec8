// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "storygraph/text.hpp"

namespace storygraph::url {

struct Parts {
  std::string scheme;  // lowercased, without ':'
  std::optional<std::string> authority;
  std::string path;
  std::optional<std::string> query;
  std::optional<std::string> fragment;
};

/// Splits a URI reference into its five components.
inline Parts split(std::string_view ref) {
  Parts p;
  std::size_t colon = ref.find(':');
  std::size_t first_delim = ref.find_first_of("/?#");
  if (colon != std::string_view::npos && colon > 0 && (first_delim == std::string_view::npos || colon < first_delim)) {
    bool valid = std::isalpha(static_cast<unsigned char>(ref[0]));
    for (std::size_t i = 1; i < colon && valid; ++i) {
      char c = ref[i];
      valid = std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
    }
    if (valid) {
      p.scheme = ascii_lower(ref.substr(0, colon));
      ref.remove_prefix(colon + 1);
    }
  }
  if (auto hash = ref.find('#'); hash != std::string_view::npos) {
    p.fragment = std::string(ref.substr(hash + 1));
    ref = ref.substr(0, hash);
  }
  if (auto q = ref.find('?'); q != std::string_view::npos) {
    p.query = std::string(ref.substr(q + 1));
    ref = ref.substr(0, q);
  }
  if (ref.starts_with("//")) {
    ref.remove_prefix(2);
    std::size_t slash = ref.find('/');
    p.authority = std::string(ref.substr(0, slash));
    ref = slash == std::string_view::npos ? std::string_view{} : ref.substr(slash);
  }
  p.path = std::string(ref);
  return p;
}

inline std::string join(const Parts& p) {
  std::string out;
  if (!p.scheme.empty()) out += p.scheme + ":";
  if (p.authority) out += "//" + *p.authority;
  out += p.path;
  if (p.query) out += "?" + *p.query;
  if (p.fragment) out += "#" + *p.fragment;
  return out;
}

inline std::string remove_dot_segments(std::string_view path) {
  std::vector<std::string_view> segments;
  bool absolute = path.starts_with("/");
  std::size_t i = absolute ? 1 : 0;
  bool trailing_slash = false;
  while (i <= path.size()) {
    std::size_t slash = path.find('/', i);
    std::string_view seg = path.substr(i, slash == std::string_view::npos ? std::string_view::npos : slash - i);
    trailing_slash = false;
    if (seg == "..") {
      if (!segments.empty()) segments.pop_back();
      trailing_slash = true;
    } else if (seg == ".") {
      trailing_slash = true;
    } else {
      segments.push_back(seg);
    }
    if (slash == std::string_view::npos) break;
    i = slash + 1;
  }
  std::string out = absolute ? "/" : "";
  for (std::size_t k = 0; k < segments.size(); ++k) {
    if (k > 0) out += '/';
    out += segments[k];
  }
  if (trailing_slash && !out.empty() && out.back() != '/') out += '/';
  return out;
}

/// Resolves a (possibly relative) reference against an absolute base URL.
inline std::string resolve(std::string_view base, std::string_view reference) {
  Parts r = split(reference);
  Parts b = split(base);
  Parts t;
  if (!r.scheme.empty()) {
    t = r;
    t.path = remove_dot_segments(r.path);
    return join(t);
  }
  t.scheme = b.scheme;
  if (r.authority) {
    t.authority = r.authority;
    t.path = remove_dot_segments(r.path);
    t.query = r.query;
  } else {
    t.authority = b.authority;
    if (r.path.empty()) {
      t.path = b.path;
      t.query = r.query ? r.query : b.query;
    } else {
      if (r.path.starts_with("/")) {
        t.path = remove_dot_segments(r.path);
      } else {
        std::string merged;
        if (b.authority && b.path.empty()) {
          merged = "/" + r.path;
        } else {
          auto slash = b.path.rfind('/');
          merged = (slash == std::string::npos ? std::string{} : b.path.substr(0, slash + 1)) + r.path;
        }
        t.path = remove_dot_segments(merged);
      }
      t.query = r.query;
    }
  }
  t.fragment = r.fragment;
  return join(t);
}

inline bool is_http(std::string_view u) {
  Parts p = split(u);
  return (p.scheme == "http" || p.scheme == "https") && p.authority && !p.authority->empty();
}

/// Lowercased host without userinfo or port; "" when there is none.
inline std::string host(std::string_view u) {
  Parts p = split(u);
  if (!p.authority) return {};
  std::string_view a = *p.authority;
  if (auto at = a.rfind('@'); at != std::string_view::npos) a.remove_prefix(at + 1);
  if (a.starts_with("[")) {
    auto close = a.find(']');
    return ascii_lower(a.substr(0, close == std::string_view::npos ? a.size() : close + 1));
  }
  if (auto colon = a.find(':'); colon != std::string_view::npos) a = a.substr(0, colon);
  return ascii_lower(a);
}

/// Percent-encodes everything outside the RFC 3986 unreserved set.
inline std::string encode_component(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

}  // namespace storygraph::url
