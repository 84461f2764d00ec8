// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace storygraph {

/// Sorted, duplicate-free set of normalized tokens. This is the article
/// representation similarity works on.
class TokenSet {
 public:
  TokenSet() = default;

  explicit TokenSet(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    std::sort(tokens_.begin(), tokens_.end());
    tokens_.erase(std::unique(tokens_.begin(), tokens_.end()), tokens_.end());
  }

  TokenSet(std::initializer_list<std::string_view> tokens)
      : TokenSet(std::vector<std::string>(tokens.begin(), tokens.end())) {}

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  auto begin() const noexcept { return tokens_.begin(); }
  auto end() const noexcept { return tokens_.end(); }
  const std::vector<std::string>& items() const noexcept { return tokens_; }

  bool contains(std::string_view token) const {
    return std::binary_search(tokens_.begin(), tokens_.end(), token, std::less<>{});
  }

  void merge(const TokenSet& other) {
    std::vector<std::string> out;
    out.reserve(tokens_.size() + other.tokens_.size());
    std::set_union(tokens_.begin(), tokens_.end(), other.tokens_.begin(), other.tokens_.end(), std::back_inserter(out));
    tokens_ = std::move(out);
  }

  bool operator==(const TokenSet&) const = default;

 private:
  std::vector<std::string> tokens_;
};

inline std::size_t intersection_size(const TokenSet& a, const TokenSet& b) {
  std::size_t n = 0;
  auto i = a.begin(), j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace storygraph
