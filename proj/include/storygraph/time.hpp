// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace storygraph {

using UtcTime = std::chrono::sys_seconds;
using Date = std::chrono::year_month_day;

namespace detail {

class Scanner {
 public:
  explicit Scanner(std::string_view s) : s_(s) {}

  bool done() const { return pos_ >= s_.size(); }
  char peek() const { return done() ? '\0' : s_[pos_]; }
  void skip_spaces() {
    while (!done() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  // Reads between min_digits and max_digits decimal digits.
  std::optional<int> digits(std::size_t min_digits, std::size_t max_digits) {
    std::size_t start = pos_;
    while (!done() && pos_ - start < max_digits && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ - start < min_digits) {
      pos_ = start;
      return std::nullopt;
    }
    int v = 0;
    std::from_chars(s_.data() + start, s_.data() + pos_, v);
    return v;
  }
  std::string_view word() {
    std::size_t start = pos_;
    while (!done() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return s_.substr(start, pos_ - start);
  }
  std::string_view rest() const { return s_.substr(pos_); }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

inline bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i]))) return false;
  }
  return true;
}

inline std::optional<UtcTime> make_time(int y, int mo, int d, int h, int mi, int s) {
  using namespace std::chrono;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60) return std::nullopt;
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

// Parses "Z", "+HH:MM", "+HHMM", "-HH" into an offset in seconds east of UTC.
inline std::optional<int> numeric_offset(Scanner& sc) {
  char sign = sc.peek();
  if (sign != '+' && sign != '-') return std::nullopt;
  sc.eat(sign);
  auto hh = sc.digits(2, 2);
  if (!hh) return std::nullopt;
  int mm = 0;
  sc.eat(':');
  if (auto m = sc.digits(2, 2)) mm = *m;
  int off = (*hh * 60 + mm) * 60;
  return sign == '-' ? -off : off;
}

}  // namespace detail

/// RFC 3339 UTC with second precision, e.g. 2019-03-24T14:30:00Z.
inline std::string format_rfc3339(UtcTime t) {
  using namespace std::chrono;
  auto day_point = floor<days>(t);
  year_month_day ymd{day_point};
  hh_mm_ss hms{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

inline std::string format_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

inline std::optional<Date> parse_date(std::string_view s) {
  detail::Scanner sc(s);
  auto y = sc.digits(4, 4);
  if (!y || !sc.eat('-')) return std::nullopt;
  auto m = sc.digits(2, 2);
  if (!m || !sc.eat('-')) return std::nullopt;
  auto d = sc.digits(2, 2);
  if (!d || !sc.done()) return std::nullopt;
  Date out{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)}, std::chrono::day{static_cast<unsigned>(*d)}};
  if (!out.ok()) return std::nullopt;
  return out;
}

/// Accepts full RFC 3339 timestamps (fraction dropped, any offset) and bare
/// dates (midnight UTC). A timestamp without an offset is taken as UTC.
inline std::optional<UtcTime> parse_rfc3339(std::string_view s) {
  detail::Scanner sc(s);
  sc.skip_spaces();
  auto y = sc.digits(4, 4);
  if (!y || !sc.eat('-')) return std::nullopt;
  auto mo = sc.digits(2, 2);
  if (!mo || !sc.eat('-')) return std::nullopt;
  auto d = sc.digits(2, 2);
  if (!d) return std::nullopt;
  sc.skip_spaces();
  if (sc.done()) return detail::make_time(*y, *mo, *d, 0, 0, 0);
  if (!(sc.eat('T') || sc.eat('t') || sc.eat(' '))) return std::nullopt;
  auto h = sc.digits(2, 2);
  if (!h || !sc.eat(':')) return std::nullopt;
  auto mi = sc.digits(2, 2);
  if (!mi) return std::nullopt;
  int sec = 0;
  if (sc.eat(':')) {
    auto ss = sc.digits(2, 2);
    if (!ss) return std::nullopt;
    sec = *ss;
    if (sc.eat('.') || sc.eat(',')) {
      if (!sc.digits(1, 12)) return std::nullopt;
    }
  }
  int offset = 0;
  if (sc.eat('Z') || sc.eat('z')) {
  } else if (auto off = detail::numeric_offset(sc)) {
    offset = *off;
  }
  sc.skip_spaces();
  if (!sc.done()) return std::nullopt;
  auto t = detail::make_time(*y, *mo, *d, *h, *mi, sec);
  if (!t) return std::nullopt;
  return *t - std::chrono::seconds{offset};
}

/// RSS pubDate style: "Sun, 24 Mar 2019 14:30:00 +0000" (weekday optional,
/// seconds optional, two-digit years and US zone abbreviations accepted).
inline std::optional<UtcTime> parse_rfc822(std::string_view s) {
  static constexpr std::array<std::string_view, 12> kMonths = {"jan", "feb", "mar", "apr", "may", "jun",
                                                               "jul", "aug", "sep", "oct", "nov", "dec"};
  detail::Scanner sc(s);
  sc.skip_spaces();
  if (std::isalpha(static_cast<unsigned char>(sc.peek()))) {
    sc.word();
    sc.eat(',');
    sc.skip_spaces();
  }
  auto d = sc.digits(1, 2);
  if (!d) return std::nullopt;
  sc.skip_spaces();
  auto mon_word = sc.word();
  if (mon_word.size() < 3) return std::nullopt;
  int month = 0;
  for (std::size_t i = 0; i < kMonths.size(); ++i) {
    if (detail::iequals(mon_word.substr(0, 3), kMonths[i])) month = static_cast<int>(i) + 1;
  }
  if (month == 0) return std::nullopt;
  sc.skip_spaces();
  auto y = sc.digits(2, 4);
  if (!y) return std::nullopt;
  int year = *y;
  if (year < 100) year += year < 70 ? 2000 : 1900;
  sc.skip_spaces();
  int h = 0, mi = 0, sec = 0;
  if (auto hh = sc.digits(1, 2)) {
    h = *hh;
    if (!sc.eat(':')) return std::nullopt;
    auto mm = sc.digits(2, 2);
    if (!mm) return std::nullopt;
    mi = *mm;
    if (sc.eat(':')) {
      auto ss = sc.digits(2, 2);
      if (!ss) return std::nullopt;
      sec = *ss;
    }
  }
  sc.skip_spaces();
  int offset = 0;
  if (auto off = detail::numeric_offset(sc)) {
    offset = *off;
  } else {
    auto zone = sc.word();
    struct Zone {
      std::string_view name;
      int hours;
    };
    static constexpr std::array<Zone, 12> kZones = {{{"GMT", 0}, {"UT", 0}, {"UTC", 0}, {"Z", 0}, {"EST", -5}, {"EDT", -4},
                                                    {"CST", -6}, {"CDT", -5}, {"MST", -7}, {"MDT", -6}, {"PST", -8}, {"PDT", -7}}};
    bool known = zone.empty();
    for (const auto& z : kZones) {
      if (detail::iequals(zone, z.name)) {
        offset = z.hours * 3600;
        known = true;
      }
    }
    if (!known) return std::nullopt;
  }
  auto t = detail::make_time(year, month, *d, h, mi, sec);
  if (!t) return std::nullopt;
  return *t - std::chrono::seconds{offset};
}

/// Feed and page metadata dates come in either flavour.
inline std::optional<UtcTime> parse_timestamp(std::string_view s) {
  if (auto t = parse_rfc3339(s)) return t;
  return parse_rfc822(s);
}

inline Date date_of(UtcTime t) { return Date{std::chrono::floor<std::chrono::days>(t)}; }

inline int minute_of_day(UtcTime t) {
  auto since_midnight = t - std::chrono::floor<std::chrono::days>(t);
  return static_cast<int>(std::chrono::duration_cast<std::chrono::minutes>(since_midnight).count());
}

inline UtcTime start_of_day(Date d) { return UtcTime{std::chrono::sys_days{d}}; }

inline long days_between(Date a, Date b) {
  return (std::chrono::sys_days{b} - std::chrono::sys_days{a}).count();
}

}  // namespace storygraph
