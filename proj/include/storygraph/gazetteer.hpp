// SPDX-License-Identifier: Apache-2.0
#pragma once

// Word lists for the offline heuristic recognizer. Entries are lowercase.

#include <algorithm>
#include <string_view>
#include <vector>

namespace storygraph::gazetteer {

namespace detail {

inline std::vector<std::string_view> sorted(std::initializer_list<std::string_view> words) {
  std::vector<std::string_view> v(words);
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace detail

inline const std::vector<std::string_view>& months() {
  static const auto v = detail::sorted({"january", "february", "march", "april", "may", "june", "july", "august",
                                        "september", "october", "november", "december", "jan", "feb", "mar", "apr",
                                        "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec"});
  return v;
}

inline const std::vector<std::string_view>& weekdays() {
  static const auto v = detail::sorted({"monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"});
  return v;
}

inline const std::vector<std::string_view>& relative_days() {
  static const auto v = detail::sorted({"today", "yesterday", "tomorrow", "tonight"});
  return v;
}

inline const std::vector<std::string_view>& money_scales() {
  static const auto v = detail::sorted({"thousand", "million", "billion", "trillion"});
  return v;
}

// Titles that precede a person's name and are not part of it.
inline const std::vector<std::string_view>& honorifics() {
  static const auto v = detail::sorted({"mr",        "mrs",       "ms",       "dr",        "sen",      "rep",
                                        "gov",       "gen",       "lt",       "col",       "sgt",      "prof",
                                        "president", "senator",   "judge",    "secretary", "speaker",  "chairman",
                                        "governor",  "mayor",     "attorney", "general",   "sir",      "lady",
                                        "queen",     "king",      "prince",   "princess",  "pope",     "rev",
                                        "former",    "vice",      "deputy",   "director",  "justice",  "chief",
                                        "representative", "congressman", "congresswoman", "ag"});
  return v;
}

// Abbreviations whose trailing period does not end a sentence.
inline const std::vector<std::string_view>& abbreviations() {
  static const auto v = detail::sorted({"mr",  "mrs", "ms",   "dr",  "sen", "rep", "gov", "gen", "lt",  "col",
                                        "sgt", "jr",  "sr",   "st",  "mt",  "us",  "am",  "pm",  "jan", "feb",
                                        "mar", "apr", "jun",  "jul", "aug", "sep", "sept", "oct", "nov", "dec",
                                        "inc", "corp", "co",  "ltd", "vs",  "no",  "prof", "rev", "dc",  "uk",
                                        "un", "eu", "ft", "ave", "blvd"});
  return v;
}

// Lowercase connectors allowed inside a capitalized name.
inline const std::vector<std::string_view>& name_connectors() {
  static const auto v = detail::sorted({"of", "de", "van", "von", "der", "da", "del", "la", "le", "bin", "al"});
  return v;
}

inline const std::vector<std::string_view>& organization_words() {
  static const auto v = detail::sorted({
      "administration", "agency",     "airlines",  "associated", "association", "authority",  "bank",
      "board",          "bureau",     "cabinet",   "campaign",   "caucus",      "center",     "church",
      "club",           "co",         "college",   "commission", "committee",   "company",    "congress",
      "corp",           "corporation", "council",  "court",      "department",  "foundation", "fund",
      "group",          "guard",      "hospital",  "house",      "inc",         "institute",  "journal",
      "league",         "ltd",        "media",     "ministry",   "network",     "news",       "office",
      "organization",   "parliament", "party",     "pentagon",   "police",      "post",       "press",
      "reserve",        "school",     "senate",    "service",    "society",     "times",      "tribune",
      "union",          "university", "democrats", "republicans", "gop",        "fbi",        "cia",
      "nato",           "cnn",        "msnbc",     "nbc",        "abc",         "cbs",        "fox",
      "reuters",        "nasa",       "doj",       "epa",        "irs",         "nfl",        "nba",
      "breitbart",      "politico",   "vox",       "buzzfeed",   "twitter",     "facebook",   "google",
      "apple",          "amazon",     "microsoft", "kremlin",    "un",          "eu",
  });
  return v;
}

inline const std::vector<std::string_view>& locations() {
  static const auto v = detail::sorted({
      // countries and regions
      "afghanistan", "africa", "america", "argentina", "asia", "australia", "austria", "belgium", "brazil", "britain",
      "canada", "chile", "china", "colombia", "cuba", "egypt", "england", "europe", "france", "germany", "greece",
      "india", "indonesia", "iran", "iraq", "ireland", "israel", "italy", "japan", "jordan", "korea", "lebanon",
      "libya", "mexico", "netherlands", "nigeria", "pakistan", "palestine", "poland", "qatar", "russia", "saudi",
      "scotland", "singapore", "somalia", "spain", "sweden", "switzerland", "syria", "taiwan", "turkey", "ukraine",
      "venezuela", "vietnam", "yemen", "gaza", "crimea",
      // us states
      "alabama", "alaska", "arizona", "arkansas", "california", "colorado", "connecticut", "delaware", "florida",
      "georgia", "hawaii", "idaho", "illinois", "indiana", "iowa", "kansas", "kentucky", "louisiana", "maine",
      "maryland", "massachusetts", "michigan", "minnesota", "mississippi", "missouri", "montana", "nebraska", "nevada",
      "hampshire", "jersey", "carolina", "dakota", "ohio", "oklahoma", "oregon", "pennsylvania", "rhode", "tennessee",
      "texas", "utah", "vermont", "virginia", "washington", "wisconsin", "wyoming",
      // cities
      "atlanta", "baltimore", "beijing", "berlin", "boston", "brussels", "chicago", "dallas", "dayton", "denver",
      "detroit", "geneva", "hanoi", "houston", "jerusalem", "kabul", "kyiv", "london", "moscow", "miami", "norfolk",
      "paris", "parkland", "philadelphia", "phoenix", "pyongyang", "seattle", "seoul", "tehran", "tokyo", "toronto",
      "manhattan", "brooklyn", "hollywood", "baghdad", "damascus", "caracas", "havana", "ottawa", "rome", "madrid",
  });
  return v;
}

inline const std::vector<std::string_view>& first_names() {
  static const auto v = detail::sorted({
      "adam",    "alexander", "alexandria", "amy",     "andrew",  "ashley",   "barack",  "ben",     "bernie",
      "beto",    "bill",      "bob",        "brett",   "brian",   "chris",    "christine", "chuck", "cory",
      "david",   "debra",     "devin",      "dianne",  "donald",  "elizabeth", "elijah", "emily",   "eric",
      "george",  "hillary",   "hunter",     "ivanka",  "jared",   "jeff",     "jennifer", "jeremy", "jerry",
      "jim",     "joe",       "john",       "jonathan", "joseph", "julian",   "kamala",  "kevin",   "kim",
      "kristina", "lindsey",  "lisa",       "marco",   "maria",   "mark",     "melania", "michael", "michelle",
      "mike",    "mitch",     "nancy",      "nicholas", "pete",   "rachel",   "richard", "robert",  "ron",
      "rudy",    "ryan",      "sarah",      "steve",   "susan",   "ted",      "thomas",  "tom",     "vladimir",
      "william", "xi",        "adam",       "marie",   "gordon",  "lev",      "rod",     "sean",    "stephen",
  });
  return v;
}

inline bool contains(const std::vector<std::string_view>& list, std::string_view word) {
  return std::binary_search(list.begin(), list.end(), word);
}

}  // namespace storygraph::gazetteer
