// Text preprocessing: tokenization, normalization (stopwords, length and
// numeric filters, suffix-stripping stemmer) and metadata-to-token
// binning. Metadata tokens carry the reserved "__" prefix; candidates
// containing "__" are rejected during normalization so the two
// namespaces cannot collide inside a shared vocabulary.
#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "hybridrec/data.hpp"
#include "hybridrec/errors.hpp"
#include "hybridrec/strings.hpp"

namespace hybridrec {

// The bundled English stopword list (also shipped verbatim as
// data/stopwords_en.txt; a test keeps the two in sync).
inline const std::vector<std::string>& default_stopwords() {
  static const std::vector<std::string> words = {
      "a", "about", "above", "after", "again", "against", "all", "along",
      "already", "also", "although", "am", "among", "an", "and", "any",
      "are", "around", "as", "at", "away", "be", "because", "been",
      "before", "behind", "being", "below", "beside", "besides", "between",
      "beyond", "both", "but", "by", "can", "cannot", "could", "did", "do",
      "does", "doing", "done", "down", "during", "each", "else", "ever",
      "every", "few", "for", "from", "further", "had", "has", "have",
      "having", "he", "her", "here", "hers", "herself", "him", "himself",
      "his", "how", "however", "i", "if", "in", "into", "is", "it", "its",
      "itself", "just", "may", "me", "might", "more", "most", "must", "my",
      "myself", "no", "nor", "not", "now", "of", "off", "often", "on",
      "once", "only", "or", "other", "our", "ours", "ourselves", "out",
      "over", "own", "same", "shall", "she", "should", "since", "so",
      "some", "still", "such", "than", "that", "the", "their", "theirs",
      "them", "themselves", "then", "there", "these", "they", "this",
      "those", "through", "to", "too", "under", "until", "up", "upon",
      "very", "was", "we", "were", "what", "when", "where", "which",
      "while", "who", "whom", "why", "will", "with", "within", "without",
      "would", "you", "your", "yours", "yourself", "yourselves"};
  return words;
}

inline std::set<std::string> load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open stopword list: " + path);
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    std::string w = trim(line);
    if (!w.empty()) words.insert(w);
  }
  return words;
}

struct TextOptions {
  std::size_t min_token_len = 3;
  std::set<std::string> stopwords{default_stopwords().begin(),
                                  default_stopwords().end()};
  // Price bins: free (=0), low (0,1], mid (1,5], high (>5].
  double price_low_max = 1.0;
  double price_mid_max = 5.0;
};

// --- tokenize ---------------------------------------------------------

// Splits on whitespace and punctuation. ASCII alphanumerics, '_' and any
// non-ASCII byte count as word characters; everything else separates.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    bool word_char = std::isalnum(c) || c == '_' || c >= 0x80;
    if (word_char) {
      cur.push_back(static_cast<char>(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// --- Porter stemmer ---------------------------------------------------
//
// The classic suffix-stripping rule set (steps 1a-5b). Operates on
// lowercase ASCII words; tokens containing digits or non-ASCII bytes are
// passed through unchanged. normalize() applies it to a fixed point so
// the whole pipeline is idempotent.

namespace porter {

inline bool is_vowel_at(const std::string& w, std::size_t i) {
  char c = w[i];
  if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return true;
  if (c == 'y') return i == 0 ? false : !is_vowel_at(w, i - 1);
  return false;
}

// Porter's measure m: number of VC alternations in [C](VC)^m[V].
inline int measure(const std::string& w, std::size_t len) {
  int m = 0;
  bool prev_vowel = false;
  for (std::size_t i = 0; i < len; ++i) {
    bool v = is_vowel_at(w, i);
    if (!v && prev_vowel) ++m;
    prev_vowel = v;
  }
  return m;
}

inline bool has_vowel(const std::string& w, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i)
    if (is_vowel_at(w, i)) return true;
  return false;
}

inline bool ends_double_consonant(const std::string& w) {
  std::size_t n = w.size();
  return n >= 2 && w[n - 1] == w[n - 2] && !is_vowel_at(w, n - 1);
}

// *o: stem ends consonant-vowel-consonant where the final consonant is
// not w, x or y.
inline bool ends_cvc(const std::string& w, std::size_t len) {
  if (len < 3) return false;
  char last = w[len - 1];
  if (last == 'w' || last == 'x' || last == 'y') return false;
  std::string p = w.substr(0, len);
  return !is_vowel_at(p, len - 3) && is_vowel_at(p, len - 2) &&
         !is_vowel_at(p, len - 1);
}

inline bool ends_with(const std::string& w, const char* suffix) {
  std::size_t n = std::char_traits<char>::length(suffix);
  return w.size() >= n && w.compare(w.size() - n, n, suffix) == 0;
}

struct Rule {
  const char* suffix;
  const char* replacement;
  int min_measure;  // condition: m(stem) > min_measure
};

// Applies the longest matching rule whose measure condition holds.
// Returns true if the word changed.
inline bool apply_rules(std::string& w, const Rule* rules, std::size_t count) {
  const Rule* best = nullptr;
  std::size_t best_len = 0;
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t len = std::char_traits<char>::length(rules[i].suffix);
    if (len > best_len && ends_with(w, rules[i].suffix)) {
      best = &rules[i];
      best_len = len;
    }
  }
  if (!best) return false;
  std::size_t stem_len = w.size() - best_len;
  if (measure(w, stem_len) <= best->min_measure) return false;
  w.resize(stem_len);
  w += best->replacement;
  return true;
}

inline void step_1a(std::string& w) {
  if (ends_with(w, "sses")) {
    w.resize(w.size() - 2);
  } else if (ends_with(w, "ies")) {
    w.resize(w.size() - 2);
  } else if (!ends_with(w, "ss") && ends_with(w, "s")) {
    w.pop_back();
  }
}

inline void step_1b(std::string& w) {
  if (ends_with(w, "eed")) {
    if (measure(w, w.size() - 3) > 0) w.pop_back();
    return;
  }
  bool stripped = false;
  if (ends_with(w, "ed") && has_vowel(w, w.size() - 2)) {
    w.resize(w.size() - 2);
    stripped = true;
  } else if (ends_with(w, "ing") && has_vowel(w, w.size() - 3)) {
    w.resize(w.size() - 3);
    stripped = true;
  }
  if (!stripped) return;
  if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
    w.push_back('e');
  } else if (ends_double_consonant(w)) {
    char c = w.back();
    if (c != 'l' && c != 's' && c != 'z') w.pop_back();
  } else if (measure(w, w.size()) == 1 && ends_cvc(w, w.size())) {
    w.push_back('e');
  }
}

inline void step_1c(std::string& w) {
  if (ends_with(w, "y") && has_vowel(w, w.size() - 1)) w.back() = 'i';
}

inline void step_2(std::string& w) {
  static const Rule rules[] = {
      {"ational", "ate", 0}, {"tional", "tion", 0}, {"enci", "ence", 0},
      {"anci", "ance", 0},   {"izer", "ize", 0},    {"abli", "able", 0},
      {"alli", "al", 0},     {"entli", "ent", 0},   {"eli", "e", 0},
      {"ousli", "ous", 0},   {"ization", "ize", 0}, {"ation", "ate", 0},
      {"ator", "ate", 0},    {"alism", "al", 0},    {"iveness", "ive", 0},
      {"fulness", "ful", 0}, {"ousness", "ous", 0}, {"aliti", "al", 0},
      {"iviti", "ive", 0},   {"biliti", "ble", 0}};
  apply_rules(w, rules, std::size(rules));
}

inline void step_3(std::string& w) {
  static const Rule rules[] = {{"icate", "ic", 0}, {"ative", "", 0},
                               {"alize", "al", 0}, {"iciti", "ic", 0},
                               {"ical", "ic", 0},  {"ful", "", 0},
                               {"ness", "", 0}};
  apply_rules(w, rules, std::size(rules));
}

inline void step_4(std::string& w) {
  static const Rule rules[] = {
      {"al", "", 1},    {"ance", "", 1}, {"ence", "", 1}, {"er", "", 1},
      {"ic", "", 1},    {"able", "", 1}, {"ible", "", 1}, {"ant", "", 1},
      {"ement", "", 1}, {"ment", "", 1}, {"ent", "", 1},  {"ou", "", 1},
      {"ism", "", 1},   {"ate", "", 1},  {"iti", "", 1},  {"ous", "", 1},
      {"ive", "", 1},   {"ize", "", 1}};
  // "ion" needs the extra s/t condition, check it alongside the table.
  if (ends_with(w, "ion")) {
    std::size_t stem_len = w.size() - 3;
    if (stem_len >= 1 && (w[stem_len - 1] == 's' || w[stem_len - 1] == 't') &&
        measure(w, stem_len) > 1) {
      // "sion"/"tion" also end with table suffixes shorter than "ion"
      // would match; the ion rule has priority per the longest-match
      // order of the original rule list.
      w.resize(stem_len);
      return;
    }
  }
  apply_rules(w, rules, std::size(rules));
}

inline void step_5a(std::string& w) {
  if (!ends_with(w, "e")) return;
  int m = measure(w, w.size() - 1);
  if (m > 1 || (m == 1 && !ends_cvc(w, w.size() - 1))) w.pop_back();
}

inline void step_5b(std::string& w) {
  if (ends_double_consonant(w) && w.back() == 'l' && measure(w, w.size()) > 1)
    w.pop_back();
}

inline std::string stem_once(std::string w) {
  if (w.size() <= 2) return w;
  step_1a(w);
  step_1b(w);
  step_1c(w);
  step_2(w);
  step_3(w);
  step_4(w);
  step_5a(w);
  step_5b(w);
  return w;
}

}  // namespace porter

inline bool is_pure_alpha(const std::string& w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](unsigned char c) {
    return c >= 'a' && c <= 'z';
  });
}

inline bool is_pure_numeric(const std::string& w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](unsigned char c) {
    return std::isdigit(c);
  });
}

// Stems to a fixed point; one application of the rule set can expose a
// further strippable suffix, and the fixed point is what makes
// normalize idempotent.
inline std::string stem(const std::string& word) {
  if (!is_pure_alpha(word)) return word;
  std::string cur = word;
  for (int i = 0; i < 16; ++i) {
    std::string next = porter::stem_once(cur);
    if (next == cur) break;
    cur = std::move(next);
  }
  return cur;
}

inline std::string to_lower(std::string s) {
  for (char& c : s)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return s;
}

// --- normalize --------------------------------------------------------

// Lowercase, drop stopwords / short / numeric tokens and anything in the
// reserved "__" namespace, stem, then re-apply the filters to the
// stemmed form so every output satisfies the token invariants.
inline std::vector<std::string> normalize(
    const std::vector<std::string>& candidates, const TextOptions& opts) {
  std::vector<std::string> out;
  for (const auto& raw : candidates) {
    std::string w = to_lower(raw);
    if (w.find("__") != std::string::npos) continue;
    if (w.size() < opts.min_token_len) continue;
    if (is_pure_numeric(w)) continue;
    if (opts.stopwords.count(w)) continue;
    w = stem(w);
    if (w.size() < opts.min_token_len) continue;
    if (is_pure_numeric(w)) continue;
    if (opts.stopwords.count(w)) continue;
    out.push_back(std::move(w));
  }
  return out;
}

inline std::vector<std::string> normalize_text(const std::string& text,
                                               const TextOptions& opts) {
  return normalize(tokenize(text), opts);
}

// --- metadata binning -------------------------------------------------

namespace detail {

inline std::string format_half_star(double rating) {
  // Round to nearest 0.5, half away from zero; rating is in [0, 5].
  double snapped = std::round(rating * 2.0) / 2.0;
  int whole = static_cast<int>(snapped);
  int frac = static_cast<int>(std::round((snapped - whole) * 10.0));
  return std::to_string(whole) + "." + std::to_string(frac);
}

inline int log10_bucket(std::int64_t num_ratings) {
  // floor(log10(n + 1)) computed in integers.
  std::int64_t v = num_ratings + 1;
  int bucket = 0;
  while (v >= 10) {
    v /= 10;
    ++bucket;
  }
  return bucket;
}

}  // namespace detail

// Exactly four tokens: genre, price bin, half-star rating, popularity
// bucket.
inline std::vector<std::string> bin_app_metadata(const AppMetadata& meta,
                                                 const TextOptions& opts) {
  std::string price_bin;
  if (meta.price == 0.0)
    price_bin = "free";
  else if (meta.price <= opts.price_low_max)
    price_bin = "low";
  else if (meta.price <= opts.price_mid_max)
    price_bin = "mid";
  else
    price_bin = "high";
  return {
      "__genre=" + to_lower(meta.genre),
      "__price=" + price_bin,
      "__rating=" + detail::format_half_star(meta.avg_rating),
      "__pop=" + std::to_string(detail::log10_bucket(meta.num_ratings)),
  };
}

inline std::vector<std::string> bin_user_metadata(const UserMetadata& meta) {
  return {"__os=" + to_lower(meta.os), "__city=" + to_lower(meta.city)};
}

}  // namespace hybridrec
