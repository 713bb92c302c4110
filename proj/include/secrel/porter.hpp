#pragma once

// Classic Porter stemming algorithm (steps 1a-5b). Expects lowercase ASCII
// tokens; words of length <= 2 are returned unchanged.

#include <string>
#include <string_view>
#include <vector>

namespace secrel {

namespace porter_detail {

inline bool is_consonant(const std::string& w, std::size_t i) {
  char c = w[i];
  if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return false;
  if (c == 'y') return i == 0 ? true : !is_consonant(w, i - 1);
  return true;
}

// Number of VC sequences in w[0, end): [C](VC)^m[V].
inline std::size_t measure(const std::string& w, std::size_t end) {
  std::size_t i = 0;
  std::size_t m = 0;
  while (i < end && is_consonant(w, i)) ++i;
  for (;;) {
    while (i < end && !is_consonant(w, i)) ++i;
    if (i == end) break;
    while (i < end && is_consonant(w, i)) ++i;
    ++m;
  }
  return m;
}

inline bool contains_vowel(const std::string& w, std::size_t end) {
  for (std::size_t i = 0; i < end; ++i)
    if (!is_consonant(w, i)) return true;
  return false;
}

inline bool ends_double_consonant(const std::string& w) {
  std::size_t n = w.size();
  return n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1);
}

// *o: stem ends cvc where the final consonant is not w, x or y.
inline bool ends_cvc(const std::string& w, std::size_t end) {
  if (end < 3) return false;
  if (!is_consonant(w, end - 3) || is_consonant(w, end - 2) || !is_consonant(w, end - 1)) return false;
  char c = w[end - 1];
  return c != 'w' && c != 'x' && c != 'y';
}

inline bool ends_with(const std::string& w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
};

// Longest matching suffix wins; its condition is then tested without
// fall-through, as in the reference implementation.
inline void apply_rule_list(std::string& w, const std::vector<Rule>& rules, std::size_t min_measure) {
  for (const auto& rule : rules) {
    if (!ends_with(w, rule.suffix)) continue;
    std::size_t stem = w.size() - rule.suffix.size();
    if (measure(w, stem) > min_measure) {
      w.resize(stem);
      w += rule.replacement;
    }
    return;
  }
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
  if (ends_with(w, "ed") && contains_vowel(w, w.size() - 2)) {
    w.resize(w.size() - 2);
    stripped = true;
  } else if (ends_with(w, "ing") && contains_vowel(w, w.size() - 3)) {
    w.resize(w.size() - 3);
    stripped = true;
  }
  if (!stripped) return;
  if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
    w += 'e';
  } else if (ends_double_consonant(w) && w.back() != 'l' && w.back() != 's' && w.back() != 'z') {
    w.pop_back();
  } else if (measure(w, w.size()) == 1 && ends_cvc(w, w.size())) {
    w += 'e';
  }
}

inline void step_1c(std::string& w) {
  if (ends_with(w, "y") && contains_vowel(w, w.size() - 1)) w.back() = 'i';
}

inline void step_2(std::string& w) {
  static const std::vector<Rule> rules = {
      {"ational", "ate"}, {"ization", "ize"}, {"iveness", "ive"}, {"fulness", "ful"},
      {"ousness", "ous"}, {"tional", "tion"}, {"biliti", "ble"},  {"ation", "ate"},
      {"alism", "al"},    {"aliti", "al"},    {"iviti", "ive"},   {"ousli", "ous"},
      {"entli", "ent"},   {"enci", "ence"},   {"anci", "ance"},   {"izer", "ize"},
      {"abli", "able"},   {"alli", "al"},     {"ator", "ate"},    {"eli", "e"},
  };
  apply_rule_list(w, rules, 0);
}

inline void step_3(std::string& w) {
  static const std::vector<Rule> rules = {
      {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
      {"ical", "ic"},  {"ness", ""},  {"ful", ""},
  };
  apply_rule_list(w, rules, 0);
}

inline void step_4(std::string& w) {
  static const std::vector<Rule> rules = {
      {"ement", ""}, {"able", ""}, {"ible", ""}, {"ance", ""}, {"ence", ""},
      {"ment", ""},  {"ant", ""},  {"ent", ""},  {"ism", ""},  {"ate", ""},
      {"iti", ""},   {"ous", ""},  {"ive", ""},  {"ize", ""},  {"ion", ""},
      {"al", ""},    {"er", ""},   {"ic", ""},   {"ou", ""},
  };
  for (const auto& rule : rules) {
    if (!ends_with(w, rule.suffix)) continue;
    std::size_t stem = w.size() - rule.suffix.size();
    bool ok = measure(w, stem) > 1;
    if (rule.suffix == "ion") ok = ok && stem > 0 && (w[stem - 1] == 's' || w[stem - 1] == 't');
    if (ok) w.resize(stem);
    return;
  }
}

inline void step_5a(std::string& w) {
  if (!ends_with(w, "e")) return;
  std::size_t stem = w.size() - 1;
  std::size_t m = measure(w, stem);
  if (m > 1 || (m == 1 && !ends_cvc(w, stem))) w.pop_back();
}

inline void step_5b(std::string& w) {
  if (measure(w, w.size()) > 1 && ends_double_consonant(w) && w.back() == 'l') w.pop_back();
}

}  // namespace porter_detail

inline std::string porter_stem(std::string word) {
  if (word.size() <= 2) return word;
  using namespace porter_detail;
  step_1a(word);
  step_1b(word);
  step_1c(word);
  step_2(word);
  step_3(word);
  step_4(word);
  step_5a(word);
  step_5b(word);
  return word;
}

}  // namespace secrel
