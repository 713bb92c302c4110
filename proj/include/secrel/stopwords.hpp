#pragma once

#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>

#include "secrel/diag.hpp"

namespace secrel {

// Word-per-line list with '#' comments; doubles as the stopword list and the
// manually curated stoplist.
class WordList {
 public:
  WordList() = default;

  explicit WordList(std::initializer_list<const char*> words) {
    for (const char* w : words) words_.emplace(w);
  }

  static WordList from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open word list: " + path);
    WordList list;
    std::string line;
    while (std::getline(in, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      std::size_t begin = line.find_first_not_of(" \t\r");
      if (begin == std::string::npos) continue;
      std::size_t end = line.find_last_not_of(" \t\r");
      std::string word = line.substr(begin, end - begin + 1);
      for (char& c : word)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      list.words_.insert(std::move(word));
    }
    return list;
  }

  void add(std::string word) { words_.insert(std::move(word)); }
  bool contains(const std::string& word) const { return words_.count(word) > 0; }
  bool empty() const { return words_.empty(); }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

inline const WordList& english_stopwords() {
  static const WordList list{
      "i",       "me",      "my",      "myself",  "we",       "our",     "ours",    "ourselves",
      "you",     "your",    "yours",   "yourself", "yourselves", "he",   "him",     "his",
      "himself", "she",     "her",     "hers",    "herself",  "it",      "its",     "itself",
      "they",    "them",    "their",   "theirs",  "themselves", "what",  "which",   "who",
      "whom",    "this",    "that",    "these",   "those",    "am",      "is",      "are",
      "was",     "were",    "be",      "been",    "being",    "have",    "has",     "had",
      "having",  "do",      "does",    "did",     "doing",    "a",       "an",      "the",
      "and",     "but",     "if",      "or",      "because",  "as",      "until",   "while",
      "of",      "at",      "by",      "for",     "with",     "about",   "against", "between",
      "into",    "through", "during",  "before",  "after",    "above",   "below",   "to",
      "from",    "up",      "down",    "in",      "out",      "on",      "off",     "over",
      "under",   "again",   "further", "then",    "once",     "here",    "there",   "when",
      "where",   "why",     "how",     "all",     "any",      "both",    "each",    "few",
      "more",    "most",    "other",   "some",    "such",     "no",      "nor",     "not",
      "only",    "own",     "same",    "so",      "than",     "too",     "very",    "can",
      "will",    "just",    "don",     "should",  "now",      "also",    "may",     "might",
      "must",    "shall",   "would",   "could",   "cannot",
  };
  return list;
}

}  // namespace secrel
