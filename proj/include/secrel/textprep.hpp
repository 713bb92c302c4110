#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "secrel/diag.hpp"
#include "secrel/hashing.hpp"
#include "secrel/porter.hpp"
#include "secrel/stopwords.hpp"

namespace secrel {

struct ProcessedDoc {
  std::string doc_id;
  std::vector<std::string> stems;

  bool empty() const { return stems.empty(); }
};

namespace textprep_detail {

inline bool is_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
}

inline std::vector<std::string> tokenize_lower(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char raw : text) {
    char c = raw;
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (is_alnum(c)) {
      current += c;
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

inline bool is_vowel_char(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

inline void undouble(std::string& w) {
  std::size_t n = w.size();
  if (n >= 2 && w[n - 1] == w[n - 2] && !is_vowel_char(w[n - 1]) && w[n - 1] != 'l' &&
      w[n - 1] != 's' && w[n - 1] != 'z')
    w.pop_back();
}

// Rule-based inflection stripping applied ahead of the Porter stem:
// plural -s/-es/-ies, then -ing/-ed with consonant-undoubling.
inline std::string lemmatize(std::string w) {
  std::size_t n = w.size();
  if (n >= 5 && w.compare(n - 3, 3, "ies") == 0) {
    w.resize(n - 3);
    w += 'y';
  } else if (n >= 4 && w.compare(n - 2, 2, "es") == 0 &&
             (w[n - 3] == 's' || w[n - 3] == 'x' || w[n - 3] == 'z' ||
              (n >= 5 && (w.compare(n - 4, 2, "ch") == 0 || w.compare(n - 4, 2, "sh") == 0)))) {
    w.resize(n - 2);
  } else if (n >= 3 && w.back() == 's' && w[n - 2] != 's' && w[n - 2] != 'u') {
    w.pop_back();
  }
  n = w.size();
  if (n >= 6 && w.compare(n - 3, 3, "ing") == 0) {
    w.resize(n - 3);
    undouble(w);
  } else if (n >= 5 && w.compare(n - 2, 2, "ed") == 0) {
    w.resize(n - 2);
    undouble(w);
  }
  return w;
}

}  // namespace textprep_detail

struct PreprocessOptions {
  std::size_t min_token_length = 2;
  std::size_t max_token_length = 16;
};

class Preprocessor {
 public:
  Preprocessor() : stopwords_(english_stopwords()) {}
  Preprocessor(WordList stopwords, WordList stoplist, PreprocessOptions options = {})
      : stopwords_(std::move(stopwords)), stoplist_(std::move(stoplist)), options_(options) {}

  static Preprocessor with_stoplist(WordList stoplist) {
    return Preprocessor(english_stopwords(), std::move(stoplist));
  }

  // lowercase -> tokenize -> stopwords -> length filter -> lemmatize ->
  // Porter stem -> stoplist. The final filter re-applies the stopword and
  // length checks so that a ProcessedDoc always passes its own pipeline.
  ProcessedDoc run(std::string_view text, std::string doc_id = {}) const {
    ProcessedDoc doc;
    doc.doc_id = std::move(doc_id);
    for (std::string& token : textprep_detail::tokenize_lower(text)) {
      if (stopwords_.contains(token)) continue;
      if (token.size() < options_.min_token_length || token.size() > options_.max_token_length)
        continue;
      std::string stem = porter_stem(textprep_detail::lemmatize(std::move(token)));
      if (stem.size() < options_.min_token_length || stem.size() > options_.max_token_length)
        continue;
      if (stopwords_.contains(stem) || stoplist_.contains(stem)) continue;
      doc.stems.push_back(std::move(stem));
    }
    return doc;
  }

  const WordList& stopwords() const { return stopwords_; }
  const WordList& stoplist() const { return stoplist_; }

 private:
  WordList stopwords_;
  WordList stoplist_;
  PreprocessOptions options_;
};

// Ranked (stem, collection frequency), ties broken lexicographically.
inline std::vector<std::pair<std::string, std::uint64_t>> frequent_stems(
    const std::vector<ProcessedDoc>& corpus, std::size_t n) {
  if (corpus.empty()) throw ValidationError("frequent_stems: empty corpus");
  std::map<std::string, std::uint64_t> counts;
  for (const auto& doc : corpus)
    for (const auto& stem : doc.stems) ++counts[stem];
  std::vector<std::pair<std::string, std::uint64_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > n) ranked.resize(n);
  return ranked;
}

using BowVector = std::vector<std::pair<int, std::uint32_t>>;  // id -> count, sorted by id

class Dictionary {
 public:
  static Dictionary build(const std::vector<ProcessedDoc>& corpus) {
    std::map<std::string, std::pair<std::uint32_t, std::uint64_t>> stats;  // word -> (df, cf)
    for (const auto& doc : corpus) {
      std::map<std::string, std::uint64_t> local;
      for (const auto& stem : doc.stems) ++local[stem];
      for (const auto& [word, count] : local) {
        auto& entry = stats[word];
        entry.first += 1;
        entry.second += count;
      }
    }
    if (stats.empty()) throw ValidationError("dictionary build: empty vocabulary");
    Dictionary dict;
    dict.corpus_size_ = corpus.size();
    dict.words_.reserve(stats.size());
    for (auto& [word, entry] : stats) {  // std::map iterates sorted: ids by sorted vocabulary
      dict.index_.emplace(word, static_cast<int>(dict.words_.size()));
      dict.words_.push_back(word);
      dict.df_.push_back(entry.first);
      dict.cf_.push_back(entry.second);
    }
    return dict;
  }

  int id_of(const std::string& word) const {
    auto it = index_.find(word);
    return it == index_.end() ? -1 : it->second;
  }

  const std::string& word_of(int id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return words_.size(); }
  std::uint32_t df(int id) const { return df_.at(static_cast<std::size_t>(id)); }
  std::uint64_t cf(int id) const { return cf_.at(static_cast<std::size_t>(id)); }
  std::size_t corpus_size() const { return corpus_size_; }

  std::uint64_t digest() const {
    std::uint64_t h = fnv1a64(std::to_string(corpus_size_));
    for (std::size_t i = 0; i < words_.size(); ++i) {
      h = fnv1a64(words_[i], h);
      h = fnv1a64("|" + std::to_string(df_[i]) + "|" + std::to_string(cf_[i]) + ";", h);
    }
    return h;
  }

  nlohmann::json to_json() const {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t i = 0; i < words_.size(); ++i)
      entries.push_back({{"word", words_[i]}, {"id", i}, {"df", df_[i]}, {"cf", cf_[i]}});
    return {{"corpus_size", corpus_size_}, {"entries", entries}};
  }

  static Dictionary from_json(const nlohmann::json& j) {
    Dictionary dict;
    dict.corpus_size_ = j.at("corpus_size").get<std::size_t>();
    const auto& entries = j.at("entries");
    dict.words_.resize(entries.size());
    dict.df_.resize(entries.size());
    dict.cf_.resize(entries.size());
    for (const auto& e : entries) {
      auto id = e.at("id").get<std::size_t>();
      if (id >= entries.size()) throw ValidationError("dictionary: id out of range");
      dict.words_[id] = e.at("word").get<std::string>();
      dict.df_[id] = e.at("df").get<std::uint32_t>();
      dict.cf_[id] = e.at("cf").get<std::uint64_t>();
    }
    for (std::size_t i = 0; i < dict.words_.size(); ++i)
      dict.index_.emplace(dict.words_[i], static_cast<int>(i));
    if (dict.index_.size() != dict.words_.size())
      throw ValidationError("dictionary: duplicate words");
    for (std::size_t i = 0; i < dict.words_.size(); ++i) {
      if (dict.df_[i] < 1 || dict.df_[i] > dict.corpus_size_ || dict.cf_[i] < dict.df_[i])
        throw ValidationError("dictionary: inconsistent df/cf for '" + dict.words_[i] + "'");
    }
    return dict;
  }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::uint32_t> df_;
  std::vector<std::uint64_t> cf_;
  std::size_t corpus_size_ = 0;
};

inline BowVector to_bow(const ProcessedDoc& doc, const Dictionary& dict) {
  std::map<int, std::uint32_t> counts;
  for (const auto& stem : doc.stems) {
    int id = dict.id_of(stem);
    if (id >= 0) ++counts[id];
  }
  return BowVector(counts.begin(), counts.end());
}

struct WeightedDoc {
  std::string doc_id;
  std::vector<std::pair<int, double>> weights;  // sorted by id, L2-normalized

  bool empty() const { return weights.empty(); }
};

// tf-idf with idf(t) = log2(N / df(t)); terms present in every document get
// weight zero and are dropped; vectors are L2-normalized.
class TfidfModel {
 public:
  static TfidfModel fit(const Dictionary& dict) {
    TfidfModel model;
    model.idf_.resize(dict.size());
    const double n = static_cast<double>(dict.corpus_size());
    for (std::size_t id = 0; id < dict.size(); ++id)
      model.idf_[id] = std::log2(n / static_cast<double>(dict.df(static_cast<int>(id))));
    return model;
  }

  WeightedDoc transform(const BowVector& bow, std::string doc_id = {}) const {
    WeightedDoc doc;
    doc.doc_id = std::move(doc_id);
    double norm_sq = 0.0;
    for (const auto& [id, count] : bow) {
      double idf = idf_.at(static_cast<std::size_t>(id));
      if (idf <= 0.0) continue;
      double w = static_cast<double>(count) * idf;
      doc.weights.emplace_back(id, w);
      norm_sq += w * w;
    }
    if (norm_sq > 0.0) {
      double inv = 1.0 / std::sqrt(norm_sq);
      for (auto& [id, w] : doc.weights) w *= inv;
    }
    return doc;
  }

  double idf(int id) const { return idf_.at(static_cast<std::size_t>(id)); }

 private:
  std::vector<double> idf_;
};

}  // namespace secrel
