#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "secrel/diag.hpp"
#include "secrel/textprep.hpp"

namespace secrel {

enum class Polarity { SR, NSR };

enum class LexiconProvenance { DescriptionsOnly, DescriptionsAndRationales };

struct Lexicon {
  Polarity polarity = Polarity::SR;
  std::map<std::string, double> entries;  // word -> score
  LexiconProvenance provenance = LexiconProvenance::DescriptionsOnly;

  bool contains(const std::string& word) const { return entries.count(word) > 0; }

  nlohmann::json to_json() const {
    nlohmann::json words = nlohmann::json::array();
    for (const auto& [word, score] : entries)
      words.push_back({{"word", word},
                       {"score", score},
                       {"polarity", polarity == Polarity::SR ? "SR" : "NSR"},
                       {"provenance", provenance == LexiconProvenance::DescriptionsOnly
                                          ? "descriptions-only"
                                          : "descriptions+rationales"}});
    return words;
  }

  static Lexicon from_json(const nlohmann::json& j) {
    Lexicon lex;
    bool first = true;
    for (const auto& e : j) {
      if (first) {
        lex.polarity = e.at("polarity").get<std::string>() == "SR" ? Polarity::SR : Polarity::NSR;
        lex.provenance = e.at("provenance").get<std::string>() == "descriptions+rationales"
                             ? LexiconProvenance::DescriptionsAndRationales
                             : LexiconProvenance::DescriptionsOnly;
        first = false;
      }
      lex.entries[e.at("word").get<std::string>()] = e.at("score").get<double>();
    }
    return lex;
  }

  // Word-cloud input: one "word,weight" row per entry.
  std::string to_csv() const {
    std::string out = "word,weight\n";
    std::vector<std::pair<std::string, double>> rows(entries.begin(), entries.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    for (const auto& [word, score] : rows) {
      out += word;
      out += ',';
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", score);
      out += buf;
      out += '\n';
    }
    return out;
  }
};

// Words that occur in at least one SR document and in no NSR document, with
// collection frequency strictly above min_frequency; ranked by frequency.
inline std::vector<std::pair<std::string, std::uint64_t>> exclusive_sr_words(
    const std::vector<ProcessedDoc>& sr_docs, const std::vector<ProcessedDoc>& nsr_docs,
    std::uint64_t min_frequency) {
  if (sr_docs.empty() || nsr_docs.empty())
    throw ValidationError("exclusive_sr_words: both corpora must be non-empty");
  std::set<std::string> nsr_vocab;
  for (const auto& doc : nsr_docs)
    for (const auto& stem : doc.stems) nsr_vocab.insert(stem);
  std::map<std::string, std::uint64_t> counts;
  for (const auto& doc : sr_docs)
    for (const auto& stem : doc.stems)
      if (!nsr_vocab.count(stem)) ++counts[stem];
  std::vector<std::pair<std::string, std::uint64_t>> ranked;
  for (const auto& [word, count] : counts)
    if (count > min_frequency) ranked.emplace_back(word, count);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return ranked;
}

enum class TfidfAggregation { MaxPerDocument, CorpusAggregated };

// Words whose aggregated tf-idf score reaches the threshold. The default
// aggregation is the maximum per-document weight; the corpus-aggregated mode
// scores one L2-normalized collection-frequency vector instead.
inline std::vector<std::pair<std::string, double>> tfidf_keywords(
    const std::vector<ProcessedDoc>& corpus, double threshold,
    TfidfAggregation aggregation = TfidfAggregation::MaxPerDocument) {
  if (corpus.empty()) throw ValidationError("tfidf_keywords: empty corpus");
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw ValidationError("tfidf_keywords: threshold must be in (0, 1]");
  Dictionary dict = Dictionary::build(corpus);
  TfidfModel model = TfidfModel::fit(dict);
  std::map<std::string, double> best;
  if (aggregation == TfidfAggregation::MaxPerDocument) {
    for (const auto& doc : corpus) {
      WeightedDoc weighted = model.transform(to_bow(doc, dict));
      for (const auto& [id, weight] : weighted.weights) {
        auto& slot = best[dict.word_of(id)];
        slot = std::max(slot, weight);
      }
    }
  } else {
    double norm_sq = 0.0;
    std::vector<double> scores(dict.size(), 0.0);
    for (std::size_t id = 0; id < dict.size(); ++id) {
      double w = static_cast<double>(dict.cf(static_cast<int>(id))) * model.idf(static_cast<int>(id));
      scores[id] = w;
      norm_sq += w * w;
    }
    if (norm_sq > 0.0) {
      double inv = 1.0 / std::sqrt(norm_sq);
      for (std::size_t id = 0; id < dict.size(); ++id)
        if (scores[id] > 0.0) best[dict.word_of(static_cast<int>(id))] = scores[id] * inv;
    }
  }
  std::vector<std::pair<std::string, double>> ranked;
  for (const auto& [word, score] : best)
    if (score >= threshold) ranked.emplace_back(word, score);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return ranked;
}

// SR keywords (descriptions, optionally augmented with rule rationales) minus
// the words selected for NSR, and vice versa; the lexicons are disjoint.
inline std::pair<Lexicon, Lexicon> build_lexicons(
    const std::vector<ProcessedDoc>& sr_docs, const std::vector<ProcessedDoc>& nsr_docs,
    const std::vector<ProcessedDoc>* rationales, double threshold,
    TfidfAggregation aggregation = TfidfAggregation::MaxPerDocument) {
  std::vector<ProcessedDoc> sr_corpus = sr_docs;
  if (rationales)
    for (const auto& doc : *rationales)
      if (!doc.empty()) sr_corpus.push_back(doc);
  auto sr_ranked = tfidf_keywords(sr_corpus, threshold, aggregation);
  auto nsr_ranked = tfidf_keywords(nsr_docs, threshold, aggregation);

  std::set<std::string> sr_selected, nsr_selected;
  for (const auto& [word, score] : sr_ranked) sr_selected.insert(word);
  for (const auto& [word, score] : nsr_ranked) nsr_selected.insert(word);

  LexiconProvenance provenance = rationales ? LexiconProvenance::DescriptionsAndRationales
                                            : LexiconProvenance::DescriptionsOnly;
  Lexicon sr{Polarity::SR, {}, provenance};
  Lexicon nsr{Polarity::NSR, {}, provenance};
  for (const auto& [word, score] : sr_ranked)
    if (!nsr_selected.count(word)) sr.entries[word] = score;
  for (const auto& [word, score] : nsr_ranked)
    if (!sr_selected.count(word)) nsr.entries[word] = score;
  return {std::move(sr), std::move(nsr)};
}

struct LexiconDecision {
  bool security_relevant = false;
  std::vector<std::string> sr_hits;   // matched stems, with multiplicity
  std::vector<std::string> nsr_hits;

  nlohmann::json to_json() const {
    return {{"security_relevant", security_relevant}, {"sr_hits", sr_hits}, {"nsr_hits", nsr_hits}};
  }
};

// SR iff the document hits the SR lexicon at all and strictly more often than
// the NSR lexicon.
inline LexiconDecision lexicon_classify(const ProcessedDoc& doc, const Lexicon& sr,
                                        const Lexicon& nsr) {
  LexiconDecision decision;
  for (const auto& stem : doc.stems) {
    if (sr.contains(stem)) decision.sr_hits.push_back(stem);
    if (nsr.contains(stem)) decision.nsr_hits.push_back(stem);
  }
  decision.security_relevant =
      !decision.sr_hits.empty() && decision.sr_hits.size() > decision.nsr_hits.size();
  return decision;
}

// Contiguous stem n-grams with frequency >= min_frequency, ranked.
inline std::vector<std::pair<std::string, std::uint64_t>> extract_ngrams(
    const std::vector<ProcessedDoc>& corpus, std::size_t n, std::uint64_t min_frequency) {
  if (n < 2) throw ValidationError("extract_ngrams: n must be at least 2");
  std::map<std::string, std::uint64_t> counts;
  for (const auto& doc : corpus) {
    if (doc.stems.size() < n) continue;
    for (std::size_t i = 0; i + n <= doc.stems.size(); ++i) {
      std::string gram = doc.stems[i];
      for (std::size_t j = 1; j < n; ++j) {
        gram += ' ';
        gram += doc.stems[i + j];
      }
      ++counts[gram];
    }
  }
  std::vector<std::pair<std::string, std::uint64_t>> ranked;
  for (const auto& [gram, count] : counts)
    if (count >= min_frequency) ranked.emplace_back(gram, count);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return ranked;
}

}  // namespace secrel
