#include <cmath>
#include <set>

#include <catch2/catch_amalgamated.hpp>

#include "secrel/textprep.hpp"

using namespace secrel;

namespace {

std::vector<ProcessedDoc> docs_from(std::initializer_list<const char*> texts) {
  // Stems given directly, bypassing the pipeline: toy corpora for the
  // dictionary and tf-idf oracles.
  std::vector<ProcessedDoc> corpus;
  for (const char* text : texts) {
    ProcessedDoc doc;
    std::string current;
    for (const char* p = text;; ++p) {
      if (*p == ' ' || *p == '\0') {
        if (!current.empty()) doc.stems.push_back(current);
        current.clear();
        if (*p == '\0') break;
      } else {
        current += *p;
      }
    }
    corpus.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace

TEST_CASE("preprocess: pipeline example") {
  Preprocessor prep;
  auto doc = prep.run("Disables the lock screen camera toggle switch");
  std::set<std::string> stems(doc.stems.begin(), doc.stems.end());
  for (const char* expected : {"lock", "screen", "camera", "toggl", "switch"}) {
    INFO(expected);
    CHECK(stems.count(expected) == 1);
  }
  CHECK(stems.count("the") == 0);
}

TEST_CASE("preprocess: stopwords and short tokens vanish") {
  Preprocessor prep;
  CHECK(prep.run("a I x").stems.empty());
}

TEST_CASE("preprocess: 17-character tokens are dropped") {
  Preprocessor prep;
  CHECK(prep.run("supercalifragilis").stems.empty());   // 17 chars
  CHECK(prep.run("supercalifragili").stems.size() == 1);  // 16 chars kept
}

TEST_CASE("preprocess: manual stoplist drops stems") {
  WordList stoplist;
  stoplist.add("password");
  stoplist.add("kilobyt");
  Preprocessor prep = Preprocessor::with_stoplist(stoplist);
  auto doc = prep.run("The password is limited to kilobytes of camera data");
  std::set<std::string> stems(doc.stems.begin(), doc.stems.end());
  CHECK(stems.count("password") == 0);
  CHECK(stems.count("kilobyt") == 0);
  CHECK(stems.count("camera") == 1);
}

TEST_CASE("preprocess: idempotent on its own output") {
  Preprocessor prep;
  const char* samples[] = {
      "Disables the lock screen camera toggle switch in PC Settings and prevents a camera "
      "from being invoked on the lock screen.",
      "Forces Windows to use the specified colors for the background and accent.",
      "This policy setting allows an attacker to exploit elevated installation privileges.",
      "Autoplay begins reading from a drive as soon as you insert media in the drive.",
  };
  for (const char* text : samples) {
    auto once = prep.run(text);
    std::string rejoined;
    for (const auto& stem : once.stems) rejoined += stem + " ";
    auto twice = prep.run(rejoined);
    CHECK(once.stems == twice.stems);
  }
}

TEST_CASE("frequent_stems: counting and ties") {
  auto corpus = docs_from({"a b b", "b c"});
  auto top = frequent_stems(corpus, 1);
  REQUIRE(top.size() == 1);
  CHECK(top[0].first == "b");
  CHECK(top[0].second == 3);

  auto all = frequent_stems(corpus, 10);
  REQUIRE(all.size() == 3);  // n beyond vocabulary returns everything
  CHECK(all[0].first == "b");
  CHECK(all[1].first == "a");  // tie a/c broken lexicographically
  CHECK(all[2].first == "c");
}

TEST_CASE("dictionary: ids, df and cf") {
  auto corpus = docs_from({"a b", "a c"});
  Dictionary dict = Dictionary::build(corpus);
  CHECK(dict.size() == 3);
  REQUIRE(dict.id_of("a") >= 0);
  CHECK(dict.df(dict.id_of("a")) == 2);
  CHECK(dict.df(dict.id_of("b")) == 1);
  CHECK(dict.df(dict.id_of("c")) == 1);
  CHECK(dict.cf(dict.id_of("a")) == 2);
  CHECK(dict.corpus_size() == 2);
  CHECK(dict.word_of(0) == "a");  // sorted-vocabulary assignment
  CHECK(dict.word_of(1) == "b");
  CHECK(dict.word_of(2) == "c");
}

TEST_CASE("dictionary: id assignment ignores document order") {
  auto forward = docs_from({"delta alpha", "beta gamma"});
  auto reversed = docs_from({"beta gamma", "delta alpha"});
  Dictionary d1 = Dictionary::build(forward);
  Dictionary d2 = Dictionary::build(reversed);
  for (const char* word : {"alpha", "beta", "gamma", "delta"})
    CHECK(d1.id_of(word) == d2.id_of(word));
  CHECK(d1.digest() == d2.digest());
}

TEST_CASE("dictionary: empty vocabulary is an error") {
  std::vector<ProcessedDoc> corpus(2);
  CHECK_THROWS_AS(Dictionary::build(corpus), ValidationError);
}

TEST_CASE("dictionary: json round trip preserves digest") {
  auto corpus = docs_from({"a b", "a c"});
  Dictionary dict = Dictionary::build(corpus);
  Dictionary back = Dictionary::from_json(dict.to_json());
  CHECK(back.digest() == dict.digest());
  CHECK(back.id_of("c") == dict.id_of("c"));
}

TEST_CASE("to_bow: exact counts, unseen words dropped") {
  auto corpus = docs_from({"a b", "a c"});
  Dictionary dict = Dictionary::build(corpus);
  auto doc = docs_from({"a a b"})[0];
  BowVector bow = to_bow(doc, dict);
  REQUIRE(bow.size() == 2);
  CHECK(bow[0].first == dict.id_of("a"));
  CHECK(bow[0].second == 2);
  CHECK(bow[1].second == 1);

  auto unseen = docs_from({"zz yy"})[0];
  CHECK(to_bow(unseen, dict).empty());

  std::uint64_t total = 0;
  for (const auto& [id, count] : bow) total += count;
  CHECK(total == doc.stems.size());
}

TEST_CASE("tfidf: two-document oracle") {
  // D1 = "a b", D2 = "a c": idf(a) = log2(2/2) = 0, idf(b) = idf(c) = 1.
  auto corpus = docs_from({"a b", "a c"});
  Dictionary dict = Dictionary::build(corpus);
  TfidfModel model = TfidfModel::fit(dict);
  WeightedDoc d1 = model.transform(to_bow(corpus[0], dict));
  REQUIRE(d1.weights.size() == 1);
  CHECK(d1.weights[0].first == dict.id_of("b"));
  CHECK(d1.weights[0].second == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tfidf: single-document corpus transforms to empty") {
  auto corpus = docs_from({"a b c"});
  Dictionary dict = Dictionary::build(corpus);
  TfidfModel model = TfidfModel::fit(dict);
  CHECK(model.transform(to_bow(corpus[0], dict)).empty());
}

TEST_CASE("tfidf: vectors are L2-normalized or empty") {
  auto corpus = docs_from({"a b b c", "a d e", "f g h", "b d f h"});
  Dictionary dict = Dictionary::build(corpus);
  TfidfModel model = TfidfModel::fit(dict);
  for (const auto& doc : corpus) {
    WeightedDoc w = model.transform(to_bow(doc, dict));
    if (w.empty()) continue;
    double norm_sq = 0.0;
    for (const auto& [id, weight] : w.weights) {
      norm_sq += weight * weight;
      CHECK(weight > 0.0);
    }
    CHECK(std::abs(std::sqrt(norm_sq) - 1.0) < 1e-9);
  }
}
