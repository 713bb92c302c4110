#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "secrel/lda.hpp"
#include "secrel/rng.hpp"

using namespace secrel;

namespace {

struct SyntheticCorpus {
  std::vector<std::string> vocab_a;
  std::vector<std::string> vocab_b;
  std::vector<ProcessedDoc> docs;
  Dictionary dict;
  TfidfModel tfidf;
  std::vector<WeightedDoc> weighted;
  Rng gen{42};

  ProcessedDoc make_doc(const std::vector<std::string>& vocab, int n) {
    ProcessedDoc doc;
    for (int i = 0; i < n; ++i)
      doc.stems.push_back(vocab[static_cast<std::size_t>(gen.below(vocab.size()))]);
    return doc;
  }

  WeightedDoc weigh(const ProcessedDoc& doc) { return tfidf.transform(to_bow(doc, dict)); }
};

SyntheticCorpus make_two_topic_corpus(int docs_per_topic, int words_per_doc) {
  SyntheticCorpus corpus;
  for (int i = 0; i < 50; ++i) {
    corpus.vocab_a.push_back("alpha" + std::to_string(i));
    corpus.vocab_b.push_back("beta" + std::to_string(i));
  }
  for (int i = 0; i < docs_per_topic; ++i)
    corpus.docs.push_back(corpus.make_doc(corpus.vocab_a, words_per_doc));
  for (int i = 0; i < docs_per_topic; ++i)
    corpus.docs.push_back(corpus.make_doc(corpus.vocab_b, words_per_doc));
  corpus.dict = Dictionary::build(corpus.docs);
  corpus.tfidf = TfidfModel::fit(corpus.dict);
  for (const auto& doc : corpus.docs) corpus.weighted.push_back(corpus.weigh(doc));
  return corpus;
}

}  // namespace

TEST_CASE("lda: two-topic synthetic corpus separates") {
  SyntheticCorpus corpus = make_two_topic_corpus(100, 40);
  LdaConfig config;
  config.num_topics = 2;
  config.passes = 4;
  config.seed = 7;
  LdaModel model = LdaModel::train(corpus.weighted, corpus.dict, config);

  int topic_a = static_cast<int>(model.infer(corpus.weighted[0]).top_topic());
  int aligned = 0, confident = 0;
  const int held_out = 40;
  for (int i = 0; i < held_out / 2; ++i) {
    auto pa = model.infer(corpus.weigh(corpus.make_doc(corpus.vocab_a, 40)));
    auto pb = model.infer(corpus.weigh(corpus.make_doc(corpus.vocab_b, 40)));
    aligned += static_cast<int>(pa.top_topic()) == topic_a;
    aligned += static_cast<int>(pb.top_topic()) == 1 - topic_a;
    confident += pa.max_probability() >= 0.9;
    confident += pb.max_probability() >= 0.9;
  }
  CHECK(aligned >= held_out * 95 / 100);
  CHECK(confident >= held_out * 95 / 100);

  // topic terms come from the matching vocabulary
  for (const auto& [word, p] : model.top_terms(topic_a, 5))
    CHECK(word.rfind("alpha", 0) == 0);
}

TEST_CASE("lda: distributions and topic-word rows normalize") {
  SyntheticCorpus corpus = make_two_topic_corpus(50, 30);
  LdaConfig config;
  config.num_topics = 3;
  config.passes = 3;
  config.seed = 11;
  LdaModel model = LdaModel::train(corpus.weighted, corpus.dict, config);

  for (int k = 0; k < model.num_topics(); ++k) {
    auto row = model.expected_topic_word(k);
    double total = 0.0;
    for (double p : row) {
      CHECK(p >= 0.0);
      total += p;
    }
    CHECK(std::abs(total - 1.0) < 1e-6);
  }
  for (std::size_t d = 0; d < corpus.weighted.size(); d += 7) {
    TopicDistribution dist = model.infer(corpus.weighted[d]);
    double total = 0.0;
    for (double p : dist.probabilities) {
      CHECK(p >= 0.0);
      total += p;
    }
    CHECK(std::abs(total - 1.0) < 1e-6);
    CHECK(dist.probabilities.size() == 3);  // full K vector, no truncation
  }
  for (double a : model.alpha()) CHECK(a > 0.0);
}

TEST_CASE("lda: training is bit-deterministic under a fixed seed") {
  SyntheticCorpus corpus = make_two_topic_corpus(40, 25);
  LdaConfig config;
  config.num_topics = 2;
  config.passes = 3;
  config.seed = 21;
  LdaModel first = LdaModel::train(corpus.weighted, corpus.dict, config);
  LdaModel second = LdaModel::train(corpus.weighted, corpus.dict, config);
  CHECK(first.alpha() == second.alpha());
  CHECK(first.lambda() == second.lambda());

  config.seed = 22;
  LdaModel third = LdaModel::train(corpus.weighted, corpus.dict, config);
  CHECK(first.lambda() != third.lambda());
}

TEST_CASE("lda: K=1 degenerates to a single certain topic") {
  SyntheticCorpus corpus = make_two_topic_corpus(20, 20);
  LdaConfig config;
  config.num_topics = 1;
  config.passes = 2;
  config.seed = 5;
  LdaModel model = LdaModel::train(corpus.weighted, corpus.dict, config);
  TopicDistribution dist = model.infer(corpus.weighted[3]);
  REQUIRE(dist.probabilities.size() == 1);
  CHECK(dist.probabilities[0] == Catch::Approx(1.0));
  for (const auto& wt : model.per_word_topics(corpus.weighted[3])) CHECK(wt.top_topic == 0);
}

TEST_CASE("lda: train rejects empty corpora and empty documents") {
  SyntheticCorpus corpus = make_two_topic_corpus(10, 10);
  LdaConfig config;
  config.num_topics = 2;
  CHECK_THROWS_AS(LdaModel::train({}, corpus.dict, config), ValidationError);
  std::vector<WeightedDoc> with_empty = corpus.weighted;
  with_empty[4].weights.clear();
  CHECK_THROWS_WITH(LdaModel::train(with_empty, corpus.dict, config),
                    Catch::Matchers::ContainsSubstring("document 4"));
}

TEST_CASE("lda: config validation") {
  LdaConfig config;
  config.num_topics = 0;
  CHECK_THROWS_AS(config.validate(), ValidationError);
  config = LdaConfig{};
  config.threshold = 1.5;
  CHECK_THROWS_AS(config.validate(), ValidationError);
  config = LdaConfig{};
  config.passes = 0;
  CHECK_THROWS_AS(config.validate(), ValidationError);
}

TEST_CASE("lda: inference on unknown-only documents raises") {
  SyntheticCorpus corpus = make_two_topic_corpus(20, 20);
  LdaConfig config;
  config.num_topics = 2;
  config.seed = 3;
  LdaModel model = LdaModel::train(corpus.weighted, corpus.dict, config);
  WeightedDoc empty;
  empty.doc_id = "unseen";
  CHECK_THROWS_AS(model.infer(empty), NoKnownTermsError);
  CHECK_THROWS_WITH(model.infer(empty), Catch::Matchers::ContainsSubstring("no known terms"));
}

TEST_CASE("lda: per-word topics align with source vocabularies") {
  SyntheticCorpus corpus = make_two_topic_corpus(100, 40);
  LdaConfig config;
  config.num_topics = 2;
  config.passes = 4;
  config.seed = 7;
  LdaModel model = LdaModel::train(corpus.weighted, corpus.dict, config);
  int topic_a = static_cast<int>(model.infer(corpus.weighted[0]).top_topic());

  ProcessedDoc mixed;
  mixed.stems = {"alpha1", "alpha2", "beta1", "beta2"};
  WeightedDoc weighted = corpus.weigh(mixed);
  auto word_topics = model.per_word_topics(weighted);
  REQUIRE(word_topics.size() == 4);
  for (const auto& wt : word_topics) {
    const std::string& word = corpus.dict.word_of(wt.word_id);
    double total = 0.0;
    for (double w : wt.weights) total += w;
    CHECK(std::abs(total - 1.0) < 1e-9);
    if (word.rfind("alpha", 0) == 0)
      CHECK(wt.top_topic == topic_a);
    else
      CHECK(wt.top_topic == 1 - topic_a);
  }
}

TEST_CASE("lda: per-word tie resolves to the lowest topic index") {
  // hand-built model with identical topic rows: phi is exactly uniform
  std::vector<ProcessedDoc> docs(2);
  docs[0].stems = {"aa", "bb"};
  docs[1].stems = {"aa", "cc"};
  Dictionary dict = Dictionary::build(docs);
  nlohmann::json j = {{"format", "secrel-lda-1"},
                      {"dictionary_hash", to_hex(dict.digest())},
                      {"alpha", {0.5, 0.5}},
                      {"lambda", {{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}}},
                      {"config",
                       {{"num_topics", 2},
                        {"passes", 1},
                        {"eta", 0.5},
                        {"threshold", 0.7},
                        {"seed", 1},
                        {"estep_max_iters", 50},
                        {"estep_tolerance", 1e-4},
                        {"per_word_topics", true}}}};
  LdaModel model = LdaModel::from_json(j, dict);
  WeightedDoc doc;
  doc.weights = {{0, 1.0}};
  auto word_topics = model.per_word_topics(doc);
  REQUIRE(word_topics.size() == 1);
  CHECK(word_topics[0].weights[0] == Catch::Approx(word_topics[0].weights[1]));
  CHECK(word_topics[0].top_topic == 0);
}

TEST_CASE("lda: top_terms bounds and ordering") {
  SyntheticCorpus corpus = make_two_topic_corpus(30, 20);
  LdaConfig config;
  config.num_topics = 2;
  config.seed = 13;
  LdaModel model = LdaModel::train(corpus.weighted, corpus.dict, config);
  CHECK_THROWS_AS(model.top_terms(2, 5), ValidationError);
  CHECK_THROWS_AS(model.top_terms(-1, 5), ValidationError);
  auto all = model.top_terms(0, corpus.dict.size() + 10);
  CHECK(all.size() == corpus.dict.size());
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].second >= all[i].second);
}

TEST_CASE("lda_classify: threshold semantics") {
  SyntheticCorpus corpus = make_two_topic_corpus(100, 40);
  LdaConfig config;
  config.num_topics = 2;
  config.passes = 4;
  config.seed = 7;
  config.threshold = 0.70;
  LdaModel model = LdaModel::train(corpus.weighted, corpus.dict, config);

  // a pure document clears the threshold
  WeightedDoc pure = corpus.weigh(corpus.make_doc(corpus.vocab_a, 40));
  LdaDecision on = lda_classify(model, pure);
  CHECK(on.security_relevant);
  CHECK(on.topics.max_probability() >= 0.9);

  // an evenly mixed document splits its mass and stays below 0.70
  ProcessedDoc mixed;
  for (int i = 0; i < 20; ++i) {
    mixed.stems.push_back(corpus.vocab_a[static_cast<std::size_t>(i)]);
    mixed.stems.push_back(corpus.vocab_b[static_cast<std::size_t>(i)]);
  }
  LdaDecision off = lda_classify(model, corpus.weigh(mixed));
  CHECK(off.topics.max_probability() < 0.70);
  CHECK(!off.security_relevant);

  // documents with no known terms classify NSR with the warning flag
  WeightedDoc unknown;
  LdaDecision flagged = lda_classify(model, unknown);
  CHECK(!flagged.security_relevant);
  CHECK(flagged.no_known_terms);
}

TEST_CASE("lda_classify: threshold zero accepts every non-empty document") {
  SyntheticCorpus corpus = make_two_topic_corpus(20, 20);
  LdaConfig config;
  config.num_topics = 2;
  config.seed = 9;
  config.threshold = 1e-9;
  LdaModel model = LdaModel::train(corpus.weighted, corpus.dict, config);
  for (std::size_t d = 0; d < corpus.weighted.size(); d += 5)
    CHECK(lda_classify(model, corpus.weighted[d]).security_relevant);
}

TEST_CASE("lda: model persistence round trip") {
  SyntheticCorpus corpus = make_two_topic_corpus(30, 20);
  LdaConfig config;
  config.num_topics = 2;
  config.passes = 2;
  config.seed = 17;
  LdaModel model = LdaModel::train(corpus.weighted, corpus.dict, config);
  nlohmann::json j = model.to_json();
  LdaModel back = LdaModel::from_json(j, corpus.dict);
  CHECK(back.alpha() == model.alpha());
  CHECK(back.lambda() == model.lambda());
  TopicDistribution a = model.infer(corpus.weighted[2]);
  TopicDistribution b = back.infer(corpus.weighted[2]);
  CHECK(a.probabilities == b.probabilities);
}

TEST_CASE("lda: loading against a different dictionary is refused") {
  SyntheticCorpus corpus = make_two_topic_corpus(30, 20);
  LdaConfig config;
  config.num_topics = 2;
  config.seed = 17;
  LdaModel model = LdaModel::train(corpus.weighted, corpus.dict, config);
  nlohmann::json j = model.to_json();

  std::vector<ProcessedDoc> other_docs(2);
  other_docs[0].stems = {"x", "y"};
  other_docs[1].stems = {"x", "z"};
  Dictionary other = Dictionary::build(other_docs);
  CHECK_THROWS_WITH(LdaModel::from_json(j, other),
                    Catch::Matchers::ContainsSubstring("dictionary hash mismatch"));
}
