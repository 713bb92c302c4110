#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "secrel/diag.hpp"
#include "secrel/hashing.hpp"
#include "secrel/mathx.hpp"
#include "secrel/rng.hpp"
#include "secrel/textprep.hpp"

namespace secrel {

struct LdaConfig {
  int num_topics = 9;
  int passes = 4;
  double eta = 0.0;  // <= 0 selects the symmetric default 1/K
  double threshold = 0.70;
  std::uint64_t seed = 1;
  int estep_max_iters = 50;
  double estep_tolerance = 1e-4;
  bool per_word_topics = true;

  double effective_eta() const { return eta > 0.0 ? eta : 1.0 / static_cast<double>(num_topics); }

  void validate() const {
    if (num_topics < 1) throw ValidationError("lda config: num_topics must be >= 1");
    if (passes < 1) throw ValidationError("lda config: passes must be >= 1");
    if (!(threshold > 0.0 && threshold <= 1.0))
      throw ValidationError("lda config: threshold must be in (0, 1]");
    if (estep_max_iters < 1) throw ValidationError("lda config: estep_max_iters must be >= 1");
    if (!(estep_tolerance > 0.0)) throw ValidationError("lda config: estep_tolerance must be > 0");
  }

  nlohmann::json to_json() const {
    return {{"num_topics", num_topics},
            {"passes", passes},
            {"eta", effective_eta()},
            {"alpha_mode", "asymmetric-learned"},
            {"threshold", threshold},
            {"seed", seed},
            {"estep_max_iters", estep_max_iters},
            {"estep_tolerance", estep_tolerance},
            {"per_word_topics", per_word_topics}};
  }

  static LdaConfig from_json(const nlohmann::json& j) {
    LdaConfig config;
    config.num_topics = j.at("num_topics").get<int>();
    config.passes = j.at("passes").get<int>();
    config.eta = j.at("eta").get<double>();
    config.threshold = j.at("threshold").get<double>();
    config.seed = j.at("seed").get<std::uint64_t>();
    config.estep_max_iters = j.at("estep_max_iters").get<int>();
    config.estep_tolerance = j.at("estep_tolerance").get<double>();
    config.per_word_topics = j.at("per_word_topics").get<bool>();
    config.validate();
    return config;
  }
};

struct TopicDistribution {
  std::string doc_id;
  std::vector<double> probabilities;

  std::size_t top_topic() const {
    std::size_t best = 0;
    for (std::size_t k = 1; k < probabilities.size(); ++k)
      if (probabilities[k] > probabilities[best]) best = k;
    return best;
  }

  double max_probability() const {
    double best = 0.0;
    for (double p : probabilities) best = std::max(best, p);
    return best;
  }
};

struct WordTopics {
  int word_id = -1;
  int top_topic = 0;
  std::vector<double> weights;  // phi row, sums to 1
};

// A document whose every term is unknown to the model's dictionary.
class NoKnownTermsError : public PipelineError {
 public:
  explicit NoKnownTermsError(const std::string& doc_id)
      : PipelineError("no known terms in document" + (doc_id.empty() ? "" : " '" + doc_id + "'")) {}
};

class LdaModel {
 public:
  // Batch variational Bayes over tf-idf weighted documents: per pass, one
  // converged E-step per document, then the lambda M-step and a Minka
  // fixed-point update of the asymmetric alpha.
  static LdaModel train(const std::vector<WeightedDoc>& corpus, Dictionary dict, LdaConfig config) {
    config.validate();
    if (corpus.empty()) throw ValidationError("lda train: empty corpus");
    for (std::size_t d = 0; d < corpus.size(); ++d) {
      if (corpus[d].empty())
        throw ValidationError("lda train: document " + std::to_string(d) + " is empty");
      for (const auto& [id, w] : corpus[d].weights)
        if (id < 0 || static_cast<std::size_t>(id) >= dict.size())
          throw ValidationError("lda train: document " + std::to_string(d) +
                                " references an id outside the dictionary");
    }

    LdaModel model;
    model.config_ = config;
    model.dict_ = std::move(dict);
    const auto K = static_cast<std::size_t>(config.num_topics);
    const std::size_t V = model.dict_.size();
    const double eta = config.effective_eta();

    model.alpha_.resize(K);
    for (std::size_t k = 0; k < K; ++k)
      model.alpha_[k] = 1.0 / (static_cast<double>(k) + 1.0 + std::sqrt(static_cast<double>(K)));

    // Topic-word init: eta plus uniform noise, plus the (scaled) term weights
    // of a few randomly drawn documents per topic. Seeding topics with real
    // documents gives them distinct vocabulary profiles from the start, which
    // the asymmetric-alpha tilt cannot override.
    Rng rng(config.seed);
    model.lambda_.assign(K, std::vector<double>(V));
    for (auto& row : model.lambda_)
      for (double& cell : row) cell = eta + rng.uniform();
    {
      double mean_mass = 0.0;
      for (const auto& doc : corpus)
        for (const auto& [id, w] : doc.weights) mean_mass += w;
      mean_mass /= static_cast<double>(corpus.size());
      const std::size_t seeds_per_topic = std::min<std::size_t>(5, corpus.size());
      const double scale =
          0.5 * static_cast<double>(V) / (static_cast<double>(seeds_per_topic) * mean_mass);
      for (auto& row : model.lambda_)
        for (std::size_t s = 0; s < seeds_per_topic; ++s) {
          const auto& doc = corpus[static_cast<std::size_t>(rng.below(corpus.size()))];
          for (const auto& [id, w] : doc.weights) row[static_cast<std::size_t>(id)] += scale * w;
        }
    }

    std::vector<std::vector<double>> sstats(K, std::vector<double>(V));
    std::vector<double> logphat(K);
    for (int pass = 1; pass <= config.passes; ++pass) {
      model.refresh_elogbeta();
      for (auto& row : sstats) std::fill(row.begin(), row.end(), 0.0);
      std::fill(logphat.begin(), logphat.end(), 0.0);

      for (std::size_t d = 0; d < corpus.size(); ++d) {
        EStepResult estep = model.e_step(corpus[d], pass, static_cast<long>(d));
        const auto& doc = corpus[d].weights;
        for (std::size_t i = 0; i < doc.size(); ++i) {
          const auto v = static_cast<std::size_t>(doc[i].first);
          const double weight = doc[i].second;
          for (std::size_t k = 0; k < K; ++k) sstats[k][v] += weight * estep.phi[i][k];
        }
        double gamma_total = 0.0;
        for (double g : estep.gamma) gamma_total += g;
        const double dig_total = digamma(gamma_total);
        for (std::size_t k = 0; k < K; ++k) logphat[k] += digamma(estep.gamma[k]) - dig_total;
      }

      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t v = 0; v < V; ++v) {
          model.lambda_[k][v] = eta + sstats[k][v];
          if (!std::isfinite(model.lambda_[k][v]))
            throw PipelineError("lda train: non-finite lambda at pass " + std::to_string(pass));
        }

      for (std::size_t k = 0; k < K; ++k) logphat[k] /= static_cast<double>(corpus.size());
      model.update_alpha_minka(logphat, pass);
    }
    model.refresh_elogbeta();
    return model;
  }

  // E-step-only inference; returns the full K-vector.
  TopicDistribution infer(const WeightedDoc& doc, std::string doc_id = {}) const {
    if (doc.empty()) throw NoKnownTermsError(doc_id.empty() ? doc.doc_id : doc_id);
    EStepResult estep = e_step(doc, 0, -1);
    TopicDistribution dist;
    dist.doc_id = doc_id.empty() ? doc.doc_id : std::move(doc_id);
    double total = 0.0;
    for (double g : estep.gamma) total += g;
    dist.probabilities.resize(estep.gamma.size());
    for (std::size_t k = 0; k < estep.gamma.size(); ++k) dist.probabilities[k] = estep.gamma[k] / total;
    return dist;
  }

  // Final-E-step phi row per in-dictionary token; argmax ties resolve to the
  // lowest topic index.
  std::vector<WordTopics> per_word_topics(const WeightedDoc& doc) const {
    if (doc.empty()) throw NoKnownTermsError(doc.doc_id);
    EStepResult estep = e_step(doc, 0, -1);
    std::vector<WordTopics> out;
    out.reserve(doc.weights.size());
    for (std::size_t i = 0; i < doc.weights.size(); ++i) {
      WordTopics wt;
      wt.word_id = doc.weights[i].first;
      wt.weights = estep.phi[i];
      wt.top_topic = 0;
      for (std::size_t k = 1; k < wt.weights.size(); ++k)
        if (wt.weights[k] > wt.weights[static_cast<std::size_t>(wt.top_topic)])
          wt.top_topic = static_cast<int>(k);
      out.push_back(std::move(wt));
    }
    return out;
  }

  // Highest-probability words of one topic's expected word distribution.
  std::vector<std::pair<std::string, double>> top_terms(int topic, std::size_t n) const {
    if (topic < 0 || static_cast<std::size_t>(topic) >= lambda_.size())
      throw ValidationError("top_terms: topic index out of range");
    const auto& row = lambda_[static_cast<std::size_t>(topic)];
    double total = 0.0;
    for (double cell : row) total += cell;
    std::vector<std::pair<int, double>> scored(row.size());
    for (std::size_t v = 0; v < row.size(); ++v)
      scored[v] = {static_cast<int>(v), row[v] / total};
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (scored.size() > n) scored.resize(n);
    std::vector<std::pair<std::string, double>> out;
    out.reserve(scored.size());
    for (const auto& [id, p] : scored) out.emplace_back(dict_.word_of(id), p);
    return out;
  }

  std::vector<double> expected_topic_word(int topic) const {
    const auto& row = lambda_.at(static_cast<std::size_t>(topic));
    double total = 0.0;
    for (double cell : row) total += cell;
    std::vector<double> out(row.size());
    for (std::size_t v = 0; v < row.size(); ++v) out[v] = row[v] / total;
    return out;
  }

  int num_topics() const { return config_.num_topics; }
  std::size_t vocab_size() const { return dict_.size(); }
  const LdaConfig& config() const { return config_; }

  void set_threshold(double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0))
      throw ValidationError("lda: threshold must be in (0, 1]");
    config_.threshold = threshold;
  }
  const Dictionary& dictionary() const { return dict_; }
  const std::vector<double>& alpha() const { return alpha_; }
  const std::vector<std::vector<double>>& lambda() const { return lambda_; }

  nlohmann::json to_json() const {
    return {{"format", "secrel-lda-1"},
            {"config", config_.to_json()},
            {"dictionary_hash", to_hex(dict_.digest())},
            {"alpha", alpha_},
            {"lambda", lambda_}};
  }

  static LdaModel from_json(const nlohmann::json& j, Dictionary dict) {
    if (j.value("format", "") != "secrel-lda-1")
      throw ValidationError("lda model: unknown format");
    if (j.at("dictionary_hash").get<std::string>() != to_hex(dict.digest()))
      throw ValidationError("lda model: dictionary hash mismatch; refusing to load");
    LdaModel model;
    model.config_ = LdaConfig::from_json(j.at("config"));
    model.dict_ = std::move(dict);
    model.alpha_ = j.at("alpha").get<std::vector<double>>();
    model.lambda_ = j.at("lambda").get<std::vector<std::vector<double>>>();
    const auto K = static_cast<std::size_t>(model.config_.num_topics);
    if (model.alpha_.size() != K || model.lambda_.size() != K)
      throw ValidationError("lda model: topic count mismatch");
    for (const auto& row : model.lambda_)
      if (row.size() != model.dict_.size())
        throw ValidationError("lda model: vocabulary size mismatch");
    model.refresh_elogbeta();
    return model;
  }

 private:
  struct EStepResult {
    std::vector<double> gamma;
    std::vector<std::vector<double>> phi;  // term-major
  };

  // Converged (gamma, phi) for one document; the per-document evidence bound
  // must not decrease across iterations (tolerance 1e-8, scale-adjusted).
  EStepResult e_step(const WeightedDoc& doc, int pass, long doc_index) const {
    const std::size_t K = alpha_.size();
    const std::size_t T = doc.weights.size();
    EStepResult result;
    result.phi.assign(T, std::vector<double>(K, 1.0 / static_cast<double>(K)));
    double doc_total = 0.0;
    for (const auto& [id, w] : doc.weights) doc_total += w;
    result.gamma.resize(K);
    for (std::size_t k = 0; k < K; ++k)
      result.gamma[k] = alpha_[k] + doc_total / static_cast<double>(K);

    std::vector<double> elogtheta(K);
    std::vector<double> logphi(K);
    double previous_bound = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < config_.estep_max_iters; ++iter) {
      double gamma_total = 0.0;
      for (double g : result.gamma) gamma_total += g;
      const double dig_total = digamma(gamma_total);
      for (std::size_t k = 0; k < K; ++k) elogtheta[k] = digamma(result.gamma[k]) - dig_total;

      std::vector<double> new_gamma(alpha_);
      for (std::size_t i = 0; i < T; ++i) {
        const auto v = static_cast<std::size_t>(doc.weights[i].first);
        const double weight = doc.weights[i].second;
        double max_log = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < K; ++k) {
          logphi[k] = elogtheta[k] + elogbeta_[k][v];
          max_log = std::max(max_log, logphi[k]);
        }
        double norm = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          result.phi[i][k] = std::exp(logphi[k] - max_log);
          norm += result.phi[i][k];
        }
        for (std::size_t k = 0; k < K; ++k) {
          result.phi[i][k] /= norm;
          new_gamma[k] += weight * result.phi[i][k];
        }
      }

      double mean_change = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        mean_change += std::abs(new_gamma[k] - result.gamma[k]);
        if (!std::isfinite(new_gamma[k]))
          throw PipelineError("lda e-step: non-finite gamma at pass " + std::to_string(pass) +
                              ", document " + std::to_string(doc_index));
      }
      mean_change /= static_cast<double>(K);
      result.gamma = std::move(new_gamma);

      const double bound = document_bound(doc, result);
      if (bound + 1e-8 * (1.0 + std::abs(previous_bound)) < previous_bound)
        throw PipelineError("lda e-step: evidence bound decreased at pass " +
                            std::to_string(pass) + ", document " + std::to_string(doc_index));
      previous_bound = bound;

      if (mean_change < config_.estep_tolerance) break;
    }
    return result;
  }

  // Document part of the variational bound, with lambda held fixed.
  double document_bound(const WeightedDoc& doc, const EStepResult& state) const {
    const std::size_t K = alpha_.size();
    double gamma_total = 0.0, alpha_total = 0.0;
    for (double g : state.gamma) gamma_total += g;
    for (double a : alpha_) alpha_total += a;
    const double dig_total = digamma(gamma_total);

    double bound = std::lgamma(alpha_total) - std::lgamma(gamma_total);
    std::vector<double> elogtheta(K);
    for (std::size_t k = 0; k < K; ++k) {
      elogtheta[k] = digamma(state.gamma[k]) - dig_total;
      bound += std::lgamma(state.gamma[k]) - std::lgamma(alpha_[k]);
      bound += (alpha_[k] - state.gamma[k]) * elogtheta[k];
    }
    for (std::size_t i = 0; i < doc.weights.size(); ++i) {
      const auto v = static_cast<std::size_t>(doc.weights[i].first);
      const double weight = doc.weights[i].second;
      for (std::size_t k = 0; k < K; ++k) {
        const double phi = state.phi[i][k];
        if (phi <= 0.0) continue;
        bound += weight * phi * (elogtheta[k] + elogbeta_[k][v] - std::log(phi));
      }
    }
    return bound;
  }

  // One Minka fixed-point step per pass for the Dirichlet MLE given mean log
  // topic proportions: psi(alpha_k') = psi(sum alpha) + logphat_k. A single
  // step per pass keeps the prior from racing ahead of the still-forming
  // topics; alpha stays strictly positive (floored at 1e-8).
  void update_alpha_minka(const std::vector<double>& logphat, int pass) {
    double alpha_total = 0.0;
    for (double a : alpha_) alpha_total += a;
    const double psi_total = digamma(alpha_total);
    for (std::size_t k = 0; k < alpha_.size(); ++k) {
      double updated = inverse_digamma(psi_total + logphat[k]);
      if (!(updated > 1e-8)) updated = 1e-8;
      if (!std::isfinite(updated))
        throw PipelineError("lda alpha update: non-finite alpha at pass " + std::to_string(pass));
      alpha_[k] = updated;
    }
  }

  void refresh_elogbeta() {
    const std::size_t K = lambda_.size();
    elogbeta_.assign(K, std::vector<double>(lambda_.empty() ? 0 : lambda_[0].size()));
    for (std::size_t k = 0; k < K; ++k) {
      double total = 0.0;
      for (double cell : lambda_[k]) total += cell;
      const double dig_total = digamma(total);
      for (std::size_t v = 0; v < lambda_[k].size(); ++v)
        elogbeta_[k][v] = digamma(lambda_[k][v]) - dig_total;
    }
  }

  LdaConfig config_;
  Dictionary dict_;
  std::vector<double> alpha_;
  std::vector<std::vector<double>> lambda_;    // K x V variational parameters
  std::vector<std::vector<double>> elogbeta_;  // cached expectations
};

struct LdaDecision {
  bool security_relevant = false;
  bool no_known_terms = false;
  TopicDistribution topics;
};

// SR iff the maximum topic probability reaches the configured threshold.
// Documents with no in-dictionary terms classify as NSR with a warning flag.
inline LdaDecision lda_classify(const LdaModel& model, const WeightedDoc& doc,
                                std::string doc_id = {}) {
  LdaDecision decision;
  try {
    decision.topics = model.infer(doc, std::move(doc_id));
  } catch (const NoKnownTermsError&) {
    decision.no_known_terms = true;
    decision.topics.probabilities.assign(static_cast<std::size_t>(model.num_topics()), 0.0);
    return decision;
  }
  decision.security_relevant = decision.topics.max_probability() >= model.config().threshold;
  return decision;
}

}  // namespace secrel
