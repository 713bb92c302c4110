#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "secrel/dataset.hpp"
#include "secrel/diag.hpp"
#include "secrel/lda.hpp"
#include "secrel/lexicon.hpp"
#include "secrel/rng.hpp"

namespace secrel {

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::string name() const = 0;

  // Description-based predicate. Identity-keyed classifiers (prediction
  // lookups) override classify() instead.
  virtual bool classify_text(const std::string& description) const = 0;
  virtual bool classify(const LabeledSetting& item) const { return classify_text(item.description); }

  // Topic distribution for topic-based classifiers; nullopt otherwise.
  virtual std::optional<TopicDistribution> explain(const LabeledSetting& item) const {
    (void)item;
    return std::nullopt;
  }
};

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
};

struct MetricsReport {
  ConfusionMatrix confusion;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  double balanced_accuracy = 0.0;
  std::uint64_t classified_sr_count = 0;
  std::string dataset_id;
  std::string classifier_id;
  std::uint64_t dataset_size = 0;
  std::uint64_t dataset_sr_count = 0;
  std::vector<std::string> flags;     // undefined metrics, degraded runs
  std::vector<std::string> failures;  // settings whose classification threw

  nlohmann::json to_json() const {
    return {{"dataset", dataset_id},
            {"classifier", classifier_id},
            {"confusion", {{"tp", confusion.tp}, {"fp", confusion.fp}, {"tn", confusion.tn}, {"fn", confusion.fn}}},
            {"recall", recall},
            {"precision", precision},
            {"f1", f1},
            {"balanced_accuracy", balanced_accuracy},
            {"classified_sr_count", classified_sr_count},
            {"dataset_size", dataset_size},
            {"dataset_sr_count", dataset_sr_count},
            {"flags", flags},
            {"failures", failures}};
  }
};

// Metric definitions shared by every evaluation path. Empty denominators
// yield 0 with a flag rather than NaN.
inline MetricsReport metrics_from_confusion(const ConfusionMatrix& confusion) {
  MetricsReport report;
  report.confusion = confusion;
  report.classified_sr_count = confusion.tp + confusion.fp;
  report.dataset_size = confusion.total();
  report.dataset_sr_count = confusion.tp + confusion.fn;

  const std::uint64_t positives = confusion.tp + confusion.fn;
  const std::uint64_t negatives = confusion.tn + confusion.fp;
  if (positives > 0) {
    report.recall = static_cast<double>(confusion.tp) / static_cast<double>(positives);
  } else {
    report.flags.push_back("recall-undefined");
  }
  if (confusion.tp + confusion.fp > 0) {
    report.precision =
        static_cast<double>(confusion.tp) / static_cast<double>(confusion.tp + confusion.fp);
  } else {
    report.flags.push_back("precision-undefined");
  }
  if (report.precision + report.recall > 0.0) {
    report.f1 = 2.0 * report.precision * report.recall / (report.precision + report.recall);
  } else {
    report.flags.push_back("f1-undefined");
  }
  if (positives > 0 && negatives > 0) {
    const double tpr = static_cast<double>(confusion.tp) / static_cast<double>(positives);
    const double tnr = static_cast<double>(confusion.tn) / static_cast<double>(negatives);
    report.balanced_accuracy = 0.5 * (tpr + tnr);
  } else {
    report.flags.push_back("balanced-accuracy-undefined");
  }
  return report;
}

inline std::string dataset_identifier(const LabeledDataset& ds) {
  std::string id = ds.os_label.empty() ? "unnamed" : ds.os_label;
  if (!ds.guide_publisher.empty()) id += " / " + ds.guide_publisher;
  return id;
}

// Every item is classified exactly once; classifier exceptions count as NSR
// predictions and mark the report degraded.
inline MetricsReport evaluate(const Classifier& classifier, const LabeledDataset& ds) {
  if (ds.items.empty()) throw ValidationError("evaluate: empty dataset");
  ConfusionMatrix confusion;
  std::vector<std::string> failures;
  for (const auto& item : ds.items) {
    bool predicted = false;
    try {
      predicted = classifier.classify(item);
    } catch (const std::exception&) {
      failures.push_back(item.setting);
      predicted = false;
    }
    if (item.is_security_relevant)
      (predicted ? confusion.tp : confusion.fn) += 1;
    else
      (predicted ? confusion.fp : confusion.tn) += 1;
  }
  MetricsReport report = metrics_from_confusion(confusion);
  report.dataset_id = dataset_identifier(ds);
  report.classifier_id = classifier.name();
  report.failures = std::move(failures);
  if (!report.failures.empty()) report.flags.push_back("degraded");
  return report;
}

// Labels each item SR independently with probability x. Draws derive from
// (seed, item content) so evaluation order and parallelism cannot change them.
class UniformDummyClassifier : public Classifier {
 public:
  UniformDummyClassifier(double x, std::uint64_t seed) : x_(x), seed_(seed) {
    if (x < 0.0 || x > 1.0) throw ValidationError("uniform dummy: x must be in [0, 1]");
  }

  std::string name() const override {
    char buf[48];
    std::snprintf(buf, sizeof buf, "uniform-dummy(x=%.3g)", x_);
    return buf;
  }

  bool classify_text(const std::string& description) const override {
    return to_unit_interval(mix64(seed_, fnv1a64(description))) < x_;
  }

  bool classify(const LabeledSetting& item) const override {
    std::uint64_t h = fnv1a64(item.setting, fnv1a64(item.description));
    h = fnv1a64(hive_name(item.hive), h);
    return to_unit_interval(mix64(seed_, h)) < x_;
  }

  double x() const { return x_; }

 private:
  double x_;
  std::uint64_t seed_;
};

inline UniformDummyClassifier uniform_dummy(double x, std::uint64_t seed) {
  return UniformDummyClassifier(x, seed);
}

struct MeanMetrics {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  double balanced_accuracy = 0.0;
  double classified_sr_count = 0.0;
};

struct DummySweep {
  struct Row {
    double x = 0.0;
    MeanMetrics mean;
  };
  std::vector<Row> rows;
  std::size_t best_index = 0;  // by mean F1, earlier grid entry on ties

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows)
      arr.push_back({{"x", row.x},
                     {"recall", row.mean.recall},
                     {"precision", row.mean.precision},
                     {"f1", row.mean.f1},
                     {"balanced_accuracy", row.mean.balanced_accuracy},
                     {"classified_sr_count", row.mean.classified_sr_count}});
    return {{"rows", arr}, {"best_x", rows.at(best_index).x}};
  }
};

// Averages dummy metrics over seeds for each grid point and selects the
// best-performing x by mean F1.
inline DummySweep sweep_dummy(const LabeledDataset& ds, const std::vector<double>& x_grid,
                              const std::vector<std::uint64_t>& seeds) {
  if (x_grid.empty()) throw ValidationError("sweep_dummy: empty grid");
  if (seeds.empty()) throw ValidationError("sweep_dummy: no seeds");
  DummySweep sweep;
  for (double x : x_grid) {
    DummySweep::Row row;
    row.x = x;
    for (std::uint64_t seed : seeds) {
      MetricsReport report = evaluate(uniform_dummy(x, seed), ds);
      row.mean.recall += report.recall;
      row.mean.precision += report.precision;
      row.mean.f1 += report.f1;
      row.mean.balanced_accuracy += report.balanced_accuracy;
      row.mean.classified_sr_count += static_cast<double>(report.classified_sr_count);
    }
    const double n = static_cast<double>(seeds.size());
    row.mean.recall /= n;
    row.mean.precision /= n;
    row.mean.f1 /= n;
    row.mean.balanced_accuracy /= n;
    row.mean.classified_sr_count /= n;
    sweep.rows.push_back(row);
  }
  for (std::size_t i = 1; i < sweep.rows.size(); ++i)
    if (sweep.rows[i].mean.f1 > sweep.rows[sweep.best_index].mean.f1) sweep.best_index = i;
  return sweep;
}

// One report per dataset with a fixed classifier (Table-1-style evaluation).
inline std::vector<MetricsReport> cross_eval(const Classifier& classifier,
                                             const std::vector<LabeledDataset>& datasets) {
  std::vector<MetricsReport> reports;
  reports.reserve(datasets.size());
  for (const auto& ds : datasets) reports.push_back(evaluate(classifier, ds));
  return reports;
}

using PredictionMap = std::map<std::pair<std::string, Hive>, bool>;

class LookupClassifier : public Classifier {
 public:
  LookupClassifier(PredictionMap predictions, std::string source)
      : predictions_(std::move(predictions)), source_(std::move(source)) {}

  std::string name() const override { return "predictions(" + source_ + ")"; }

  bool classify_text(const std::string&) const override {
    throw PipelineError("prediction lookup requires setting identity");
  }

  bool classify(const LabeledSetting& item) const override {
    auto it = predictions_.find({item.setting, item.hive});
    if (it == predictions_.end())
      throw PipelineError("no prediction for '" + item.setting + "'");
    return it->second;
  }

 private:
  PredictionMap predictions_;
  std::string source_;
};

// Scores an externally produced prediction file with the same semantics as
// evaluate(). The file must cover the dataset exactly.
inline MetricsReport evaluate_predictions(const PredictionMap& predictions,
                                          const LabeledDataset& ds,
                                          const std::string& source = "file") {
  std::set<std::pair<std::string, Hive>> wanted;
  for (const auto& item : ds.items) wanted.emplace(item.setting, item.hive);
  std::vector<std::string> missing, extra;
  for (const auto& key : wanted)
    if (!predictions.count(key))
      missing.push_back(key.first + " (" + std::string(hive_name(key.second)) + ")");
  for (const auto& [key, value] : predictions)
    if (!wanted.count(key))
      extra.push_back(key.first + " (" + std::string(hive_name(key.second)) + ")");
  if (!missing.empty() || !extra.empty()) {
    std::string message = "predictions do not cover the dataset exactly;";
    if (!missing.empty()) {
      message += " missing:";
      for (const auto& id : missing) message += " '" + id + "'";
    }
    if (!extra.empty()) {
      message += " extra:";
      for (const auto& id : extra) message += " '" + id + "'";
    }
    throw ValidationError(message);
  }
  return evaluate(LookupClassifier(predictions, source), ds);
}

struct ErrorListing {
  struct Entry {
    std::string setting;
    Hive hive = Hive::Machine;
    std::string description_excerpt;
    std::optional<TopicDistribution> topics;
    double max_topic_probability = -1.0;
  };
  std::vector<Entry> false_negatives;
  std::vector<Entry> false_positives;

  nlohmann::json to_json() const {
    auto entries_json = [](const std::vector<Entry>& entries) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& e : entries) {
        nlohmann::json item = {{"setting", e.setting},
                               {"hive", std::string(hive_name(e.hive))},
                               {"description", e.description_excerpt}};
        if (e.topics) {
          item["topic_probabilities"] = e.topics->probabilities;
          item["max_topic_probability"] = e.max_topic_probability;
        }
        arr.push_back(std::move(item));
      }
      return arr;
    };
    return {{"false_negatives", entries_json(false_negatives)},
            {"false_positives", entries_json(false_positives)}};
  }
};

// Misclassified items with topic distributions when available, ordered by
// max-topic probability descending for triage.
inline ErrorListing error_listing(const Classifier& classifier, const LabeledDataset& ds) {
  ErrorListing listing;
  for (const auto& item : ds.items) {
    bool predicted = false;
    try {
      predicted = classifier.classify(item);
    } catch (const std::exception&) {
      predicted = false;
    }
    if (predicted == item.is_security_relevant) continue;
    ErrorListing::Entry entry;
    entry.setting = item.setting;
    entry.hive = item.hive;
    entry.description_excerpt =
        item.description.size() > 140 ? item.description.substr(0, 140) + "..." : item.description;
    entry.topics = classifier.explain(item);
    if (entry.topics) entry.max_topic_probability = entry.topics->max_probability();
    (item.is_security_relevant ? listing.false_negatives : listing.false_positives)
        .push_back(std::move(entry));
  }
  auto by_probability = [](const ErrorListing::Entry& a, const ErrorListing::Entry& b) {
    return a.max_topic_probability > b.max_topic_probability;
  };
  std::stable_sort(listing.false_negatives.begin(), listing.false_negatives.end(), by_probability);
  std::stable_sort(listing.false_positives.begin(), listing.false_positives.end(), by_probability);
  return listing;
}

// End-to-end text classifiers -------------------------------------------------

class LdaTextClassifier : public Classifier {
 public:
  LdaTextClassifier(const LdaModel& model, Preprocessor preprocessor)
      : model_(model), preprocessor_(std::move(preprocessor)), tfidf_(TfidfModel::fit(model.dictionary())) {}

  std::string name() const override {
    char buf[64];
    std::snprintf(buf, sizeof buf, "lda(topics=%d,threshold=%.2f)", model_.num_topics(),
                  model_.config().threshold);
    return buf;
  }

  bool classify_text(const std::string& description) const override {
    return decide(description).security_relevant;
  }

  std::optional<TopicDistribution> explain(const LabeledSetting& item) const override {
    LdaDecision decision = decide(item.description);
    if (decision.no_known_terms) return std::nullopt;
    return decision.topics;
  }

  LdaDecision decide(const std::string& description) const {
    ProcessedDoc doc = preprocessor_.run(description);
    WeightedDoc weighted = tfidf_.transform(to_bow(doc, model_.dictionary()));
    return lda_classify(model_, weighted);
  }

  std::vector<WordTopics> word_topics(const std::string& description) const {
    ProcessedDoc doc = preprocessor_.run(description);
    WeightedDoc weighted = tfidf_.transform(to_bow(doc, model_.dictionary()));
    if (weighted.empty()) return {};
    return model_.per_word_topics(weighted);
  }

  const LdaModel& model() const { return model_; }

 private:
  const LdaModel& model_;
  Preprocessor preprocessor_;
  TfidfModel tfidf_;
};

class LexiconTextClassifier : public Classifier {
 public:
  LexiconTextClassifier(Lexicon sr, Lexicon nsr, Preprocessor preprocessor)
      : sr_(std::move(sr)), nsr_(std::move(nsr)), preprocessor_(std::move(preprocessor)) {}

  std::string name() const override { return "lexicon"; }

  bool classify_text(const std::string& description) const override {
    return lexicon_classify(preprocessor_.run(description), sr_, nsr_).security_relevant;
  }

  LexiconDecision decide(const std::string& description) const {
    return lexicon_classify(preprocessor_.run(description), sr_, nsr_);
  }

 private:
  Lexicon sr_;
  Lexicon nsr_;
  Preprocessor preprocessor_;
};

// Plain-text tables ------------------------------------------------------------

namespace eval_detail {

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s += std::string(width - s.size(), ' ');
  return s;
}

inline std::string fixed(double v, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace eval_detail

// Columns of the LDA results table: OS, guide, settings, SR count, recall,
// classified-SR, balanced accuracy.
inline std::string render_lda_table(const std::vector<MetricsReport>& reports) {
  using eval_detail::fixed;
  using eval_detail::pad;
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Dataset", "Settings", "SR", "Recall", "Classified-SR", "BA"});
  for (const auto& r : reports)
    rows.push_back({r.dataset_id, std::to_string(r.dataset_size), std::to_string(r.dataset_sr_count),
                    fixed(r.recall), std::to_string(r.classified_sr_count),
                    fixed(r.balanced_accuracy)});
  std::vector<std::size_t> widths(rows[0].size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += pad(row[c], widths[c]);
      if (c + 1 < row.size()) out += "  ";
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

// Columns of the classifier comparison table: dataset (or classifier),
// recall, precision, F1.
inline std::string render_classifier_table(const std::vector<MetricsReport>& reports) {
  using eval_detail::fixed;
  using eval_detail::pad;
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Dataset", "Classifier", "Recall", "Precision", "F1"});
  for (const auto& r : reports)
    rows.push_back({r.dataset_id, r.classifier_id, fixed(r.recall), fixed(r.precision), fixed(r.f1)});
  std::vector<std::size_t> widths(rows[0].size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += pad(row[c], widths[c]);
      if (c + 1 < row.size()) out += "  ";
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

// Prediction files -------------------------------------------------------------

namespace eval_detail {

inline std::vector<std::string> split_csv_row(const std::string& line, std::size_t line_number) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"' && current.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (quoted)
    throw ValidationError("predictions csv: unterminated quote at line " + std::to_string(line_number));
  fields.push_back(std::move(current));
  return fields;
}

}  // namespace eval_detail

inline PredictionMap predictions_from_csv(const std::string& text) {
  PredictionMap map;
  std::size_t pos = 0, line_number = 0;
  bool header_seen = false;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    std::string line = std::string(text.substr(pos, end == std::string::npos ? text.size() - pos : end - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_number;
    pos = end == std::string::npos ? text.size() + 1 : end + 1;
    if (line.empty()) continue;
    auto fields = eval_detail::split_csv_row(line, line_number);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "setting" || fields[1] != "hive" || fields[2] != "predicted")
        throw ValidationError("predictions csv: expected header 'setting,hive,predicted'");
      header_seen = true;
      continue;
    }
    if (fields.size() != 3)
      throw ValidationError("predictions csv: expected 3 fields at line " + std::to_string(line_number));
    auto hive = parse_hive(fields[1]);
    if (!hive)
      throw ValidationError("predictions csv: bad hive at line " + std::to_string(line_number));
    bool predicted;
    if (fields[2] == "true")
      predicted = true;
    else if (fields[2] == "false")
      predicted = false;
    else
      throw ValidationError("predictions csv: predicted must be true or false at line " +
                            std::to_string(line_number));
    if (!map.emplace(std::make_pair(fields[0], *hive), predicted).second)
      throw ValidationError("predictions csv: duplicate setting '" + fields[0] + "'");
  }
  if (!header_seen) throw ValidationError("predictions csv: missing header");
  return map;
}

inline PredictionMap predictions_from_yaml(std::string_view text) {
  yamlx::Node root = yamlx::parse(text);
  if (!root.is_sequence()) throw ValidationError("predictions yaml: expected a sequence");
  PredictionMap map;
  for (std::size_t i = 0; i < root.items.size(); ++i) {
    const auto& entry = root.items[i];
    const std::string where = "predictions item " + std::to_string(i);
    if (!entry.is_mapping()) throw ValidationError(where + ": expected a mapping");
    const yamlx::Node* setting = entry.find("setting");
    const yamlx::Node* hive_node = entry.find("hive");
    const yamlx::Node* predicted = entry.find("predicted");
    if (!setting || !hive_node || !predicted)
      throw ValidationError(where + ": needs setting, hive and predicted");
    auto hive = parse_hive(hive_node->str());
    if (!hive) throw ValidationError(where + ": hive must be machine or user");
    if (!predicted->is_bool()) throw ValidationError(where + ": predicted must be true or false");
    if (!map.emplace(std::make_pair(setting->str(), *hive), predicted->as_bool()).second)
      throw ValidationError(where + ": duplicate setting '" + setting->str() + "'");
  }
  return map;
}

inline PredictionMap load_predictions(const std::string& path) {
  std::string bytes = read_file_bytes(path);
  bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  try {
    return csv ? predictions_from_csv(bytes) : predictions_from_yaml(bytes);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline std::string predictions_to_csv(const PredictionMap& predictions) {
  std::string out = "setting,hive,predicted\n";
  for (const auto& [key, value] : predictions) {
    const auto& [setting, hive] = key;
    bool needs_quote = setting.find_first_of(",\"\n") != std::string::npos;
    if (needs_quote) {
      out += '"';
      for (char c : setting) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
    } else {
      out += setting;
    }
    out += ',';
    out += hive_name(hive);
    out += ',';
    out += value ? "true" : "false";
    out += '\n';
  }
  return out;
}

}  // namespace secrel
