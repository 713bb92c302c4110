// secrel: build labeled datasets of Windows configuration settings from
// ADMX/ADML templates and XCCDF guides, classify settings as
// security-relevant from their descriptions (lexicons, LDA topic model),
// and evaluate the classifiers.

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "secrel/admx.hpp"
#include "secrel/config.hpp"
#include "secrel/dataset.hpp"
#include "secrel/evaluation.hpp"
#include "secrel/lda.hpp"
#include "secrel/lexicon.hpp"
#include "secrel/manifest.hpp"
#include "secrel/textprep.hpp"
#include "secrel/xccdf.hpp"

namespace fs = std::filesystem;
using namespace secrel;

namespace {

std::string g_config_path;  // for manifest config digests

std::string out_path(const RunConfig& config, const std::string& name) {
  fs::create_directories(config.out_dir);
  return (fs::path(config.out_dir) / name).string();
}

Manifest make_manifest(const std::string& command, const RunConfig& config) {
  Manifest manifest(command, config.seed);
  if (!g_config_path.empty()) manifest.set_config_digest(file_digest(g_config_path));
  return manifest;
}

Preprocessor make_preprocessor(const RunConfig& config, Manifest& manifest) {
  WordList stopwords = config.stopwords_path.empty() ? english_stopwords()
                                                     : WordList::from_file(config.stopwords_path);
  WordList stoplist =
      config.stoplist_path.empty() ? WordList{} : WordList::from_file(config.stoplist_path);
  if (!config.stopwords_path.empty()) manifest.add_input(config.stopwords_path);
  if (!config.stoplist_path.empty()) manifest.add_input(config.stoplist_path);
  return Preprocessor(std::move(stopwords), std::move(stoplist));
}

SettingCatalog build_catalog_from_templates(const RunConfig& config, Manifest& manifest,
                                            ResolutionReport& report) {
  if (config.admx_paths.empty() || config.adml_paths.empty())
    throw ValidationError("catalog construction needs --admx and --adml (files or directories)");
  std::vector<PolicyDefinition> defs;
  std::vector<CategoryNode> cats;
  std::vector<Diagnostic> diagnostics;
  for (const auto& file : expand_input_paths(config.admx_paths, ".admx")) {
    manifest.add_input(file);
    AdmxParseResult parsed = parse_admx(xml::parse_file(file));
    defs.insert(defs.end(), parsed.policies.begin(), parsed.policies.end());
    cats.insert(cats.end(), parsed.categories.begin(), parsed.categories.end());
    diagnostics.insert(diagnostics.end(), parsed.diagnostics.begin(), parsed.diagnostics.end());
  }
  std::vector<LocaleStringTable> tables;
  for (const auto& file : expand_input_paths(config.adml_paths, ".adml", config.locale)) {
    manifest.add_input(file);
    AdmlParseResult parsed = parse_adml(xml::parse_file(file), config.locale);
    diagnostics.insert(diagnostics.end(), parsed.diagnostics.begin(), parsed.diagnostics.end());
    tables.push_back(std::move(parsed.table));
  }
  LocaleStringTable strings = merge_string_tables(tables, &diagnostics);
  std::string os_label = config.os_label.empty() ? "unlabeled" : config.os_label;
  SettingCatalog catalog = resolve_catalog(defs, cats, strings, os_label, &report);
  report.diagnostics.insert(report.diagnostics.begin(), diagnostics.begin(), diagnostics.end());
  return catalog;
}

SettingCatalog load_catalog(const RunConfig& config, Manifest& manifest, ResolutionReport& report) {
  if (!config.catalog_path.empty()) {
    if (!fs::exists(config.catalog_path))
      throw ValidationError("catalog file does not exist: " + config.catalog_path);
    manifest.add_input(config.catalog_path);
    return catalog_from_json(nlohmann::json::parse(read_file_bytes(config.catalog_path)));
  }
  return build_catalog_from_templates(config, manifest, report);
}

LabeledDataset load_dataset(const std::string& path, Manifest& manifest) {
  manifest.add_input(path);
  LabeledDataset ds = read_dataset(path);
  if (ds.os_label.empty()) ds.os_label = fs::path(path).stem().string();
  return ds;
}

LdaModel load_model(const RunConfig& config, Manifest& manifest) {
  if (config.model_path.empty() || config.dictionary_path.empty())
    throw ValidationError("this command needs --model and --dictionary");
  if (!fs::exists(config.model_path))
    throw ValidationError("model file does not exist: " + config.model_path);
  if (!fs::exists(config.dictionary_path))
    throw ValidationError("dictionary file does not exist: " + config.dictionary_path);
  manifest.add_input(config.model_path);
  manifest.add_input(config.dictionary_path);
  Dictionary dict =
      Dictionary::from_json(nlohmann::json::parse(read_file_bytes(config.dictionary_path)));
  return LdaModel::from_json(nlohmann::json::parse(read_file_bytes(config.model_path)),
                             std::move(dict));
}

std::vector<ProcessedDoc> preprocess_descriptions(const std::vector<const LabeledSetting*>& items,
                                                  const Preprocessor& preprocessor) {
  std::vector<ProcessedDoc> docs;
  docs.reserve(items.size());
  for (const LabeledSetting* item : items)
    docs.push_back(preprocessor.run(item->description, item->setting));
  return docs;
}

int cmd_build_catalog(const RunConfig& config) {
  Manifest manifest = make_manifest("build-catalog", config);
  ResolutionReport report;
  SettingCatalog catalog = build_catalog_from_templates(config, manifest, report);

  std::string catalog_path = out_path(config, "catalog.json");
  write_json_file(catalog_path, catalog_to_json(catalog));
  std::string report_path = out_path(config, "resolution_report.json");
  write_json_file(report_path, report.to_json());
  manifest.add_output(catalog_path);
  manifest.add_output(report_path);
  manifest.write(out_path(config, "manifest_build_catalog.json"));

  std::printf("catalog: %zu settings (%zu definitions, %zu expanded, %zu excluded, %zu warnings)\n",
              catalog.settings.size(), report.definitions_parsed, report.instances_expanded,
              report.excluded, count_warnings(report.diagnostics));
  return 0;
}

int cmd_build_dataset(const RunConfig& config, bool dedup, bool extended, double split_fraction,
                      const std::string& resample_spec) {
  if (config.guide_paths.empty()) throw ValidationError("build-dataset needs --guide");
  Manifest manifest = make_manifest("build-dataset", config);
  ResolutionReport resolution;
  SettingCatalog catalog = load_catalog(config, manifest, resolution);

  DatasetFormat format = extended ? DatasetFormat::Extended : DatasetFormat::Plain;
  bool multiple = config.guide_paths.size() > 1;
  for (std::size_t g = 0; g < config.guide_paths.size(); ++g) {
    const std::string& guide_path = config.guide_paths[g];
    manifest.add_input(guide_path);
    XccdfParseResult parsed = parse_xccdf(xml::parse_file(guide_path));
    RuleTargetMap targets = match_rules(parsed.guide, catalog);
    LabeledDataset ds = label_catalog(catalog, targets, parsed.guide);

    std::string suffix = multiple ? "_" + std::to_string(g) : "";
    std::string match_path = out_path(config, "match_report" + suffix + ".json");
    write_json_file(match_path, targets.to_json());
    manifest.add_output(match_path);

    if (dedup) {
      DedupReport dedup_report;
      ds = dedup_hives(ds, &dedup_report);
      std::string dedup_path = out_path(config, "dedup_report" + suffix + ".json");
      write_json_file(dedup_path, dedup_report.to_json());
      manifest.add_output(dedup_path);
    }
    if (!resample_spec.empty()) {
      auto colon = resample_spec.find(':');
      if (colon == std::string::npos)
        throw ValidationError("--resample expects SR_TARGET:NSR_TARGET");
      std::size_t sr_target = std::stoull(resample_spec.substr(0, colon));
      std::size_t nsr_target = std::stoull(resample_spec.substr(colon + 1));
      ds = resample(ds, sr_target, nsr_target, config.seed);
    }

    std::string ds_path = out_path(config, "dataset" + suffix + ".yaml");
    write_dataset(ds, ds_path, format);
    manifest.add_output(ds_path);
    std::printf(
        "dataset%s: %zu settings, %zu SR (%zu rules: %zu matched, %zu unmatched, %zu ambiguous)\n",
        suffix.c_str(), ds.items.size(), ds.sr_count(), parsed.guide.rules.size(),
        targets.pairs.size(), targets.unmatched_rules.size(), targets.ambiguous_rules.size());

    if (split_fraction > 0.0) {
      auto [train, test] = split_disjoint(ds, split_fraction, config.seed);
      std::string train_path = out_path(config, "dataset" + suffix + "_train.yaml");
      std::string test_path = out_path(config, "dataset" + suffix + "_test.yaml");
      write_dataset(train, train_path, format);
      write_dataset(test, test_path, format);
      manifest.add_output(train_path);
      manifest.add_output(test_path);
      std::printf("split: train %zu (%zu SR), test %zu (%zu SR)\n", train.items.size(),
                  train.sr_count(), test.items.size(), test.sr_count());
    }
  }

  if (config.catalog_path.empty()) {
    std::string resolution_path = out_path(config, "resolution_report.json");
    write_json_file(resolution_path, resolution.to_json());
    manifest.add_output(resolution_path);
  }
  manifest.write(out_path(config, "manifest_build_dataset.json"));
  return 0;
}

int cmd_lexicon(const RunConfig& config, const std::string& rationales_guide, std::size_t ngram_n,
                std::size_t top_stems_n) {
  if (config.dataset_paths.empty()) throw ValidationError("lexicon needs --dataset");
  Manifest manifest = make_manifest("lexicon", config);
  Preprocessor preprocessor = make_preprocessor(config, manifest);
  LabeledDataset ds = load_dataset(config.dataset_paths.front(), manifest);

  std::vector<const LabeledSetting*> sr_items, nsr_items;
  for (const auto& item : ds.items)
    (item.is_security_relevant ? sr_items : nsr_items).push_back(&item);
  if (sr_items.empty() || nsr_items.empty())
    throw ValidationError("lexicon needs a dataset with both classes");
  std::vector<ProcessedDoc> sr_docs = preprocess_descriptions(sr_items, preprocessor);
  std::vector<ProcessedDoc> nsr_docs = preprocess_descriptions(nsr_items, preprocessor);

  std::vector<ProcessedDoc> rationale_docs;
  if (!rationales_guide.empty()) {
    manifest.add_input(rationales_guide);
    XccdfParseResult parsed = parse_xccdf(xml::parse_file(rationales_guide));
    for (const auto& rule : parsed.guide.rules)
      if (!rule.rationale.empty())
        rationale_docs.push_back(preprocessor.run(rule.rationale, rule.rule_id));
  }

  // top stems of the whole description corpus, the raw material for
  // curating the manual stoplist
  {
    std::vector<ProcessedDoc> all_docs = sr_docs;
    all_docs.insert(all_docs.end(), nsr_docs.begin(), nsr_docs.end());
    auto top = frequent_stems(all_docs, top_stems_n);
    nlohmann::json top_json = nlohmann::json::array();
    for (const auto& [stem, count] : top)
      top_json.push_back({{"stem", stem}, {"frequency", count}});
    std::string top_path = out_path(config, "top_stems.json");
    write_json_file(top_path, top_json);
    manifest.add_output(top_path);
  }

  auto exclusive = exclusive_sr_words(sr_docs, nsr_docs, config.lexicon_min_frequency);
  auto [sr_lexicon, nsr_lexicon] =
      build_lexicons(sr_docs, nsr_docs, rationale_docs.empty() ? nullptr : &rationale_docs,
                     config.lexicon_threshold, config.lexicon_aggregation);

  nlohmann::json exclusive_json = nlohmann::json::array();
  for (const auto& [word, count] : exclusive)
    exclusive_json.push_back({{"word", word}, {"frequency", count}});
  std::string exclusive_path = out_path(config, "exclusive_sr_words.json");
  write_json_file(exclusive_path, exclusive_json);
  manifest.add_output(exclusive_path);

  const std::pair<std::string, const Lexicon*> outputs[] = {{"lexicon_sr", &sr_lexicon},
                                                            {"lexicon_nsr", &nsr_lexicon}};
  for (const auto& [name, lexicon] : outputs) {
    std::string json_path = out_path(config, name + ".json");
    write_json_file(json_path, lexicon->to_json());
    manifest.add_output(json_path);
    std::string csv_path = out_path(config, name + ".csv");
    write_text_file(csv_path, lexicon->to_csv());
    manifest.add_output(csv_path);
  }

  if (ngram_n >= 2) {
    auto ngrams = extract_ngrams(sr_docs, ngram_n, config.lexicon_min_frequency);
    nlohmann::json ngrams_json = nlohmann::json::array();
    for (const auto& [gram, count] : ngrams)
      ngrams_json.push_back({{"ngram", gram}, {"frequency", count}});
    std::string ngrams_path = out_path(config, "ngrams_sr.json");
    write_json_file(ngrams_path, ngrams_json);
    manifest.add_output(ngrams_path);
  }

  manifest.write(out_path(config, "manifest_lexicon.json"));
  std::printf("lexicons: %zu SR words, %zu NSR words, %zu exclusive SR words\n",
              sr_lexicon.entries.size(), nsr_lexicon.entries.size(), exclusive.size());
  return 0;
}

int cmd_train(const RunConfig& config) {
  if (config.dataset_paths.empty()) throw ValidationError("train needs --dataset");
  Manifest manifest = make_manifest("train", config);
  Preprocessor preprocessor = make_preprocessor(config, manifest);
  LabeledDataset ds = load_dataset(config.dataset_paths.front(), manifest);

  std::vector<const LabeledSetting*> sr_items;
  for (const auto& item : ds.items)
    if (item.is_security_relevant) sr_items.push_back(&item);
  if (sr_items.empty()) throw ValidationError("train: dataset has no SR settings");

  std::vector<ProcessedDoc> sr_docs = preprocess_descriptions(sr_items, preprocessor);
  std::vector<ProcessedDoc> usable;
  std::size_t dropped = 0;
  for (auto& doc : sr_docs) {
    if (doc.empty())
      ++dropped;
    else
      usable.push_back(std::move(doc));
  }
  if (usable.empty()) throw ValidationError("train: every SR description reduced to no tokens");

  Dictionary dict = Dictionary::build(usable);
  TfidfModel tfidf = TfidfModel::fit(dict);
  std::vector<WeightedDoc> weighted;
  for (const auto& doc : usable) {
    WeightedDoc w = tfidf.transform(to_bow(doc, dict), doc.doc_id);
    if (w.empty())
      ++dropped;
    else
      weighted.push_back(std::move(w));
  }
  if (weighted.empty()) throw ValidationError("train: every SR description weighted to zero");

  LdaModel model = LdaModel::train(weighted, dict, config.lda);

  std::string model_path =
      config.model_path.empty() ? out_path(config, "model.json") : config.model_path;
  std::string dict_path =
      config.dictionary_path.empty() ? out_path(config, "dictionary.json") : config.dictionary_path;
  write_json_file(model_path, model.to_json());
  write_json_file(dict_path, dict.to_json());
  manifest.add_output(model_path);
  manifest.add_output(dict_path);

  nlohmann::json topics = nlohmann::json::array();
  for (int k = 0; k < model.num_topics(); ++k) {
    nlohmann::json words = nlohmann::json::array();
    for (const auto& [word, p] : model.top_terms(k, 10))
      words.push_back({{"word", word}, {"probability", p}});
    topics.push_back(
        {{"topic", k}, {"alpha", model.alpha()[static_cast<std::size_t>(k)]}, {"top_words", words}});
  }
  std::string report_path = out_path(config, "train_report.json");
  write_json_file(report_path, {{"documents", weighted.size()},
                                {"dropped_empty", dropped},
                                {"vocabulary", dict.size()},
                                {"topics", topics}});
  manifest.add_output(report_path);
  manifest.write(out_path(config, "manifest_train.json"));

  std::printf("model: %d topics, %zu documents, vocabulary %zu (dropped %zu empty)\n",
              model.num_topics(), weighted.size(), dict.size(), dropped);
  return 0;
}

int cmd_classify(const RunConfig& config, const std::string& lexicon_sr_path,
                 const std::string& lexicon_nsr_path, std::optional<double> threshold_override) {
  Manifest manifest = make_manifest("classify", config);
  Preprocessor preprocessor = make_preprocessor(config, manifest);

  std::vector<LabeledSetting> items;
  if (!config.dataset_paths.empty()) {
    items = load_dataset(config.dataset_paths.front(), manifest).items;
  } else if (!config.catalog_path.empty()) {
    if (!fs::exists(config.catalog_path))
      throw ValidationError("catalog file does not exist: " + config.catalog_path);
    manifest.add_input(config.catalog_path);
    SettingCatalog catalog =
        catalog_from_json(nlohmann::json::parse(read_file_bytes(config.catalog_path)));
    for (const auto& setting : catalog.settings) {
      LabeledSetting item;
      item.setting = setting.setting_path;
      item.description = setting.description;
      item.hive = setting.hive;
      items.push_back(std::move(item));
    }
  } else {
    throw ValidationError("classify needs --dataset or --catalog");
  }

  PredictionMap predictions;
  nlohmann::json detail = nlohmann::json::array();
  bool use_lexicons = !lexicon_sr_path.empty() || !lexicon_nsr_path.empty();
  if (use_lexicons) {
    if (lexicon_sr_path.empty() || lexicon_nsr_path.empty())
      throw ValidationError("classify needs both --lexicon-sr and --lexicon-nsr");
    manifest.add_input(lexicon_sr_path);
    manifest.add_input(lexicon_nsr_path);
    Lexicon sr = Lexicon::from_json(nlohmann::json::parse(read_file_bytes(lexicon_sr_path)));
    Lexicon nsr = Lexicon::from_json(nlohmann::json::parse(read_file_bytes(lexicon_nsr_path)));
    LexiconTextClassifier classifier(std::move(sr), std::move(nsr), preprocessor);
    for (const auto& item : items) {
      LexiconDecision decision = classifier.decide(item.description);
      predictions[{item.setting, item.hive}] = decision.security_relevant;
      nlohmann::json row = decision.to_json();
      row["setting"] = item.setting;
      row["hive"] = std::string(hive_name(item.hive));
      detail.push_back(std::move(row));
    }
  } else {
    LdaModel model = load_model(config, manifest);
    if (threshold_override) model.set_threshold(*threshold_override);
    LdaTextClassifier classifier(model, preprocessor);
    for (const auto& item : items) {
      LdaDecision decision = classifier.decide(item.description);
      predictions[{item.setting, item.hive}] = decision.security_relevant;
      nlohmann::json row = {{"setting", item.setting},
                            {"hive", std::string(hive_name(item.hive))},
                            {"security_relevant", decision.security_relevant},
                            {"no_known_terms", decision.no_known_terms}};
      if (!decision.no_known_terms) {
        row["topic_probabilities"] = decision.topics.probabilities;
        if (model.config().per_word_topics) {
          nlohmann::json words = nlohmann::json::array();
          for (const auto& wt : classifier.word_topics(item.description))
            words.push_back({{"word", model.dictionary().word_of(wt.word_id)},
                             {"topic", wt.top_topic}});
          row["word_topics"] = std::move(words);
        }
      }
      detail.push_back(std::move(row));
    }
  }

  std::string predictions_path =
      config.predictions_path.empty() ? out_path(config, "predictions.csv") : config.predictions_path;
  write_text_file(predictions_path, predictions_to_csv(predictions));
  manifest.add_output(predictions_path);
  std::string detail_path = out_path(config, "classify_report.json");
  write_json_file(detail_path, detail);
  manifest.add_output(detail_path);
  manifest.write(out_path(config, "manifest_classify.json"));

  std::size_t sr = 0;
  for (const auto& [key, value] : predictions) sr += value ? 1 : 0;
  std::printf("classified: %zu items, %zu SR\n", predictions.size(), sr);
  return 0;
}

int cmd_evaluate(const RunConfig& config, const std::string& lexicon_sr_path,
                 const std::string& lexicon_nsr_path, double dummy_x,
                 const std::vector<double>& sweep_grid, std::size_t sweep_seeds, bool with_errors,
                 std::optional<double> threshold_override) {
  if (config.dataset_paths.empty()) throw ValidationError("evaluate needs --dataset");
  Manifest manifest = make_manifest("evaluate", config);
  Preprocessor preprocessor = make_preprocessor(config, manifest);

  std::vector<LabeledDataset> datasets;
  for (const auto& path : config.dataset_paths) datasets.push_back(load_dataset(path, manifest));

  if (!sweep_grid.empty()) {
    std::vector<std::uint64_t> seeds;
    for (std::size_t s = 0; s < std::max<std::size_t>(sweep_seeds, 1); ++s)
      seeds.push_back(config.seed + s);
    DummySweep sweep = sweep_dummy(datasets.front(), sweep_grid, seeds);
    std::string sweep_path = out_path(config, "sweep.json");
    write_json_file(sweep_path, sweep.to_json());
    manifest.add_output(sweep_path);
    manifest.write(out_path(config, "manifest_evaluate.json"));
    const auto& best = sweep.rows[sweep.best_index];
    std::printf("best dummy x=%.3g: recall %.3f precision %.3f f1 %.3f\n", best.x, best.mean.recall,
                best.mean.precision, best.mean.f1);
    return 0;
  }

  if (!config.predictions_path.empty()) {
    if (!fs::exists(config.predictions_path))
      throw ValidationError("predictions file does not exist: " + config.predictions_path);
    manifest.add_input(config.predictions_path);
    PredictionMap predictions = load_predictions(config.predictions_path);
    MetricsReport report =
        evaluate_predictions(predictions, datasets.front(), config.predictions_path);
    std::string metrics_path = out_path(config, "metrics.json");
    write_json_file(metrics_path, report.to_json());
    manifest.add_output(metrics_path);
    manifest.write(out_path(config, "manifest_evaluate.json"));
    std::printf("%s", render_classifier_table({report}).c_str());
    return 0;
  }

  std::unique_ptr<Classifier> classifier;
  std::optional<LdaModel> model_storage;
  if (dummy_x >= 0.0) {
    classifier = std::make_unique<UniformDummyClassifier>(uniform_dummy(dummy_x, config.seed));
  } else if (!lexicon_sr_path.empty() || !lexicon_nsr_path.empty()) {
    if (lexicon_sr_path.empty() || lexicon_nsr_path.empty())
      throw ValidationError("evaluate needs both --lexicon-sr and --lexicon-nsr");
    manifest.add_input(lexicon_sr_path);
    manifest.add_input(lexicon_nsr_path);
    Lexicon sr = Lexicon::from_json(nlohmann::json::parse(read_file_bytes(lexicon_sr_path)));
    Lexicon nsr = Lexicon::from_json(nlohmann::json::parse(read_file_bytes(lexicon_nsr_path)));
    classifier = std::make_unique<LexiconTextClassifier>(std::move(sr), std::move(nsr), preprocessor);
  } else {
    model_storage = load_model(config, manifest);
    if (threshold_override) model_storage->set_threshold(*threshold_override);
    classifier = std::make_unique<LdaTextClassifier>(*model_storage, preprocessor);
  }

  std::vector<MetricsReport> reports = cross_eval(*classifier, datasets);
  nlohmann::json metrics_json = nlohmann::json::array();
  for (const auto& report : reports) metrics_json.push_back(report.to_json());
  std::string metrics_path = out_path(config, "metrics.json");
  write_json_file(metrics_path, metrics_json);
  manifest.add_output(metrics_path);

  if (with_errors) {
    ErrorListing listing = error_listing(*classifier, datasets.front());
    std::string errors_path = out_path(config, "error_listing.json");
    write_json_file(errors_path, listing.to_json());
    manifest.add_output(errors_path);
  }

  std::string table = render_lda_table(reports);
  std::string table_path = out_path(config, "metrics_table.txt");
  write_text_file(table_path, table);
  manifest.add_output(table_path);
  manifest.write(out_path(config, "manifest_evaluate.json"));
  std::printf("%s", table.c_str());
  return 0;
}

int cmd_report(const RunConfig& config, const std::vector<std::string>& metrics_paths,
               const std::string& style) {
  if (metrics_paths.empty()) throw ValidationError("report needs --metrics files");
  Manifest manifest = make_manifest("report", config);
  std::vector<MetricsReport> reports;
  auto parse_one = [](const nlohmann::json& row) {
    MetricsReport r;
    r.dataset_id = row.value("dataset", "");
    r.classifier_id = row.value("classifier", "");
    r.recall = row.value("recall", 0.0);
    r.precision = row.value("precision", 0.0);
    r.f1 = row.value("f1", 0.0);
    r.balanced_accuracy = row.value("balanced_accuracy", 0.0);
    r.classified_sr_count = row.value("classified_sr_count", std::uint64_t{0});
    r.dataset_size = row.value("dataset_size", std::uint64_t{0});
    r.dataset_sr_count = row.value("dataset_sr_count", std::uint64_t{0});
    return r;
  };
  for (const auto& path : metrics_paths) {
    manifest.add_input(path);
    nlohmann::json j = nlohmann::json::parse(read_file_bytes(path));
    if (j.is_array())
      for (const auto& row : j) reports.push_back(parse_one(row));
    else
      reports.push_back(parse_one(j));
  }
  std::string table =
      style == "classifier" ? render_classifier_table(reports) : render_lda_table(reports);
  std::string table_path = out_path(config, "report.txt");
  write_text_file(table_path, table);
  manifest.add_output(table_path);
  manifest.write(out_path(config, "manifest_report.json"));
  std::printf("%s", table.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"security-relevance toolchain for configuration settings"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;

  std::vector<std::string> admx_flags, adml_flags, guide_flags, dataset_flags, metrics_flags;
  std::string catalog_flag, model_flag, dictionary_flag, predictions_flag, stoplist_flag,
      stopwords_flag, os_label_flag, locale_flag, lexicon_sr_flag, lexicon_nsr_flag;
  bool dedup = false, extended = false, with_errors = false;
  double split_fraction = 0.0, lexicon_threshold = -1.0, threshold_flag = -1.0, dummy_x = -1.0;
  std::string resample_spec, rationales_guide, report_style = "lda";
  std::size_t ngram_n = 0, sweep_seeds = 25, top_stems_n = 300;
  std::uint64_t min_frequency_flag = 0;
  bool min_frequency_set = false;
  int topics_flag = 0, passes_flag = 0;
  std::vector<double> sweep_grid;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run configuration YAML");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "seed recorded in every artifact")
        ->each([&](const std::string&) { seed_set = true; });
  };

  auto* build_catalog_cmd =
      app.add_subcommand("build-catalog", "resolve ADMX/ADML templates into a setting catalog");
  add_common(build_catalog_cmd);
  build_catalog_cmd->add_option("--admx", admx_flags, "ADMX files or directories");
  build_catalog_cmd->add_option("--adml", adml_flags, "ADML files or directories");
  build_catalog_cmd->add_option("--os-label", os_label_flag, "OS label, e.g. 'W10 1909'");
  build_catalog_cmd->add_option("--locale", locale_flag, "ADML locale (default en-US)");

  auto* build_dataset_cmd =
      app.add_subcommand("build-dataset", "join catalog and guide into a labeled dataset");
  add_common(build_dataset_cmd);
  build_dataset_cmd->add_option("--admx", admx_flags, "ADMX files or directories");
  build_dataset_cmd->add_option("--adml", adml_flags, "ADML files or directories");
  build_dataset_cmd->add_option("--catalog", catalog_flag, "catalog.json from build-catalog");
  build_dataset_cmd->add_option("--guide", guide_flags, "XCCDF guide files");
  build_dataset_cmd->add_option("--os-label", os_label_flag, "OS label");
  build_dataset_cmd->add_option("--locale", locale_flag, "ADML locale");
  build_dataset_cmd->add_flag("--dedup-hives", dedup, "collapse hive duplicates");
  build_dataset_cmd->add_flag("--extended", extended, "write hive and provenance keys");
  build_dataset_cmd->add_option("--split", split_fraction, "test fraction for a disjoint split");
  build_dataset_cmd->add_option("--resample", resample_spec, "SR_TARGET:NSR_TARGET class sizes");

  auto* lexicon_cmd = app.add_subcommand("lexicon", "build SR/NSR lexicons and word statistics");
  add_common(lexicon_cmd);
  lexicon_cmd->add_option("--dataset", dataset_flags, "labeled dataset YAML");
  lexicon_cmd->add_option("--rationales-guide", rationales_guide,
                          "XCCDF guide whose rule rationales augment the SR corpus");
  lexicon_cmd->add_option("--threshold", lexicon_threshold, "tf-idf keyword threshold");
  lexicon_cmd->add_option("--min-frequency", min_frequency_flag, "frequency cut for word lists")
      ->each([&](const std::string&) { min_frequency_set = true; });
  lexicon_cmd->add_option("--ngrams", ngram_n, "also extract n-grams of this size");
  lexicon_cmd->add_option("--top-stems", top_stems_n,
                          "how many most frequent stems to export for stoplist curation");
  lexicon_cmd->add_option("--stoplist", stoplist_flag, "manual stoplist file");
  lexicon_cmd->add_option("--stopwords", stopwords_flag, "stopword list file");

  auto* train_cmd = app.add_subcommand("train", "train the LDA topic model on SR descriptions");
  add_common(train_cmd);
  train_cmd->add_option("--dataset", dataset_flags, "labeled dataset YAML");
  train_cmd->add_option("--topics", topics_flag, "number of topics");
  train_cmd->add_option("--passes", passes_flag, "passes over the corpus");
  train_cmd->add_option("--threshold", threshold_flag, "SR probability threshold");
  train_cmd->add_option("--model", model_flag, "model output path");
  train_cmd->add_option("--dictionary", dictionary_flag, "dictionary output path");
  train_cmd->add_option("--stoplist", stoplist_flag, "manual stoplist file");
  train_cmd->add_option("--stopwords", stopwords_flag, "stopword list file");

  auto* classify_cmd = app.add_subcommand("classify", "classify settings with a trained model");
  add_common(classify_cmd);
  classify_cmd->add_option("--dataset", dataset_flags, "labeled dataset YAML");
  classify_cmd->add_option("--catalog", catalog_flag, "catalog.json (classify unlabeled settings)");
  classify_cmd->add_option("--model", model_flag, "trained model JSON");
  classify_cmd->add_option("--dictionary", dictionary_flag, "dictionary JSON");
  classify_cmd->add_option("--predictions", predictions_flag, "predictions output path");
  classify_cmd->add_option("--lexicon-sr", lexicon_sr_flag, "SR lexicon JSON (lexicon classifier)");
  classify_cmd->add_option("--lexicon-nsr", lexicon_nsr_flag, "NSR lexicon JSON");
  classify_cmd->add_option("--threshold", threshold_flag, "SR probability threshold override");
  classify_cmd->add_option("--stoplist", stoplist_flag, "manual stoplist file");
  classify_cmd->add_option("--stopwords", stopwords_flag, "stopword list file");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "score a classifier against labeled datasets");
  add_common(evaluate_cmd);
  evaluate_cmd->add_option("--dataset", dataset_flags, "labeled dataset YAML (repeatable)");
  evaluate_cmd->add_option("--model", model_flag, "trained model JSON");
  evaluate_cmd->add_option("--dictionary", dictionary_flag, "dictionary JSON");
  evaluate_cmd->add_option("--predictions", predictions_flag, "externally produced predictions");
  evaluate_cmd->add_option("--dummy-x", dummy_x, "evaluate the uniform dummy at this x");
  evaluate_cmd->add_option("--sweep-x", sweep_grid, "sweep the dummy over these x values");
  evaluate_cmd->add_option("--sweep-seeds", sweep_seeds, "seeds per sweep point");
  evaluate_cmd->add_flag("--errors", with_errors, "write the false negative/positive listing");
  evaluate_cmd->add_option("--threshold", threshold_flag, "override the model SR threshold");
  evaluate_cmd->add_option("--lexicon-sr", lexicon_sr_flag, "SR lexicon JSON");
  evaluate_cmd->add_option("--lexicon-nsr", lexicon_nsr_flag, "NSR lexicon JSON");
  evaluate_cmd->add_option("--stoplist", stoplist_flag, "manual stoplist file");
  evaluate_cmd->add_option("--stopwords", stopwords_flag, "stopword list file");

  auto* report_cmd = app.add_subcommand("report", "render metrics JSON as a plain-text table");
  add_common(report_cmd);
  report_cmd->add_option("--metrics", metrics_flags, "metrics JSON files");
  report_cmd->add_option("--style", report_style, "table style: lda or classifier");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig config;
    if (!config_path.empty()) config = RunConfig::from_yaml_file(config_path);
    g_config_path = config_path;
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (seed_set) {
      config.seed = seed;
      config.lda.seed = seed;
    }
    if (!admx_flags.empty()) config.admx_paths = admx_flags;
    if (!adml_flags.empty()) config.adml_paths = adml_flags;
    if (!guide_flags.empty()) config.guide_paths = guide_flags;
    if (!dataset_flags.empty()) config.dataset_paths = dataset_flags;
    if (!catalog_flag.empty()) config.catalog_path = catalog_flag;
    if (!model_flag.empty()) config.model_path = model_flag;
    if (!dictionary_flag.empty()) config.dictionary_path = dictionary_flag;
    if (!predictions_flag.empty()) config.predictions_path = predictions_flag;
    if (!stoplist_flag.empty()) config.stoplist_path = stoplist_flag;
    if (!stopwords_flag.empty()) config.stopwords_path = stopwords_flag;
    if (!os_label_flag.empty()) config.os_label = os_label_flag;
    if (!locale_flag.empty()) config.locale = locale_flag;
    if (topics_flag > 0) config.lda.num_topics = topics_flag;
    if (passes_flag > 0) config.lda.passes = passes_flag;
    if (threshold_flag >= 0.0) config.lda.threshold = threshold_flag;
    if (lexicon_threshold >= 0.0) config.lexicon_threshold = lexicon_threshold;
    if (min_frequency_set) config.lexicon_min_frequency = min_frequency_flag;

    std::optional<double> threshold_override;
    if (threshold_flag >= 0.0) threshold_override = threshold_flag;

    if (build_catalog_cmd->parsed()) return cmd_build_catalog(config);
    if (build_dataset_cmd->parsed())
      return cmd_build_dataset(config, dedup, extended, split_fraction, resample_spec);
    if (lexicon_cmd->parsed()) return cmd_lexicon(config, rationales_guide, ngram_n, top_stems_n);
    if (train_cmd->parsed()) return cmd_train(config);
    if (classify_cmd->parsed())
      return cmd_classify(config, lexicon_sr_flag, lexicon_nsr_flag, threshold_override);
    if (evaluate_cmd->parsed())
      return cmd_evaluate(config, lexicon_sr_flag, lexicon_nsr_flag, dummy_x, sweep_grid,
                          sweep_seeds, with_errors, threshold_override);
    if (report_cmd->parsed()) return cmd_report(config, metrics_flags, report_style);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pipeline error: %s\n", e.what());
    return 2;
  }
  return 0;
}
