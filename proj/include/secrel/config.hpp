#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "secrel/diag.hpp"
#include "secrel/lda.hpp"
#include "secrel/lexicon.hpp"
#include "secrel/yaml.hpp"

#define SECREL_VERSION "0.1.0"

namespace secrel {

// Declarative run configuration; one file drives all commands and CLI flags
// override individual fields.
struct RunConfig {
  std::vector<std::string> admx_paths;   // files or directories
  std::vector<std::string> adml_paths;   // files or directories
  std::vector<std::string> guide_paths;
  std::vector<std::string> dataset_paths;
  std::string catalog_path;
  std::string stopwords_path;  // empty: embedded default list
  std::string stoplist_path;   // empty: no manual stoplist
  std::string model_path;
  std::string dictionary_path;
  std::string predictions_path;

  LdaConfig lda;
  double lexicon_threshold = 0.5;
  std::uint64_t lexicon_min_frequency = 5;
  TfidfAggregation lexicon_aggregation = TfidfAggregation::MaxPerDocument;

  double test_fraction = 0.2;
  std::size_t resample_sr_target = 0;   // 0: skip
  std::size_t resample_nsr_target = 0;

  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string os_label;
  std::string locale = "en-US";

  static RunConfig from_yaml_file(const std::string& path);
  static RunConfig from_yaml(const yamlx::Node& root, const std::string& source);
};

namespace config_detail {

inline double node_double(const yamlx::Node& node, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(node.str(), &used);
    if (used != node.str().size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("config: " + what + " must be a number, got '" + node.str() + "'");
  }
}

inline std::uint64_t node_uint(const yamlx::Node& node, const std::string& what) {
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(node.str(), &used);
    if (used != node.str().size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("config: " + what + " must be a non-negative integer, got '" +
                          node.str() + "'");
  }
}

inline bool node_bool(const yamlx::Node& node, const std::string& what) {
  if (!node.is_bool()) throw ValidationError("config: " + what + " must be true or false");
  return node.as_bool();
}

inline std::vector<std::string> node_string_list(const yamlx::Node& node, const std::string& what) {
  std::vector<std::string> out;
  if (node.is_scalar()) {
    if (!node.str().empty()) out.push_back(node.str());
    return out;
  }
  if (!node.is_sequence()) throw ValidationError("config: " + what + " must be a list of paths");
  for (const auto& item : node.items) {
    if (!item.is_scalar()) throw ValidationError("config: " + what + " entries must be scalars");
    out.push_back(item.str());
  }
  return out;
}

}  // namespace config_detail

inline RunConfig RunConfig::from_yaml(const yamlx::Node& root, const std::string& source) {
  using namespace config_detail;
  RunConfig config;
  if (!root.is_mapping()) throw ValidationError("config " + source + ": expected a mapping");
  for (const auto& [key, value] : root.entries) {
    if (key == "paths") {
      if (!value.is_mapping()) throw ValidationError("config: paths must be a mapping");
      for (const auto& [pkey, pvalue] : value.entries) {
        if (pkey == "admx")
          config.admx_paths = node_string_list(pvalue, "paths.admx");
        else if (pkey == "adml")
          config.adml_paths = node_string_list(pvalue, "paths.adml");
        else if (pkey == "guides")
          config.guide_paths = node_string_list(pvalue, "paths.guides");
        else if (pkey == "datasets")
          config.dataset_paths = node_string_list(pvalue, "paths.datasets");
        else if (pkey == "catalog")
          config.catalog_path = pvalue.str();
        else if (pkey == "stopwords")
          config.stopwords_path = pvalue.str();
        else if (pkey == "stoplist")
          config.stoplist_path = pvalue.str();
        else if (pkey == "model")
          config.model_path = pvalue.str();
        else if (pkey == "dictionary")
          config.dictionary_path = pvalue.str();
        else if (pkey == "predictions")
          config.predictions_path = pvalue.str();
        else
          throw ValidationError("config: unknown key paths." + pkey);
      }
    } else if (key == "lda") {
      if (!value.is_mapping()) throw ValidationError("config: lda must be a mapping");
      for (const auto& [lkey, lvalue] : value.entries) {
        if (lkey == "topics")
          config.lda.num_topics = static_cast<int>(node_uint(lvalue, "lda.topics"));
        else if (lkey == "passes")
          config.lda.passes = static_cast<int>(node_uint(lvalue, "lda.passes"));
        else if (lkey == "threshold")
          config.lda.threshold = node_double(lvalue, "lda.threshold");
        else if (lkey == "eta")
          config.lda.eta = node_double(lvalue, "lda.eta");
        else if (lkey == "estep_max_iters")
          config.lda.estep_max_iters = static_cast<int>(node_uint(lvalue, "lda.estep_max_iters"));
        else if (lkey == "estep_tolerance")
          config.lda.estep_tolerance = node_double(lvalue, "lda.estep_tolerance");
        else if (lkey == "per_word_topics")
          config.lda.per_word_topics = node_bool(lvalue, "lda.per_word_topics");
        else
          throw ValidationError("config: unknown key lda." + lkey);
      }
    } else if (key == "lexicon") {
      if (!value.is_mapping()) throw ValidationError("config: lexicon must be a mapping");
      for (const auto& [lkey, lvalue] : value.entries) {
        if (lkey == "tfidf_threshold")
          config.lexicon_threshold = node_double(lvalue, "lexicon.tfidf_threshold");
        else if (lkey == "min_frequency")
          config.lexicon_min_frequency = node_uint(lvalue, "lexicon.min_frequency");
        else if (lkey == "aggregation") {
          if (lvalue.str() == "max-per-document")
            config.lexicon_aggregation = TfidfAggregation::MaxPerDocument;
          else if (lvalue.str() == "corpus-aggregated")
            config.lexicon_aggregation = TfidfAggregation::CorpusAggregated;
          else
            throw ValidationError(
                "config: lexicon.aggregation must be max-per-document or corpus-aggregated");
        } else {
          throw ValidationError("config: unknown key lexicon." + lkey);
        }
      }
    } else if (key == "split") {
      if (!value.is_mapping()) throw ValidationError("config: split must be a mapping");
      for (const auto& [skey, svalue] : value.entries) {
        if (skey == "test_fraction")
          config.test_fraction = node_double(svalue, "split.test_fraction");
        else
          throw ValidationError("config: unknown key split." + skey);
      }
    } else if (key == "resample") {
      if (!value.is_mapping()) throw ValidationError("config: resample must be a mapping");
      for (const auto& [rkey, rvalue] : value.entries) {
        if (rkey == "sr_target")
          config.resample_sr_target = node_uint(rvalue, "resample.sr_target");
        else if (rkey == "nsr_target")
          config.resample_nsr_target = node_uint(rvalue, "resample.nsr_target");
        else
          throw ValidationError("config: unknown key resample." + rkey);
      }
    } else if (key == "seed") {
      config.seed = node_uint(value, "seed");
      config.lda.seed = config.seed;
    } else if (key == "out") {
      config.out_dir = value.str();
    } else if (key == "os_label") {
      config.os_label = value.str();
    } else if (key == "locale") {
      config.locale = value.str();
    } else {
      throw ValidationError("config: unknown key " + key);
    }
  }
  return config;
}

inline RunConfig RunConfig::from_yaml_file(const std::string& path) {
  return from_yaml(yamlx::parse_file(path), path);
}

// File expansion for admx/adml arguments that may name directories.
inline std::vector<std::string> expand_input_paths(const std::vector<std::string>& paths,
                                                   const std::string& extension,
                                                   const std::string& locale = {}) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  for (const auto& path : paths) {
    fs::path p(path);
    if (!fs::exists(p)) throw ValidationError("input path does not exist: " + path);
    if (fs::is_directory(p)) {
      fs::path dir = p;
      if (!locale.empty() && fs::is_directory(p / locale)) dir = p / locale;
      std::vector<std::string> found;
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        for (char& c : ext)
          if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if (ext == extension) found.push_back(entry.path().string());
      }
      std::sort(found.begin(), found.end());
      if (found.empty())
        throw ValidationError("no " + extension + " files under directory: " + dir.string());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(path);
    }
  }
  return files;
}

}  // namespace secrel
