#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "secrel/admx.hpp"
#include "secrel/diag.hpp"
#include "secrel/rng.hpp"
#include "secrel/xccdf.hpp"
#include "secrel/yaml.hpp"

namespace secrel {

struct LabeledSetting {
  std::string setting;
  std::string description;
  bool is_security_relevant = false;
  Hive hive = Hive::Machine;
  std::vector<std::pair<std::string, std::string>> extras;  // unknown keys, preserved

  friend bool operator==(const LabeledSetting&, const LabeledSetting&) = default;
};

struct LabeledDataset {
  std::string os_label;
  std::string guide_publisher;
  std::string guide_version;
  std::vector<LabeledSetting> items;

  std::size_t sr_count() const {
    std::size_t n = 0;
    for (const auto& item : items)
      if (item.is_security_relevant) ++n;
    return n;
  }

  double prevalence() const {
    return items.empty() ? 0.0 : static_cast<double>(sr_count()) / static_cast<double>(items.size());
  }
};

inline std::string normalize_description(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_space = true;
  for (char raw : text) {
    char c = raw;
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      if (!in_space) out += ' ';
      in_space = true;
    } else {
      out += c;
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

// is_security_relevant(setting) <=> some guide rule targets it.
inline LabeledDataset label_catalog(const SettingCatalog& catalog, const RuleTargetMap& targets,
                                    const Guide& guide) {
  std::set<std::pair<std::string, Hive>> positive;
  for (const auto& pair : targets.pairs) {
    if (!catalog.find(pair.setting_path, pair.hive))
      throw PipelineError("stale target map: setting '" + pair.setting_path + "' (" +
                          std::string(hive_name(pair.hive)) + ") is not in the catalog");
    positive.emplace(pair.setting_path, pair.hive);
  }
  LabeledDataset ds;
  ds.os_label = catalog.os_label;
  ds.guide_publisher = guide.publisher_label;
  ds.guide_version = guide.version;
  ds.items.reserve(catalog.settings.size());
  for (const auto& setting : catalog.settings) {
    LabeledSetting item;
    item.setting = setting.setting_path;
    item.description = setting.description;
    item.hive = setting.hive;
    item.is_security_relevant = positive.count({setting.setting_path, setting.hive}) > 0;
    ds.items.push_back(std::move(item));
  }
  return ds;
}

enum class DatasetFormat { Plain, Extended };

namespace dataset_detail {

inline bool plain_scalar_safe(std::string_view s) {
  if (s.empty() || s.front() == ' ' || s.back() == ' ') return false;
  constexpr std::string_view indicators = "-?:,[]{}#&*!|>'\"%@`";
  if (indicators.find(s.front()) != std::string_view::npos) return false;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i] == ':' && s[i + 1] == ' ') return false;
    if (s[i] == ' ' && s[i + 1] == '#') return false;
  }
  if (s.back() == ':') return false;
  for (char c : s)
    if (static_cast<unsigned char>(c) < 0x20) return false;
  if (s == "true" || s == "false" || s == "null" || s == "~") return false;
  return true;
}

inline std::string double_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          static const char* digits = "0123456789abcdef";
          out += "\\x";
          out += digits[(c >> 4) & 0xf];
          out += digits[c & 0xf];
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

inline std::string scalar(std::string_view s) {
  return plain_scalar_safe(s) ? std::string(s) : double_quote(s);
}

}  // namespace dataset_detail

inline std::string dataset_to_yaml(const LabeledDataset& ds,
                                   DatasetFormat format = DatasetFormat::Plain) {
  if (ds.items.empty()) return "[]\n";
  std::string out;
  for (const auto& item : ds.items) {
    out += "- setting: " + dataset_detail::scalar(item.setting) + "\n";
    out += "  description: " + dataset_detail::double_quote(item.description) + "\n";
    out += std::string("  is_security_relevant: ") + (item.is_security_relevant ? "true" : "false") + "\n";
    if (format == DatasetFormat::Extended) {
      out += "  hive: " + std::string(hive_name(item.hive)) + "\n";
      if (!ds.os_label.empty()) out += "  os: " + dataset_detail::scalar(ds.os_label) + "\n";
      if (!ds.guide_publisher.empty())
        out += "  guide_publisher: " + dataset_detail::scalar(ds.guide_publisher) + "\n";
      if (!ds.guide_version.empty())
        out += "  guide_version: " + dataset_detail::scalar(ds.guide_version) + "\n";
    }
    for (const auto& [key, value] : item.extras)
      out += "  " + key + ": " + dataset_detail::scalar(value) + "\n";
  }
  return out;
}

inline LabeledDataset dataset_from_yaml(std::string_view text) {
  LabeledDataset ds;
  {
    bool only_empty_marker = false;
    std::size_t significant = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      std::string_view line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
      std::size_t begin = line.find_first_not_of(" \t\r");
      if (begin != std::string_view::npos && line[begin] != '#') {
        ++significant;
        std::size_t last = line.find_last_not_of(" \t\r");
        only_empty_marker = line.substr(begin, last - begin + 1) == "[]";
      }
      if (end == std::string_view::npos) break;
      pos = end + 1;
    }
    if (significant == 0 || (significant == 1 && only_empty_marker)) return ds;
  }

  yamlx::Node root = yamlx::parse(text);
  if (!root.is_sequence()) throw ValidationError("dataset file: expected a YAML sequence");
  std::map<std::string, int> seen_by_setting;
  std::set<std::pair<std::string, Hive>> seen_keys;
  for (std::size_t index = 0; index < root.items.size(); ++index) {
    const yamlx::Node& entry = root.items[index];
    const std::string where = "dataset item " + std::to_string(index);
    if (!entry.is_mapping()) throw ValidationError(where + ": expected a mapping");
    LabeledSetting item;
    bool have_setting = false, have_description = false, have_label = false, have_hive = false;
    for (const auto& [key, value] : entry.entries) {
      if (key == "setting") {
        if (!value.is_scalar()) throw ValidationError(where + ": setting must be a scalar");
        item.setting = value.str();
        have_setting = true;
      } else if (key == "description") {
        if (!value.is_scalar()) throw ValidationError(where + ": description must be a scalar");
        item.description = value.str();
        have_description = true;
      } else if (key == "is_security_relevant") {
        if (!value.is_bool())
          throw ValidationError(where + ": is_security_relevant must be true or false");
        item.is_security_relevant = value.as_bool();
        have_label = true;
      } else if (key == "hive") {
        auto hive = parse_hive(value.str());
        if (!hive) throw ValidationError(where + ": hive must be machine or user");
        item.hive = *hive;
        have_hive = true;
      } else if (key == "os") {
        if (ds.os_label.empty()) ds.os_label = value.str();
      } else if (key == "guide_publisher") {
        if (ds.guide_publisher.empty()) ds.guide_publisher = value.str();
      } else if (key == "guide_version") {
        if (ds.guide_version.empty()) ds.guide_version = value.str();
      } else {
        if (!value.is_scalar()) throw ValidationError(where + ": unsupported nested value for key '" + key + "'");
        item.extras.emplace_back(key, value.str());
      }
    }
    if (!have_setting) throw ValidationError(where + ": missing key 'setting'");
    if (!have_description) throw ValidationError(where + ": missing key 'description'");
    if (!have_label) throw ValidationError(where + ": missing key 'is_security_relevant'");
    if (item.description.empty()) throw ValidationError(where + ": empty description");
    if (!have_hive) {
      // Plain-format files omit the hive; the first occurrence of a setting is
      // taken as Machine, a second one as its User duplicate.
      int seen = seen_by_setting[item.setting]++;
      if (seen == 0)
        item.hive = Hive::Machine;
      else if (seen == 1)
        item.hive = Hive::User;
      else
        throw ValidationError(where + ": setting '" + item.setting + "' appears more than twice");
    }
    if (!seen_keys.emplace(item.setting, item.hive).second)
      throw ValidationError(where + ": duplicate (setting, hive) '" + item.setting + "'");
    ds.items.push_back(std::move(item));
  }
  return ds;
}

inline void write_dataset(const LabeledDataset& ds, const std::string& path,
                          DatasetFormat format = DatasetFormat::Plain) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write dataset file: " + path);
  out << dataset_to_yaml(ds, format);
}

inline LabeledDataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open dataset file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string bytes = ss.str();
  if (bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xef &&
      static_cast<unsigned char>(bytes[1]) == 0xbb && static_cast<unsigned char>(bytes[2]) == 0xbf)
    bytes.erase(0, 3);
  try {
    return dataset_from_yaml(bytes);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

struct DedupReport {
  struct Removal {
    std::string setting;
    Hive removed_hive = Hive::User;
    bool merged_label = false;
  };
  std::vector<Removal> removals;

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : removals)
      arr.push_back({{"setting", r.setting},
                     {"removed_hive", std::string(hive_name(r.removed_hive))},
                     {"merged_label", r.merged_label}});
    return {{"removed", removals.size()}, {"removals", arr}};
  }
};

// Collapses hive duplicates: items sharing (setting, normalized description)
// keep the Machine instance, labeled SR if any group member was SR.
inline LabeledDataset dedup_hives(const LabeledDataset& ds, DedupReport* report = nullptr) {
  std::map<std::string, std::vector<std::size_t>> groups;
  std::vector<std::string> group_order;
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    std::string key = ds.items[i].setting + "\x1f" + normalize_description(ds.items[i].description);
    auto it = groups.find(key);
    if (it == groups.end()) {
      groups.emplace(key, std::vector<std::size_t>{i});
      group_order.push_back(std::move(key));
    } else {
      it->second.push_back(i);
    }
  }
  LabeledDataset out;
  out.os_label = ds.os_label;
  out.guide_publisher = ds.guide_publisher;
  out.guide_version = ds.guide_version;
  DedupReport local;
  for (const auto& key : group_order) {
    const auto& indices = groups[key];
    if (indices.size() == 1) {
      out.items.push_back(ds.items[indices[0]]);
      continue;
    }
    std::size_t keep = indices[0];
    for (std::size_t idx : indices)
      if (ds.items[idx].hive == Hive::Machine) {
        keep = idx;
        break;
      }
    bool any_sr = false;
    for (std::size_t idx : indices) any_sr = any_sr || ds.items[idx].is_security_relevant;
    LabeledSetting kept = ds.items[keep];
    kept.is_security_relevant = any_sr;
    for (std::size_t idx : indices) {
      if (idx == keep) continue;
      local.removals.push_back({ds.items[idx].setting, ds.items[idx].hive,
                                any_sr && !ds.items[keep].is_security_relevant});
    }
    out.items.push_back(std::move(kept));
  }
  if (report) *report = std::move(local);
  return out;
}

// Stratified split that keeps identical normalized descriptions on one side.
inline std::pair<LabeledDataset, LabeledDataset> split_disjoint(const LabeledDataset& ds,
                                                                double test_fraction,
                                                                std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ValidationError("split: test fraction must be in (0, 1)");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ds.items.size(); ++i)
    groups[normalize_description(ds.items[i].description)].push_back(i);

  struct GroupRef {
    const std::vector<std::size_t>* indices;
    bool sr = false;
  };
  std::vector<GroupRef> sr_groups, nsr_groups;
  std::size_t sr_items = 0, nsr_items = 0;
  for (const auto& [key, indices] : groups) {  // sorted keys: deterministic base order
    bool any_sr = false;
    for (std::size_t idx : indices) any_sr = any_sr || ds.items[idx].is_security_relevant;
    (any_sr ? sr_groups : nsr_groups).push_back({&indices, any_sr});
    (any_sr ? sr_items : nsr_items) += indices.size();
  }
  if (sr_groups.empty() || nsr_groups.empty())
    throw ValidationError("split: cannot stratify a single-class dataset");

  const std::size_t total = ds.items.size();
  const auto total_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(total)));
  bool sr_is_minority = sr_items <= nsr_items;
  std::size_t minority_items = sr_is_minority ? sr_items : nsr_items;
  auto minority_target =
      static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(minority_items)));
  minority_target = std::min(minority_target, total_test);
  std::size_t majority_target = total_test - minority_target;

  std::set<std::size_t> test_indices;
  auto assign = [&](std::vector<GroupRef>& stratum, std::size_t target, std::uint64_t salt) {
    Rng rng(mix64(seed, salt));
    rng.shuffle(stratum);
    std::size_t taken = 0;
    for (const auto& group : stratum) {
      if (taken >= target) break;
      for (std::size_t idx : *group.indices) test_indices.insert(idx);
      taken += group.indices->size();
    }
  };
  assign(sr_is_minority ? sr_groups : nsr_groups, minority_target, 0x5352);
  assign(sr_is_minority ? nsr_groups : sr_groups, majority_target, 0x4e53);

  LabeledDataset train, test;
  for (auto* part : {&train, &test}) {
    part->os_label = ds.os_label;
    part->guide_publisher = ds.guide_publisher;
    part->guide_version = ds.guide_version;
  }
  for (std::size_t i = 0; i < ds.items.size(); ++i)
    (test_indices.count(i) ? test : train).items.push_back(ds.items[i]);
  return {std::move(train), std::move(test)};
}

// Oversamples the minority class (with replacement) and undersamples the
// majority class (without) to the requested per-class item counts.
inline LabeledDataset resample(const LabeledDataset& ds, std::size_t sr_target,
                               std::size_t nsr_target, std::uint64_t seed) {
  if (sr_target == 0 || nsr_target == 0)
    throw ValidationError("resample: class targets must be positive");
  std::vector<std::size_t> sr_indices, nsr_indices;
  for (std::size_t i = 0; i < ds.items.size(); ++i)
    (ds.items[i].is_security_relevant ? sr_indices : nsr_indices).push_back(i);
  if (sr_indices.empty() || nsr_indices.empty())
    throw ValidationError("resample: dataset must contain both classes");

  bool sr_is_minority = sr_indices.size() <= nsr_indices.size();
  const auto& minority = sr_is_minority ? sr_indices : nsr_indices;
  const auto& majority = sr_is_minority ? nsr_indices : sr_indices;
  std::size_t minority_target = sr_is_minority ? sr_target : nsr_target;
  std::size_t majority_target = sr_is_minority ? nsr_target : sr_target;
  if (minority_target < minority.size())
    throw ValidationError("resample: oversample target below minority class size");
  if (majority_target > majority.size())
    throw ValidationError("resample: undersample target exceeds majority class size");

  Rng rng(seed);
  std::set<std::size_t> kept(minority.begin(), minority.end());
  if (majority_target == majority.size()) {
    kept.insert(majority.begin(), majority.end());
  } else {
    std::vector<std::size_t> pool(majority);
    rng.shuffle(pool);
    pool.resize(majority_target);
    kept.insert(pool.begin(), pool.end());
  }

  LabeledDataset out;
  out.os_label = ds.os_label;
  out.guide_publisher = ds.guide_publisher;
  out.guide_version = ds.guide_version;
  for (std::size_t i = 0; i < ds.items.size(); ++i)
    if (kept.count(i)) out.items.push_back(ds.items[i]);
  for (std::size_t extra = minority.size(); extra < minority_target; ++extra) {
    std::size_t pick = minority[static_cast<std::size_t>(rng.below(minority.size()))];
    out.items.push_back(ds.items[pick]);
  }
  return out;
}

}  // namespace secrel
