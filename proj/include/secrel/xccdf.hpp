#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "secrel/admx.hpp"
#include "secrel/diag.hpp"
#include "secrel/xml.hpp"

namespace secrel {

enum class Publisher { CIS, Siemens, Other };

inline std::string_view publisher_name(Publisher p) {
  switch (p) {
    case Publisher::CIS: return "CIS";
    case Publisher::Siemens: return "Siemens";
    default: return "Other";
  }
}

struct RegistryHint {
  std::string path;                       // hive prefix stripped
  std::optional<std::string> value_name;  // present when given as key:value
  std::optional<Hive> hive;
};

struct GuideRule {
  std::string rule_id;
  std::string title;
  std::string description;
  std::string rationale;  // possibly empty
  std::optional<RegistryHint> registry_hint;
};

struct Guide {
  Publisher publisher = Publisher::Other;
  std::string publisher_label;  // "CIS", "Siemens", or the detected name
  std::string platform_label;
  std::string version;
  std::vector<GuideRule> rules;
};

struct XccdfParseResult {
  Guide guide;
  std::vector<Diagnostic> diagnostics;
};

namespace xccdf_detail {

inline char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = ascii_lower(c);
  return out;
}

inline bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (ascii_lower(a[i]) != ascii_lower(b[i])) return false;
  return true;
}

inline bool icontains_word(const std::string& haystack_lower, std::string_view needle_lower) {
  std::size_t pos = 0;
  while ((pos = haystack_lower.find(needle_lower, pos)) != std::string::npos) {
    bool left_ok = pos == 0 || !isalnum(static_cast<unsigned char>(haystack_lower[pos - 1]));
    std::size_t end = pos + needle_lower.size();
    bool right_ok = end >= haystack_lower.size() ||
                    !isalnum(static_cast<unsigned char>(haystack_lower[end]));
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

inline bool is_registry_path_char(char c) {
  return c != '"' && c != '\'' && c != '<' && c != '>' && c != '\n' && c != '\r' && c != '\t' &&
         c != ',' && c != ';' && c != '(' && c != ')';
}

// First registry path found in free text, e.g.
// "HKLM\Software\Policies\Microsoft\Windows\Personalization:NoLockScreenCamera".
inline std::optional<RegistryHint> extract_registry_hint(const std::string& text) {
  static const std::pair<std::string_view, Hive> prefixes[] = {
      {"hkey_local_machine", Hive::Machine},
      {"hklm", Hive::Machine},
      {"hkey_current_user", Hive::User},
      {"hkcu", Hive::User},
  };
  std::string low = lower(text);
  std::size_t best = std::string::npos;
  Hive hive = Hive::Machine;
  std::size_t prefix_len = 0;
  for (const auto& [prefix, h] : prefixes) {
    std::size_t pos = low.find(prefix);
    while (pos != std::string::npos) {
      std::size_t after = pos + prefix.size();
      if (after < low.size() && (low[after] == '\\' || low[after] == ':')) {
        if (pos < best) {
          best = pos;
          hive = h;
          prefix_len = prefix.size();
        }
        break;
      }
      pos = low.find(prefix, pos + 1);
    }
  }
  if (best == std::string::npos) return std::nullopt;
  std::size_t start = best + prefix_len;
  if (text[start] == ':') ++start;  // "HKLM:\..." PowerShell drive form
  while (start < text.size() && text[start] == '\\') ++start;
  std::size_t end = start;
  while (end < text.size() && is_registry_path_char(text[end])) ++end;
  std::string path = text.substr(start, end - start);
  while (!path.empty() && (path.back() == ' ' || path.back() == '.' || path.back() == '\\'))
    path.pop_back();
  if (path.empty()) return std::nullopt;
  RegistryHint hint;
  hint.hive = hive;
  auto colon = path.find(':');
  if (colon != std::string::npos) {
    hint.value_name = path.substr(colon + 1);
    path.resize(colon);
    while (!path.empty() && path.back() == ' ') path.pop_back();
  }
  hint.path = std::move(path);
  return hint;
}

inline std::string element_text(const xml::Element* el) {
  return el ? admx_detail::collapse_whitespace(el->all_text()) : std::string{};
}

inline void collect_rules(const xml::Element& el, XccdfParseResult& result,
                          std::set<std::string>& seen_ids) {
  for (const xml::Element& child : el.children) {
    std::string_view local = child.local();
    if (local == "Group") {
      collect_rules(child, result, seen_ids);
    } else if (local == "Rule") {
      const std::string* id = child.attr("id");
      std::string rule_id = id ? *id : "<rule>";
      std::string title = element_text(child.first_child("title"));
      if (title.empty()) {
        result.diagnostics.push_back(
            Diagnostic::excluded(rule_id, "rule without title skipped", child.line));
        continue;
      }
      if (!id || !seen_ids.insert(*id).second) {
        result.diagnostics.push_back(Diagnostic::excluded(
            rule_id, !id ? "rule without id skipped" : "duplicate rule id skipped", child.line));
        continue;
      }
      GuideRule rule;
      rule.rule_id = rule_id;
      rule.title = std::move(title);
      rule.description = element_text(child.first_child("description"));
      rule.rationale = element_text(child.first_child("rationale"));
      std::string check_blob;
      for (const xml::Element* check : child.children_named("check")) {
        check_blob += check->all_text();
        check_blob += ' ';
        for (const xml::Element& part : check->children)
          for (const auto& attr : part.attrs) {
            check_blob += attr.value;
            check_blob += ' ';
          }
      }
      rule.registry_hint = extract_registry_hint(check_blob);
      result.guide.rules.push_back(std::move(rule));
    }
  }
}

}  // namespace xccdf_detail

inline XccdfParseResult parse_xccdf(const xml::Document& doc) {
  XccdfParseResult result;
  const xml::Element& root = doc.root;
  if (root.local() != "Benchmark")
    throw ValidationError("not an XCCDF document: root element is <" + root.name + ">");
  std::string title = xccdf_detail::element_text(root.first_child("title"));
  result.guide.version = xccdf_detail::element_text(root.first_child("version"));
  result.guide.platform_label = title;

  std::string low = xccdf_detail::lower(title);
  if (low.find("cis") != std::string::npos) {
    result.guide.publisher = Publisher::CIS;
    result.guide.publisher_label = "CIS";
  } else if (low.find("siemens") != std::string::npos) {
    result.guide.publisher = Publisher::Siemens;
    result.guide.publisher_label = "Siemens";
  } else {
    result.guide.publisher = Publisher::Other;
    const std::string* id = root.attr("id");
    result.guide.publisher_label = id ? *id : (title.empty() ? "unknown" : title);
  }

  std::set<std::string> seen_ids;
  xccdf_detail::collect_rules(root, result, seen_ids);
  return result;
}

struct TargetPair {
  std::string rule_id;
  std::string setting_path;
  Hive hive = Hive::Machine;
};

struct RuleTargetMap {
  std::vector<TargetPair> pairs;
  std::vector<std::string> unmatched_rules;
  std::vector<std::string> ambiguous_rules;
  std::vector<std::string> injectivity_violations;

  nlohmann::json to_json() const {
    nlohmann::json pairs_json = nlohmann::json::array();
    for (const auto& p : pairs)
      pairs_json.push_back({{"rule", p.rule_id},
                            {"setting", p.setting_path},
                            {"hive", std::string(hive_name(p.hive))}});
    return {{"pairs", pairs_json},
            {"unmatched", unmatched_rules},
            {"ambiguous", ambiguous_rules},
            {"injectivity_violations", injectivity_violations}};
  }
};

namespace xccdf_detail {

// Lowercases, strips straight and curly quotes, folds path separators and
// runs of whitespace to single spaces.
inline std::string normalize_for_match(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (c == 0xe2 && i + 2 < text.size()) {
      unsigned char b1 = static_cast<unsigned char>(text[i + 1]);
      unsigned char b2 = static_cast<unsigned char>(text[i + 2]);
      if (b1 == 0x80 && (b2 == 0x98 || b2 == 0x99 || b2 == 0x9c || b2 == 0x9d)) {
        i += 2;
        continue;
      }
    }
    if (c == '\'' || c == '"' || c == '`') continue;
    if (c == '\\' || c == '/') {
      out += ' ';
      continue;
    }
    out += ascii_lower(static_cast<char>(c));
  }
  std::string collapsed;
  collapsed.reserve(out.size());
  bool in_space = true;
  for (char c : out) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      if (!in_space) collapsed += ' ';
      in_space = true;
    } else {
      collapsed += c;
      in_space = false;
    }
  }
  while (!collapsed.empty() && collapsed.back() == ' ') collapsed.pop_back();
  return collapsed;
}

inline bool contains_normalized(const std::string& haystack, const std::string& needle) {
  if (needle.empty()) return false;
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string::npos) {
    bool left_ok = pos == 0 || haystack[pos - 1] == ' ';
    std::size_t end = pos + needle.size();
    bool right_ok = end >= haystack.size() || haystack[end] == ' ';
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

inline std::vector<std::string> path_segments(std::string_view path) {
  std::vector<std::string> segments;
  std::size_t pos = 0;
  const std::string separator = " \\ ";
  for (;;) {
    std::size_t next = path.find(separator, pos);
    if (next == std::string_view::npos) {
      segments.emplace_back(path.substr(pos));
      break;
    }
    segments.emplace_back(path.substr(pos, next - pos));
    pos = next + separator.size();
  }
  return segments;
}

inline bool hint_matches_setting(const RegistryHint& hint, const PolicySetting& setting) {
  if (hint.value_name) {
    return setting.value_name && iequals(hint.path, setting.registry_key) &&
           iequals(*hint.value_name, *setting.value_name);
  }
  if (setting.value_name) {
    std::string joined = setting.registry_key + "\\" + *setting.value_name;
    if (iequals(hint.path, joined)) return true;
  }
  return iequals(hint.path, setting.registry_key);
}

}  // namespace xccdf_detail

// Strategy 1: the normalized tail of the setting path (leaf first, deeper
// suffixes to disambiguate) appears in the normalized rule title.
// Strategy 2: registry hint equality. Hive choice prefers Machine unless the
// rule names the user hive.
inline RuleTargetMap match_rules(const Guide& guide, const SettingCatalog& catalog) {
  using namespace xccdf_detail;

  struct PathInfo {
    std::string path;
    std::vector<std::string> normalized_suffixes;  // index 0 = leaf only
    std::vector<const PolicySetting*> instances;
  };
  std::map<std::string, std::size_t> path_index;
  std::vector<PathInfo> paths;
  for (const auto& setting : catalog.settings) {
    auto it = path_index.find(setting.setting_path);
    if (it == path_index.end()) {
      PathInfo info;
      info.path = setting.setting_path;
      auto segments = path_segments(setting.setting_path);
      std::string suffix;
      for (auto seg = segments.rbegin(); seg != segments.rend(); ++seg) {
        suffix = suffix.empty() ? normalize_for_match(*seg)
                                : normalize_for_match(*seg) + " " + suffix;
        info.normalized_suffixes.push_back(suffix);
      }
      it = path_index.emplace(setting.setting_path, paths.size()).first;
      paths.push_back(std::move(info));
    }
    paths[it->second].instances.push_back(&setting);
  }

  RuleTargetMap map;
  for (const auto& rule : guide.rules) {
    std::string title = normalize_for_match(rule.title);

    // strategy 1
    std::vector<std::pair<std::size_t, std::size_t>> candidates;  // (path idx, matched depth)
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const auto& suffixes = paths[i].normalized_suffixes;
      if (suffixes.empty() || !contains_normalized(title, suffixes[0])) continue;
      std::size_t depth = 1;
      while (depth < suffixes.size() && contains_normalized(title, suffixes[depth])) ++depth;
      candidates.emplace_back(i, depth);
    }
    if (candidates.size() > 1) {
      std::size_t best = 0;
      for (const auto& [idx, depth] : candidates) best = std::max(best, depth);
      std::erase_if(candidates, [&](const auto& c) { return c.second < best; });
    }
    if (candidates.size() > 1 && rule.registry_hint) {
      std::vector<std::pair<std::size_t, std::size_t>> narrowed;
      for (const auto& c : candidates)
        for (const PolicySetting* inst : paths[c.first].instances)
          if (hint_matches_setting(*rule.registry_hint, *inst)) {
            narrowed.push_back(c);
            break;
          }
      if (narrowed.size() == 1) candidates = std::move(narrowed);
    }

    // strategy 2 for rules with no title match
    if (candidates.empty() && rule.registry_hint) {
      for (std::size_t i = 0; i < paths.size(); ++i)
        for (const PolicySetting* inst : paths[i].instances)
          if (hint_matches_setting(*rule.registry_hint, *inst)) {
            candidates.emplace_back(i, 0);
            break;
          }
    }

    if (candidates.empty()) {
      map.unmatched_rules.push_back(rule.rule_id);
      continue;
    }
    if (candidates.size() > 1) {
      map.ambiguous_rules.push_back(rule.rule_id);
      continue;
    }

    const PathInfo& info = paths[candidates.front().first];
    bool wants_user = false;
    if (rule.registry_hint && rule.registry_hint->hive == Hive::User) wants_user = true;
    if (lower(rule.title).find("user hive") != std::string::npos) wants_user = true;
    const PolicySetting* chosen = nullptr;
    for (const PolicySetting* inst : info.instances) {
      if (inst->hive == (wants_user ? Hive::User : Hive::Machine)) {
        chosen = inst;
        break;
      }
    }
    if (!chosen) chosen = info.instances.front();
    map.pairs.push_back({rule.rule_id, chosen->setting_path, chosen->hive});
  }

  std::map<std::pair<std::string, Hive>, std::vector<const TargetPair*>> by_target;
  for (const auto& pair : map.pairs)
    by_target[{pair.setting_path, pair.hive}].push_back(&pair);
  for (const auto& [target, hits] : by_target) {
    if (hits.size() < 2) continue;
    std::string entry = "setting '" + target.first + "' (" + std::string(hive_name(target.second)) +
                        ") targeted by rules:";
    for (const TargetPair* p : hits) entry += " " + p->rule_id;
    map.injectivity_violations.push_back(std::move(entry));
  }
  return map;
}

}  // namespace secrel
