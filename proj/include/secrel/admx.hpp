#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "secrel/diag.hpp"
#include "secrel/xml.hpp"

namespace secrel {

enum class Hive { Machine, User };

inline std::string_view hive_name(Hive h) { return h == Hive::Machine ? "machine" : "user"; }

inline std::optional<Hive> parse_hive(std::string_view s) {
  if (s == "machine" || s == "Machine") return Hive::Machine;
  if (s == "user" || s == "User") return Hive::User;
  return std::nullopt;
}

enum class PolicyClass { Machine, User, Both };

struct PolicyDefinition {
  std::string policy_id;
  std::string ns;
  PolicyClass policy_class = PolicyClass::Machine;
  std::string category_ref;
  std::string display_name_ref;  // "$(string.X)"
  std::string explain_text_ref;
  std::string registry_key;
  std::optional<std::string> value_name;
  int line = 0;
};

struct CategoryNode {
  std::string category_id;
  std::optional<std::string> parent_ref;
  std::string display_name_ref;
  int line = 0;
};

struct LocaleStringTable {
  std::string language_tag = "en-US";
  std::map<std::string, std::string> entries;

  const std::string* lookup(const std::string& id) const {
    auto it = entries.find(id);
    return it == entries.end() ? nullptr : &it->second;
  }
};

struct PolicySetting {
  std::string setting_path;  // category display names + policy name, " \ "-joined
  Hive hive = Hive::Machine;
  std::string description;
  std::string registry_key;
  std::optional<std::string> value_name;
  std::string source_policy_id;
};

struct SettingCatalog {
  std::string os_label;
  std::vector<PolicySetting> settings;  // sorted by (setting_path, hive)

  const PolicySetting* find(std::string_view path, Hive hive) const {
    for (const auto& s : settings)
      if (s.hive == hive && s.setting_path == path) return &s;
    return nullptr;
  }
};

struct AdmxParseResult {
  std::vector<PolicyDefinition> policies;
  std::vector<CategoryNode> categories;
  std::vector<Diagnostic> diagnostics;
};

struct AdmlParseResult {
  LocaleStringTable table;
  std::vector<Diagnostic> diagnostics;
};

struct ResolutionReport {
  std::size_t definitions_parsed = 0;
  std::size_t instances_expanded = 0;  // class=Both counts twice
  std::size_t resolved = 0;
  std::size_t excluded = 0;
  std::vector<Diagnostic> diagnostics;

  nlohmann::json to_json() const {
    nlohmann::json diags = nlohmann::json::array();
    for (const auto& d : diagnostics)
      diags.push_back({{"severity", d.severity == Diagnostic::Severity::Warning ? "warning" : "excluded"},
                       {"subject", d.subject},
                       {"message", d.message},
                       {"line", d.line}});
    return {{"definitions_parsed", definitions_parsed},
            {"instances_expanded", instances_expanded},
            {"resolved", resolved},
            {"excluded", excluded},
            {"warnings", count_warnings(diagnostics)},
            {"diagnostics", diags}};
  }
};

namespace admx_detail {

inline std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_space = true;  // trims leading whitespace
  for (char c : text) {
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

inline bool is_string_ref(std::string_view ref) {
  constexpr std::string_view prefix = "$(string.";
  if (ref.size() < prefix.size() + 2 || ref.substr(0, prefix.size()) != prefix || ref.back() != ')')
    return false;
  std::string_view id = ref.substr(prefix.size(), ref.size() - prefix.size() - 1);
  for (char c : id)
    if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
          c == '_' || c == '.' || c == '-'))
      return false;
  return !id.empty();
}

inline std::string string_ref_id(std::string_view ref) {
  return std::string(ref.substr(9, ref.size() - 10));
}

inline std::string_view ref_local_part(std::string_view ref) {
  auto pos = ref.rfind(':');
  return pos == std::string_view::npos ? ref : ref.substr(pos + 1);
}

}  // namespace admx_detail

inline AdmxParseResult parse_admx(const xml::Document& doc) {
  AdmxParseResult result;
  const xml::Element& root = doc.root;
  if (root.local() != "policyDefinitions")
    throw ValidationError("not an ADMX document: root element is <" + root.name + ">");

  std::string ns;
  if (const xml::Element* spaces = root.first_child("policyNamespaces"))
    if (const xml::Element* target = spaces->first_child("target"))
      if (const std::string* value = target->attr("namespace")) ns = *value;

  std::set<std::string> seen_keys;
  for (const xml::Element& section : root.children) {
    std::string_view local = section.local();
    if (local == "policyNamespaces" || local == "resources" || local == "supportedOn") continue;
    if (local == "categories") {
      for (const xml::Element& el : section.children) {
        if (el.local() != "category") {
          result.diagnostics.push_back(
              Diagnostic::warning(el.name, "unknown element skipped", el.line));
          continue;
        }
        const std::string* name = el.attr("name");
        const std::string* display = el.attr("displayName");
        if (!name || name->empty() || !display) {
          result.diagnostics.push_back(
              Diagnostic::excluded(name ? *name : "<category>",
                                   "category missing name or displayName", el.line));
          continue;
        }
        if (!admx_detail::is_string_ref(*display)) {
          result.diagnostics.push_back(Diagnostic::excluded(
              *name, "category displayName is not a $(string.X) reference", el.line));
          continue;
        }
        CategoryNode node;
        node.category_id = *name;
        node.display_name_ref = *display;
        node.line = el.line;
        if (const xml::Element* parent = el.first_child("parentCategory"))
          if (const std::string* ref = parent->attr("ref")) node.parent_ref = *ref;
        result.categories.push_back(std::move(node));
      }
      continue;
    }
    if (local == "policies") {
      for (const xml::Element& el : section.children) {
        if (el.local() != "policy") {
          result.diagnostics.push_back(
              Diagnostic::warning(el.name, "unknown element skipped", el.line));
          continue;
        }
        const std::string* name = el.attr("name");
        std::string subject = name ? *name : "<policy>";
        const std::string* cls = el.attr("class");
        const std::string* display = el.attr("displayName");
        const std::string* explain = el.attr("explainText");
        const std::string* key = el.attr("key");
        if (!name || name->empty() || !cls || !display || !key) {
          result.diagnostics.push_back(Diagnostic::excluded(
              subject, "policy missing name, class, key or displayName", el.line));
          continue;
        }
        if (!explain) {
          result.diagnostics.push_back(
              Diagnostic::excluded(subject, "policy has no explainText", el.line));
          continue;
        }
        PolicyDefinition def;
        if (*cls == "Machine")
          def.policy_class = PolicyClass::Machine;
        else if (*cls == "User")
          def.policy_class = PolicyClass::User;
        else if (*cls == "Both")
          def.policy_class = PolicyClass::Both;
        else {
          result.diagnostics.push_back(
              Diagnostic::excluded(subject, "unknown policy class '" + *cls + "'", el.line));
          continue;
        }
        if (!admx_detail::is_string_ref(*display) || !admx_detail::is_string_ref(*explain)) {
          result.diagnostics.push_back(Diagnostic::excluded(
              subject, "displayName/explainText is not a $(string.X) reference", el.line));
          continue;
        }
        std::string unique_key = ns + "\x1f" + *name + "\x1f" + *cls;
        if (!seen_keys.insert(unique_key).second) {
          result.diagnostics.push_back(Diagnostic::excluded(
              subject, "duplicate policy (namespace, id, class)", el.line));
          continue;
        }
        def.policy_id = *name;
        def.ns = ns;
        def.display_name_ref = *display;
        def.explain_text_ref = *explain;
        def.registry_key = *key;
        if (const std::string* value = el.attr("valueName")) def.value_name = *value;
        if (const xml::Element* parent = el.first_child("parentCategory"))
          if (const std::string* ref = parent->attr("ref")) def.category_ref = *ref;
        def.line = el.line;
        result.policies.push_back(std::move(def));
      }
      continue;
    }
    result.diagnostics.push_back(
        Diagnostic::warning(section.name, "unknown element skipped", section.line));
  }
  return result;
}

inline AdmlParseResult parse_adml(const xml::Document& doc, std::string language_tag = "en-US") {
  AdmlParseResult result;
  result.table.language_tag = std::move(language_tag);
  const xml::Element& root = doc.root;
  const xml::Element* string_table = nullptr;
  if (root.local() == "stringTable") {
    string_table = &root;
  } else if (const xml::Element* resources = root.first_child("resources")) {
    string_table = resources->first_child("stringTable");
  }
  if (!string_table) throw ValidationError("ADML document has no stringTable");
  for (const xml::Element& el : string_table->children) {
    if (el.local() != "string") {
      result.diagnostics.push_back(Diagnostic::warning(el.name, "unknown element skipped", el.line));
      continue;
    }
    const std::string* id = el.attr("id");
    if (!id || id->empty()) {
      result.diagnostics.push_back(Diagnostic::excluded("<string>", "string without id", el.line));
      continue;
    }
    std::string text = admx_detail::collapse_whitespace(el.all_text());
    if (text.empty()) {
      result.diagnostics.push_back(
          Diagnostic::warning(*id, "empty string resource skipped", el.line));
      continue;
    }
    if (!result.table.entries.emplace(*id, std::move(text)).second)
      throw ValidationError("duplicate string id '" + *id + "' in ADML stringTable");
  }
  return result;
}

// Tables from several ADML files merged left to right; conflicting texts keep
// the first occurrence.
inline LocaleStringTable merge_string_tables(const std::vector<LocaleStringTable>& tables,
                                             std::vector<Diagnostic>* diagnostics = nullptr) {
  LocaleStringTable merged;
  if (!tables.empty()) merged.language_tag = tables.front().language_tag;
  for (const auto& table : tables) {
    for (const auto& [id, text] : table.entries) {
      auto [it, inserted] = merged.entries.emplace(id, text);
      if (!inserted && it->second != text && diagnostics)
        diagnostics->push_back(
            Diagnostic::warning(id, "conflicting string text across ADML files; keeping first"));
    }
  }
  return merged;
}

inline SettingCatalog resolve_catalog(const std::vector<PolicyDefinition>& defs,
                                      const std::vector<CategoryNode>& cats,
                                      const LocaleStringTable& strings, std::string os_label,
                                      ResolutionReport* report_out = nullptr) {
  ResolutionReport report;
  report.definitions_parsed = defs.size();

  std::map<std::string, const CategoryNode*> by_id;
  for (const auto& cat : cats) {
    auto [it, inserted] = by_id.emplace(cat.category_id, &cat);
    if (!inserted)
      report.diagnostics.push_back(
          Diagnostic::warning(cat.category_id, "duplicate category id; keeping first", cat.line));
  }
  auto find_category = [&](std::string_view ref) -> const CategoryNode* {
    auto it = by_id.find(std::string(ref));
    if (it != by_id.end()) return it->second;
    it = by_id.find(std::string(admx_detail::ref_local_part(ref)));
    return it == by_id.end() ? nullptr : it->second;
  };

  auto resolve_string = [&](std::string_view ref) -> const std::string* {
    return strings.lookup(admx_detail::string_ref_id(ref));
  };

  // Root-to-leaf display-name chain; nullopt marks an unresolvable chain and
  // the failure reason is appended to `why`.
  auto category_path = [&](std::string_view leaf_ref, std::string& why)
      -> std::optional<std::vector<std::string>> {
    std::vector<std::string> names;
    std::set<std::string> visited;
    const CategoryNode* node = find_category(leaf_ref);
    if (!node) {
      why = "unresolved category reference '" + std::string(leaf_ref) + "'";
      return std::nullopt;
    }
    while (node) {
      if (!visited.insert(node->category_id).second)
        throw ValidationError("category cycle involving '" + node->category_id + "'");
      const std::string* display = resolve_string(node->display_name_ref);
      if (!display) {
        why = "unresolved category display name " + node->display_name_ref;
        return std::nullopt;
      }
      names.push_back(*display);
      if (!node->parent_ref) break;
      const CategoryNode* parent = find_category(*node->parent_ref);
      if (!parent) {
        why = "unresolved parent category '" + *node->parent_ref + "'";
        return std::nullopt;
      }
      node = parent;
    }
    std::reverse(names.begin(), names.end());
    return names;
  };

  SettingCatalog catalog;
  catalog.os_label = std::move(os_label);
  for (const auto& def : defs) {
    std::size_t instances = def.policy_class == PolicyClass::Both ? 2 : 1;
    report.instances_expanded += instances;
    auto exclude = [&](const std::string& why) {
      report.diagnostics.push_back(Diagnostic::excluded(def.policy_id, why, def.line));
      report.excluded += instances;
    };
    const std::string* display = resolve_string(def.display_name_ref);
    if (!display) {
      exclude("unresolved display name " + def.display_name_ref);
      continue;
    }
    const std::string* explain = resolve_string(def.explain_text_ref);
    if (!explain || explain->empty()) {
      exclude("unresolved or empty explain text " + def.explain_text_ref);
      continue;
    }
    if (def.category_ref.empty()) {
      exclude("policy has no parent category");
      continue;
    }
    std::string why;
    auto chain = category_path(def.category_ref, why);
    if (!chain) {
      exclude(why);
      continue;
    }
    std::string path;
    for (const auto& name : *chain) path += name + " \\ ";
    path += *display;

    auto add = [&](Hive hive) {
      PolicySetting setting;
      setting.setting_path = path;
      setting.hive = hive;
      setting.description = *explain;
      setting.registry_key = def.registry_key;
      setting.value_name = def.value_name;
      setting.source_policy_id = def.policy_id;
      catalog.settings.push_back(std::move(setting));
    };
    switch (def.policy_class) {
      case PolicyClass::Machine: add(Hive::Machine); break;
      case PolicyClass::User: add(Hive::User); break;
      case PolicyClass::Both:
        add(Hive::Machine);
        add(Hive::User);
        break;
    }
  }

  std::stable_sort(catalog.settings.begin(), catalog.settings.end(),
                   [](const PolicySetting& a, const PolicySetting& b) {
                     if (a.setting_path != b.setting_path) return a.setting_path < b.setting_path;
                     return a.hive < b.hive;
                   });
  std::vector<PolicySetting> unique;
  unique.reserve(catalog.settings.size());
  for (auto& setting : catalog.settings) {
    if (!unique.empty() && unique.back().setting_path == setting.setting_path &&
        unique.back().hive == setting.hive) {
      report.diagnostics.push_back(Diagnostic::excluded(
          setting.source_policy_id,
          "duplicate setting path '" + setting.setting_path + "'; keeping first"));
      report.excluded += 1;
      continue;
    }
    unique.push_back(std::move(setting));
  }
  catalog.settings = std::move(unique);
  report.resolved = catalog.settings.size();

  if (catalog.settings.empty()) throw ValidationError("empty catalog: no setting resolved");
  if (report_out) *report_out = std::move(report);
  return catalog;
}

inline nlohmann::json catalog_to_json(const SettingCatalog& catalog) {
  nlohmann::json settings = nlohmann::json::array();
  for (const auto& s : catalog.settings) {
    nlohmann::json item = {{"setting", s.setting_path},
                           {"hive", std::string(hive_name(s.hive))},
                           {"description", s.description},
                           {"registry_key", s.registry_key},
                           {"source_policy_id", s.source_policy_id}};
    if (s.value_name) item["value_name"] = *s.value_name;
    settings.push_back(std::move(item));
  }
  return {{"os_label", catalog.os_label}, {"settings", settings}};
}

inline SettingCatalog catalog_from_json(const nlohmann::json& j) {
  SettingCatalog catalog;
  catalog.os_label = j.at("os_label").get<std::string>();
  for (const auto& item : j.at("settings")) {
    PolicySetting s;
    s.setting_path = item.at("setting").get<std::string>();
    auto hive = parse_hive(item.at("hive").get<std::string>());
    if (!hive) throw ValidationError("catalog: bad hive value");
    s.hive = *hive;
    s.description = item.at("description").get<std::string>();
    s.registry_key = item.value("registry_key", std::string{});
    s.source_policy_id = item.value("source_policy_id", std::string{});
    if (item.contains("value_name")) s.value_name = item.at("value_name").get<std::string>();
    catalog.settings.push_back(std::move(s));
  }
  if (catalog.settings.empty()) throw ValidationError("empty catalog: no setting resolved");
  std::set<std::pair<std::string, Hive>> seen;
  for (const auto& s : catalog.settings)
    if (!seen.emplace(s.setting_path, s.hive).second)
      throw ValidationError("catalog: duplicate setting '" + s.setting_path + "'");
  return catalog;
}

}  // namespace secrel
