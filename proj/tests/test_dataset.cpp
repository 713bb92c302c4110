#include <set>

#include <catch2/catch_amalgamated.hpp>

#include "secrel/dataset.hpp"

using namespace secrel;

namespace {

std::string fixture(const std::string& name) {
  return std::string(SECREL_FIXTURE_DIR) + "/" + name;
}

SettingCatalog five_catalog() {
  auto admx = parse_admx(xml::parse_file(fixture("five.admx")));
  auto adml = parse_adml(xml::parse_file(fixture("en-US/five.adml")));
  return resolve_catalog(admx.policies, admx.categories, adml.table, "W10 1909");
}

LabeledDataset synthetic_dataset(std::size_t sr, std::size_t nsr) {
  LabeledDataset ds;
  ds.os_label = "synthetic";
  for (std::size_t i = 0; i < sr + nsr; ++i) {
    LabeledSetting item;
    item.setting = "Category \\ Setting " + std::to_string(i);
    item.description = "Description number " + std::to_string(i) + " explains a policy in detail.";
    item.is_security_relevant = i < sr;
    ds.items.push_back(std::move(item));
  }
  return ds;
}

}  // namespace

TEST_CASE("label_catalog: five-setting fixture against brute-force join") {
  SettingCatalog catalog = five_catalog();
  auto parsed = parse_xccdf(xml::parse_file(fixture("five_guide.xml")));
  RuleTargetMap targets = match_rules(parsed.guide, catalog);
  LabeledDataset ds = label_catalog(catalog, targets, parsed.guide);

  REQUIRE(ds.items.size() == 5);
  CHECK(ds.guide_publisher == "CIS");
  CHECK(ds.sr_count() == 2);

  // independent brute-force join over the pair list
  std::size_t expected_sr = 0;
  for (const auto& item : ds.items) {
    bool found = false;
    for (const auto& pair : targets.pairs)
      if (pair.setting_path == item.setting && pair.hive == item.hive) found = true;
    if (found) ++expected_sr;
    CHECK(item.is_security_relevant == found);
  }
  CHECK(expected_sr == 2);
}

TEST_CASE("label_catalog: golden-fixture labels") {
  auto admx = parse_admx(xml::parse_file(fixture("personalization.admx")));
  auto adml = parse_adml(xml::parse_file(fixture("en-US/personalization.adml")));
  SettingCatalog catalog = resolve_catalog(admx.policies, admx.categories, adml.table, "W10 1909");
  auto parsed = parse_xccdf(xml::parse_file(fixture("personalization_guide.xml")));
  RuleTargetMap targets = match_rules(parsed.guide, catalog);
  LabeledDataset ds = label_catalog(catalog, targets, parsed.guide);
  REQUIRE(ds.items.size() == 2);
  CHECK(ds.items[0].setting ==
        "Control Panel \\ Personalization \\ Force a specific background and accent color");
  CHECK(!ds.items[0].is_security_relevant);
  CHECK(ds.items[1].setting ==
        "Control Panel \\ Personalization \\ Prevent enabling lock screen camera");
  CHECK(ds.items[1].is_security_relevant);
}

TEST_CASE("label_catalog: empty target map labels everything false") {
  SettingCatalog catalog = five_catalog();
  RuleTargetMap empty;
  Guide guide;
  guide.publisher_label = "CIS";
  LabeledDataset ds = label_catalog(catalog, empty, guide);
  CHECK(ds.sr_count() == 0);
}

TEST_CASE("label_catalog: stale map is an error") {
  SettingCatalog catalog = five_catalog();
  RuleTargetMap targets;
  targets.pairs.push_back({"r", "No Such \\ Setting", Hive::Machine});
  Guide guide;
  CHECK_THROWS_WITH(label_catalog(catalog, targets, guide),
                    Catch::Matchers::ContainsSubstring("stale"));
}

TEST_CASE("dataset yaml: write/read round trip") {
  SettingCatalog catalog = five_catalog();
  auto parsed = parse_xccdf(xml::parse_file(fixture("five_guide.xml")));
  LabeledDataset ds = label_catalog(catalog, match_rules(parsed.guide, catalog), parsed.guide);

  LabeledDataset back = dataset_from_yaml(dataset_to_yaml(ds));
  REQUIRE(back.items.size() == ds.items.size());
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    CHECK(back.items[i].setting == ds.items[i].setting);
    CHECK(back.items[i].description == ds.items[i].description);
    CHECK(back.items[i].is_security_relevant == ds.items[i].is_security_relevant);
    CHECK(back.items[i].hive == ds.items[i].hive);
  }

  LabeledDataset extended = dataset_from_yaml(dataset_to_yaml(ds, DatasetFormat::Extended));
  CHECK(extended.os_label == "W10 1909");
  CHECK(extended.guide_publisher == "CIS");
  REQUIRE(extended.items.size() == ds.items.size());
  for (std::size_t i = 0; i < ds.items.size(); ++i)
    CHECK(extended.items[i].hive == ds.items[i].hive);
}

TEST_CASE("dataset yaml: descriptions with special characters survive") {
  LabeledDataset ds;
  LabeledSetting item;
  item.setting = "Cat \\ Colon: in name";
  item.description = "Value in hex as #RGB with quote \" and backslash C:\\path.";
  item.is_security_relevant = true;
  ds.items.push_back(item);
  LabeledDataset back = dataset_from_yaml(dataset_to_yaml(ds));
  REQUIRE(back.items.size() == 1);
  CHECK(back.items[0].setting == item.setting);
  CHECK(back.items[0].description == item.description);
}

TEST_CASE("dataset yaml: empty dataset round trips") {
  LabeledDataset empty;
  std::string text = dataset_to_yaml(empty);
  CHECK(text == "[]\n");
  CHECK(dataset_from_yaml(text).items.empty());
}

TEST_CASE("dataset yaml: missing keys name the item and key") {
  CHECK_THROWS_WITH(dataset_from_yaml("- setting: A\n  is_security_relevant: true\n"),
                    Catch::Matchers::ContainsSubstring("item 0") &&
                        Catch::Matchers::ContainsSubstring("description"));
  CHECK_THROWS_WITH(
      dataset_from_yaml("- setting: A\n  description: \"d\"\n  is_security_relevant: true\n"
                        "- description: \"d2\"\n  is_security_relevant: false\n"),
      Catch::Matchers::ContainsSubstring("item 1") &&
          Catch::Matchers::ContainsSubstring("setting"));
}

TEST_CASE("dataset yaml: non-boolean label is a type error at the item") {
  CHECK_THROWS_WITH(
      dataset_from_yaml("- setting: A\n  description: \"d\"\n  is_security_relevant: \"yes\"\n"),
      Catch::Matchers::ContainsSubstring("item 0") &&
          Catch::Matchers::ContainsSubstring("is_security_relevant"));
  CHECK_THROWS_WITH(
      dataset_from_yaml("- setting: A\n  description: \"d\"\n  is_security_relevant: yes\n"),
      Catch::Matchers::ContainsSubstring("true or false"));
}

TEST_CASE("dataset yaml: unknown keys are preserved") {
  std::string text =
      "- setting: A\n  description: \"d\"\n  is_security_relevant: false\n  note: extra info\n";
  LabeledDataset ds = dataset_from_yaml(text);
  REQUIRE(ds.items.size() == 1);
  REQUIRE(ds.items[0].extras.size() == 1);
  CHECK(ds.items[0].extras[0].first == "note");
  CHECK(ds.items[0].extras[0].second == "extra info");
  CHECK(dataset_from_yaml(dataset_to_yaml(ds)).items[0].extras == ds.items[0].extras);
}

TEST_CASE("dataset yaml: hive duplicates in plain-format files") {
  std::string text =
      "- setting: Dup\n  description: \"d\"\n  is_security_relevant: true\n"
      "- setting: Dup\n  description: \"d\"\n  is_security_relevant: false\n";
  LabeledDataset ds = dataset_from_yaml(text);
  REQUIRE(ds.items.size() == 2);
  CHECK(ds.items[0].hive == Hive::Machine);
  CHECK(ds.items[1].hive == Hive::User);
  CHECK_THROWS_AS(dataset_from_yaml(text + "- setting: Dup\n  description: \"d\"\n"
                                           "  is_security_relevant: false\n"),
                  ValidationError);
}

TEST_CASE("dedup_hives: machine instance kept, label is OR") {
  auto make = [](bool machine_sr, bool user_sr) {
    LabeledDataset ds;
    for (int i = 0; i < 2; ++i) {
      LabeledSetting item;
      item.setting = "Windows Components \\ Windows Installer \\ Always install elevated";
      item.description = "Directs Windows Installer to use elevated permissions.";
      item.hive = i == 0 ? Hive::Machine : Hive::User;
      item.is_security_relevant = i == 0 ? machine_sr : user_sr;
      ds.items.push_back(item);
    }
    return ds;
  };

  DedupReport report;
  LabeledDataset a = dedup_hives(make(true, false), &report);
  REQUIRE(a.items.size() == 1);
  CHECK(a.items[0].hive == Hive::Machine);
  CHECK(a.items[0].is_security_relevant);
  CHECK(report.removals.size() == 1);
  CHECK(report.removals[0].removed_hive == Hive::User);

  LabeledDataset b = dedup_hives(make(false, true));
  REQUIRE(b.items.size() == 1);
  CHECK(b.items[0].hive == Hive::Machine);
  CHECK(b.items[0].is_security_relevant);  // SR wins across hives
}

TEST_CASE("dedup_hives: datasets without duplicates are unchanged") {
  LabeledDataset ds = synthetic_dataset(2, 3);
  LabeledDataset out = dedup_hives(ds);
  REQUIRE(out.items.size() == ds.items.size());
  for (std::size_t i = 0; i < ds.items.size(); ++i) CHECK(out.items[i] == ds.items[i]);
}

TEST_CASE("dedup_hives: differing descriptions are not merged") {
  LabeledDataset ds;
  for (int i = 0; i < 2; ++i) {
    LabeledSetting item;
    item.setting = "Same \\ Path";
    item.description = i == 0 ? "Machine text." : "Different user text.";
    item.hive = i == 0 ? Hive::Machine : Hive::User;
    ds.items.push_back(item);
  }
  CHECK(dedup_hives(ds).items.size() == 2);
}

TEST_CASE("split_disjoint: stratified example") {
  LabeledDataset ds = synthetic_dataset(10, 90);
  auto [train, test] = split_disjoint(ds, 0.2, 7);
  CHECK(train.items.size() + test.items.size() == 100);
  CHECK(test.items.size() >= 19);
  CHECK(test.items.size() <= 21);
  CHECK(test.sr_count() >= 1);
  CHECK(test.sr_count() <= 3);
}

TEST_CASE("split_disjoint: two items, one per class") {
  LabeledDataset ds = synthetic_dataset(1, 1);
  auto [train, test] = split_disjoint(ds, 0.5, 3);
  CHECK(train.items.size() == 1);
  CHECK(test.items.size() == 1);
}

TEST_CASE("split_disjoint: identical descriptions never straddle") {
  LabeledDataset ds = synthetic_dataset(8, 40);
  // plant duplicated descriptions across several items
  for (std::size_t i = 0; i < ds.items.size(); i += 4)
    ds.items[i].description = "Shared description text repeated across settings.";
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto [train, test] = split_disjoint(ds, 0.3, seed);
    std::set<std::string> in_train, in_test;
    for (const auto& item : train.items) in_train.insert(normalize_description(item.description));
    for (const auto& item : test.items) in_test.insert(normalize_description(item.description));
    for (const auto& text : in_test) CHECK(in_train.count(text) == 0);
  }
}

TEST_CASE("split_disjoint: deterministic under seed") {
  LabeledDataset ds = synthetic_dataset(10, 90);
  auto [train1, test1] = split_disjoint(ds, 0.2, 42);
  auto [train2, test2] = split_disjoint(ds, 0.2, 42);
  CHECK(dataset_to_yaml(test1) == dataset_to_yaml(test2));
  auto [train3, test3] = split_disjoint(ds, 0.2, 43);
  CHECK(dataset_to_yaml(test1) != dataset_to_yaml(test3));
}

TEST_CASE("split_disjoint: single-class dataset cannot stratify") {
  LabeledDataset ds = synthetic_dataset(0, 10);
  CHECK_THROWS_WITH(split_disjoint(ds, 0.2, 1), Catch::Matchers::ContainsSubstring("stratify"));
}

TEST_CASE("split_disjoint: fraction bounds") {
  LabeledDataset ds = synthetic_dataset(5, 5);
  CHECK_THROWS_AS(split_disjoint(ds, 0.0, 1), ValidationError);
  CHECK_THROWS_AS(split_disjoint(ds, 1.0, 1), ValidationError);
}

TEST_CASE("resample: oversample and undersample to targets") {
  LabeledDataset ds = synthetic_dataset(10, 90);
  LabeledDataset out = resample(ds, 30, 60, 5);
  CHECK(out.sr_count() == 30);
  CHECK(out.items.size() == 90);
}

TEST_CASE("resample: identity when targets equal current counts") {
  LabeledDataset ds = synthetic_dataset(10, 90);
  LabeledDataset out = resample(ds, 10, 90, 5);
  REQUIRE(out.items.size() == ds.items.size());
  for (std::size_t i = 0; i < ds.items.size(); ++i) CHECK(out.items[i] == ds.items[i]);
}

TEST_CASE("resample: deterministic under seed") {
  LabeledDataset ds = synthetic_dataset(10, 90);
  CHECK(dataset_to_yaml(resample(ds, 30, 60, 9)) == dataset_to_yaml(resample(ds, 30, 60, 9)));
  CHECK(dataset_to_yaml(resample(ds, 30, 60, 9)) != dataset_to_yaml(resample(ds, 30, 60, 10)));
}

TEST_CASE("resample: undersample target above majority size is an error") {
  LabeledDataset ds = synthetic_dataset(10, 90);
  CHECK_THROWS_WITH(resample(ds, 30, 95, 1), Catch::Matchers::ContainsSubstring("undersample"));
  CHECK_THROWS_WITH(resample(ds, 5, 60, 1), Catch::Matchers::ContainsSubstring("oversample"));
}
