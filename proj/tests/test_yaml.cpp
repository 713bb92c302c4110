#include <catch2/catch_amalgamated.hpp>

#include "secrel/yaml.hpp"

using namespace secrel;

TEST_CASE("yaml: sequence of flat mappings") {
  auto root = yamlx::parse(
      "- setting: Control Panel \\ Personalization \\ Prevent enabling lock screen camera\n"
      "  description: \"Disables the camera.\"\n"
      "  is_security_relevant: true\n"
      "- setting: Other\n"
      "  description: \"x\"\n"
      "  is_security_relevant: false\n");
  REQUIRE(root.is_sequence());
  REQUIRE(root.items.size() == 2);
  const auto& first = root.items[0];
  REQUIRE(first.is_mapping());
  CHECK(first.find("setting")->str() ==
        "Control Panel \\ Personalization \\ Prevent enabling lock screen camera");
  CHECK(first.find("description")->str() == "Disables the camera.");
  CHECK(first.find("description")->quoted);
  CHECK(first.find("is_security_relevant")->is_bool());
  CHECK(first.find("is_security_relevant")->as_bool());
}

TEST_CASE("yaml: paper-style deeper continuation indent") {
  auto root = yamlx::parse(
      "- setting: A\n"
      "    description: \"d\"\n"
      "    is_security_relevant: false\n");
  REQUIRE(root.is_sequence());
  CHECK(root.items[0].entries.size() == 3);
}

TEST_CASE("yaml: nested mappings and lists") {
  auto root = yamlx::parse(
      "paths:\n"
      "  guides:\n"
      "    - a.xml\n"
      "    - b.xml\n"
      "  model: out/model.json\n"
      "lda:\n"
      "  topics: 9\n"
      "seed: 42\n");
  REQUIRE(root.is_mapping());
  const auto* paths = root.find("paths");
  REQUIRE(paths);
  const auto* guides = paths->find("guides");
  REQUIRE(guides);
  REQUIRE(guides->is_sequence());
  CHECK(guides->items[0].str() == "a.xml");
  CHECK(root.find("lda")->find("topics")->str() == "9");
  CHECK(root.find("seed")->str() == "42");
}

TEST_CASE("yaml: comments and blank lines") {
  auto root = yamlx::parse(
      "# header comment\n"
      "\n"
      "key: value # trailing comment\n"
      "other: \"kept # inside quotes\"\n");
  CHECK(root.find("key")->str() == "value");
  CHECK(root.find("other")->str() == "kept # inside quotes");
}

TEST_CASE("yaml: quoted scalar escapes") {
  auto root = yamlx::parse("a: \"line\\nbreak \\\"q\\\" \\\\ \\u00e4\"\n");
  CHECK(root.find("a")->str() == "line\nbreak \"q\" \\ \xc3\xa4");
}

TEST_CASE("yaml: single-quoted scalars") {
  auto root = yamlx::parse("a: 'it''s plain'\n");
  CHECK(root.find("a")->str() == "it's plain");
}

TEST_CASE("yaml: multi-line plain scalar folds to spaces") {
  auto root = yamlx::parse(
      "key: first part\n"
      "  second part\n"
      "  third part\n"
      "next: x\n");
  CHECK(root.find("key")->str() == "first part second part third part");
  CHECK(root.find("next")->str() == "x");
}

TEST_CASE("yaml: multi-line double-quoted scalar") {
  auto root = yamlx::parse(
      "key: \"first\n"
      "  second\"\n");
  CHECK(root.find("key")->str() == "first second");
}

TEST_CASE("yaml: literal and folded block scalars") {
  auto lit = yamlx::parse("key: |\n  line one\n  line two\n");
  CHECK(lit.find("key")->str() == "line one\nline two\n");
  auto folded = yamlx::parse("key: >\n  line one\n  line two\n");
  CHECK(folded.find("key")->str() == "line one line two\n");
  auto stripped = yamlx::parse("key: |-\n  line one\n");
  CHECK(stripped.find("key")->str() == "line one");
}

TEST_CASE("yaml: document marker") {
  auto root = yamlx::parse("---\nkey: v\n");
  CHECK(root.find("key")->str() == "v");
}

TEST_CASE("yaml: errors carry line numbers") {
  try {
    yamlx::parse("key: v\nkey: w\n");
    FAIL("expected duplicate-key error");
  } catch (const yamlx::ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(yamlx::parse("\tkey: v\n"), yamlx::ParseError);
  CHECK_THROWS_AS(yamlx::parse("a: \"unterminated\n"), yamlx::ParseError);
}

TEST_CASE("yaml: quoted flag distinguishes strings from booleans") {
  auto root = yamlx::parse("a: \"true\"\nb: true\nc: yes\n");
  CHECK(!root.find("a")->is_bool());
  CHECK(root.find("b")->is_bool());
  CHECK(!root.find("c")->is_bool());
}
