#pragma once

// Block-style YAML reader covering the subset this toolchain emits and the
// dataset files it consumes: nested block mappings/sequences, plain and
// quoted scalars (multi-line), literal/folded block scalars, comments.
// No anchors, aliases, tags, or flow collections.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "secrel/diag.hpp"

namespace secrel::yamlx {

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, int line)
      : ValidationError("YAML parse error at line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct Node {
  enum class Kind { Scalar, Sequence, Mapping };
  Kind kind = Kind::Scalar;
  std::string scalar;
  bool quoted = false;
  std::vector<Node> items;
  std::vector<std::pair<std::string, Node>> entries;
  int line = 0;

  bool is_scalar() const { return kind == Kind::Scalar; }
  bool is_sequence() const { return kind == Kind::Sequence; }
  bool is_mapping() const { return kind == Kind::Mapping; }

  const Node* find(std::string_view key) const {
    if (kind != Kind::Mapping) return nullptr;
    for (const auto& [k, v] : entries)
      if (k == key) return &v;
    return nullptr;
  }

  const std::string& str() const { return scalar; }

  // Unquoted true/false only; anything else is not a boolean.
  bool is_bool() const {
    return is_scalar() && !quoted &&
           (scalar == "true" || scalar == "false" || scalar == "True" || scalar == "False");
  }
  bool as_bool() const { return scalar == "true" || scalar == "True"; }
};

namespace detail {

struct Line {
  int indent = 0;
  std::string_view content;  // after indent, before newline
  int number = 0;
  bool blank = false;
  bool comment = false;
};

inline std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  int number = 1;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    std::string_view raw = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    Line line;
    line.number = number++;
    std::size_t i = 0;
    while (i < raw.size() && raw[i] == ' ') ++i;
    if (i < raw.size() && raw[i] == '\t')
      throw ParseError("tab character in indentation", line.number);
    line.indent = static_cast<int>(i);
    line.content = raw.substr(i);
    line.blank = line.content.empty();
    line.comment = !line.blank && line.content.front() == '#';
    lines.push_back(line);
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return lines;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lines_(split_lines(text)) {}

  Node parse() {
    skip_insignificant();
    if (!eof() && cur().content == "---") {
      ++idx_;
      skip_insignificant();
    }
    if (eof()) {
      Node empty;
      empty.kind = Node::Kind::Mapping;
      return empty;
    }
    Node root = parse_block(0);
    skip_insignificant();
    if (!eof() && cur().content == "...") ++idx_;
    skip_insignificant();
    if (!eof()) throw ParseError("trailing content after document", cur().number);
    return root;
  }

 private:
  std::vector<Line> lines_;
  std::size_t idx_ = 0;

  bool eof() const { return idx_ >= lines_.size(); }
  const Line& cur() const { return lines_[idx_]; }

  void skip_insignificant() {
    while (!eof() && (cur().blank || cur().comment)) ++idx_;
  }

  // Peek at the next significant line without consuming.
  const Line* peek_significant() {
    std::size_t i = idx_;
    while (i < lines_.size() && (lines_[i].blank || lines_[i].comment)) ++i;
    return i < lines_.size() ? &lines_[i] : nullptr;
  }

  static bool is_dash_entry(std::string_view content) {
    return content == "-" || content.substr(0, 2) == "- ";
  }

  Node parse_block(int min_indent) {
    skip_insignificant();
    if (eof()) throw ParseError("unexpected end of document", lines_.empty() ? 1 : lines_.back().number);
    const Line& first = cur();
    if (first.indent < min_indent)
      throw ParseError("expected a block indented by at least " + std::to_string(min_indent), first.number);
    if (is_dash_entry(first.content)) return parse_sequence(first.indent);
    return parse_mapping(first.indent);
  }

  Node parse_sequence(int indent) {
    Node node;
    node.kind = Node::Kind::Sequence;
    node.line = cur().number;
    for (;;) {
      skip_insignificant();
      if (eof() || cur().indent != indent || !is_dash_entry(cur().content)) break;
      const Line entry_line = cur();
      std::string_view rest = entry_line.content.size() > 1 ? entry_line.content.substr(2) : std::string_view{};
      std::size_t lead = 0;
      while (lead < rest.size() && rest[lead] == ' ') ++lead;
      rest = rest.substr(lead);
      if (rest.empty() || rest.front() == '#') {
        ++idx_;
        const Line* next = peek_significant();
        if (next && next->indent > indent) {
          node.items.push_back(parse_block(indent + 1));
        } else {
          Node empty;
          empty.line = entry_line.number;
          node.items.push_back(std::move(empty));
        }
        continue;
      }
      int value_col = entry_line.indent + static_cast<int>(entry_line.content.size() - rest.size());
      std::string key;
      std::string_view inline_value;
      if (try_split_key(rest, key, inline_value)) {
        ++idx_;
        node.items.push_back(parse_entry_mapping(indent, value_col, entry_line.number, key, inline_value));
      } else {
        ++idx_;
        Node scalar = parse_scalar(rest, indent + 1, entry_line.number);
        node.items.push_back(std::move(scalar));
      }
    }
    if (node.items.empty()) throw ParseError("empty sequence", node.line);
    return node;
  }

  // Mapping opened inline on a "- key: value" line. Continuation keys may sit
  // at any consistent column deeper than the dash.
  Node parse_entry_mapping(int dash_indent, int first_col, int first_line, std::string first_key,
                           std::string_view first_inline) {
    Node map;
    map.kind = Node::Kind::Mapping;
    map.line = first_line;
    map.entries.emplace_back(std::move(first_key),
                             parse_map_value(first_inline, std::max(dash_indent, first_col) + 1, first_line));
    int cont_indent = -1;
    for (;;) {
      skip_insignificant();
      if (eof() || cur().indent <= dash_indent) break;
      if (cont_indent == -1) cont_indent = cur().indent;
      if (cur().indent != cont_indent)
        throw ParseError("inconsistent mapping indentation", cur().number);
      append_map_entry(map, cont_indent);
    }
    return map;
  }

  Node parse_mapping(int indent) {
    Node map;
    map.kind = Node::Kind::Mapping;
    map.line = cur().number;
    for (;;) {
      skip_insignificant();
      if (eof() || cur().indent != indent || is_dash_entry(cur().content)) break;
      append_map_entry(map, indent);
    }
    if (map.entries.empty()) throw ParseError("expected mapping entry", map.line);
    return map;
  }

  void append_map_entry(Node& map, int indent) {
    const Line line = cur();
    std::string key;
    std::string_view inline_value;
    if (!try_split_key(line.content, key, inline_value))
      throw ParseError("expected 'key: value'", line.number);
    for (const auto& [k, v] : map.entries)
      if (k == key) throw ParseError("duplicate mapping key '" + key + "'", line.number);
    ++idx_;
    map.entries.emplace_back(std::move(key), parse_map_value(inline_value, indent + 1, line.number));
  }

  Node parse_map_value(std::string_view inline_value, int child_min_indent, int line_number) {
    if (inline_value.empty() || inline_value.front() == '#') {
      const Line* next = peek_significant();
      if (next && next->indent >= child_min_indent) return parse_block(child_min_indent);
      Node empty;
      empty.line = line_number;
      return empty;
    }
    return parse_scalar(inline_value, child_min_indent, line_number);
  }

  // Splits "key: value" / "key:". Plain keys only; a colon inside a plain key
  // is taken at its first occurrence followed by space or end of line.
  bool try_split_key(std::string_view content, std::string& key, std::string_view& value) {
    if (content.empty() || content.front() == '"' || content.front() == '\'') return false;
    for (std::size_t i = 0; i < content.size(); ++i) {
      if (content[i] == ':' && (i + 1 == content.size() || content[i + 1] == ' ')) {
        key = std::string(content.substr(0, i));
        while (!key.empty() && key.back() == ' ') key.pop_back();
        if (key.empty()) return false;
        std::size_t vstart = i + 1;
        while (vstart < content.size() && content[vstart] == ' ') ++vstart;
        value = content.substr(vstart);
        return true;
      }
      if (content[i] == '#' && i > 0 && content[i - 1] == ' ') return false;
    }
    return false;
  }

  Node parse_scalar(std::string_view first, int min_cont_indent, int line_number) {
    Node node;
    node.line = line_number;
    if (first.front() == '"') {
      node.quoted = true;
      node.scalar = parse_double_quoted(first, line_number);
    } else if (first.front() == '\'') {
      node.quoted = true;
      node.scalar = parse_single_quoted(first, line_number);
    } else if (first.front() == '|' || first.front() == '>') {
      node.scalar = parse_block_scalar(first, min_cont_indent, line_number);
      node.quoted = true;  // block scalars are always strings
    } else if (first.front() == '[') {
      return parse_flow_sequence(first, line_number);
    } else {
      node.scalar = parse_plain(first, min_cont_indent);
    }
    return node;
  }

  // Single-line flow sequence of scalars: [a, "b", 'c'].
  Node parse_flow_sequence(std::string_view content, int line_number) {
    Node node;
    node.kind = Node::Kind::Sequence;
    node.line = line_number;
    std::size_t i = 1;
    auto skip_spaces = [&] {
      while (i < content.size() && content[i] == ' ') ++i;
    };
    skip_spaces();
    if (i < content.size() && content[i] == ']') {
      check_scalar_tail(content.substr(i + 1), line_number);
      return node;
    }
    for (;;) {
      skip_spaces();
      if (i >= content.size()) throw ParseError("unterminated flow sequence", line_number);
      Node element;
      element.line = line_number;
      if (content[i] == '"' || content[i] == '\'') {
        char quote = content[i];
        std::string value;
        ++i;
        for (; i < content.size(); ++i) {
          if (content[i] == quote) {
            if (quote == '\'' && i + 1 < content.size() && content[i + 1] == '\'') {
              value += '\'';
              ++i;
              continue;
            }
            break;
          }
          if (quote == '"' && content[i] == '\\' && i + 1 < content.size()) {
            ++i;
            value += decode_escape(content, i, line_number);
            continue;
          }
          value += content[i];
        }
        if (i >= content.size()) throw ParseError("unterminated quoted scalar", line_number);
        ++i;  // closing quote
        element.quoted = true;
        element.scalar = std::move(value);
      } else {
        std::size_t start = i;
        while (i < content.size() && content[i] != ',' && content[i] != ']') ++i;
        std::string_view raw = content.substr(start, i - start);
        while (!raw.empty() && raw.back() == ' ') raw.remove_suffix(1);
        element.scalar = std::string(raw);
      }
      node.items.push_back(std::move(element));
      skip_spaces();
      if (i >= content.size()) throw ParseError("unterminated flow sequence", line_number);
      if (content[i] == ',') {
        ++i;
        continue;
      }
      if (content[i] == ']') {
        check_scalar_tail(content.substr(i + 1), line_number);
        return node;
      }
      throw ParseError("expected ',' or ']' in flow sequence", line_number);
    }
  }

  static std::string strip_comment_and_trim(std::string_view fragment) {
    std::size_t cut = fragment.size();
    for (std::size_t i = 0; i < fragment.size(); ++i) {
      if (fragment[i] == '#' && i > 0 && (fragment[i - 1] == ' ' || fragment[i - 1] == '\t')) {
        cut = i;
        break;
      }
    }
    std::string_view kept = fragment.substr(0, cut);
    while (!kept.empty() && (kept.back() == ' ' || kept.back() == '\t')) kept.remove_suffix(1);
    return std::string(kept);
  }

  // Plain scalars cannot contain ": " or start "- " in YAML, so a
  // continuation line that looks like a key or sequence entry ends the scalar.
  std::string parse_plain(std::string_view first, int min_cont_indent) {
    std::string value = strip_comment_and_trim(first);
    while (!eof()) {
      const Line& line = cur();
      if (line.blank || line.comment || line.indent < min_cont_indent) break;
      if (is_dash_entry(line.content)) break;
      std::string key;
      std::string_view rest;
      if (try_split_key(line.content, key, rest)) break;
      value += ' ';
      value += strip_comment_and_trim(line.content);
      ++idx_;
    }
    return value;
  }

  // 'fragment' starts at the opening quote; the scalar may span lines, with
  // line breaks folding to spaces.
  std::string parse_double_quoted(std::string_view fragment, int line_number) {
    std::string out;
    std::string_view rest = fragment.substr(1);
    for (;;) {
      bool escaped_break = false;
      std::size_t i = 0;
      for (; i < rest.size(); ++i) {
        char c = rest[i];
        if (c == '"') {
          check_scalar_tail(rest.substr(i + 1), line_number);
          return out;
        }
        if (c == '\\') {
          if (i + 1 >= rest.size()) {
            escaped_break = true;  // "\" at end of line joins without a space
            break;
          }
          ++i;
          out += decode_escape(rest, i, line_number);
        } else {
          out += c;
        }
      }
      if (eof()) throw ParseError("unterminated double-quoted scalar", line_number);
      if (!escaped_break && !out.empty() && out.back() != ' ') out += ' ';
      const Line& line = cur();
      line_number = line.number;
      rest = line.content;
      ++idx_;
    }
  }

  // Decodes the escape whose introducing char sits at rest[i]; may advance i.
  char32_t decode_hex(std::string_view rest, std::size_t& i, int digits, int line_number) {
    char32_t cp = 0;
    for (int d = 0; d < digits; ++d) {
      if (++i >= rest.size()) throw ParseError("truncated escape", line_number);
      char c = rest[i];
      cp <<= 4;
      if (c >= '0' && c <= '9')
        cp |= static_cast<char32_t>(c - '0');
      else if (c >= 'a' && c <= 'f')
        cp |= static_cast<char32_t>(c - 'a' + 10);
      else if (c >= 'A' && c <= 'F')
        cp |= static_cast<char32_t>(c - 'A' + 10);
      else
        throw ParseError("bad hex escape", line_number);
    }
    return cp;
  }

  std::string decode_escape(std::string_view rest, std::size_t& i, int line_number) {
    char c = rest[i];
    switch (c) {
      case 'n': return "\n";
      case 't': return "\t";
      case 'r': return "\r";
      case '0': return std::string(1, '\0');
      case 'a': return "\a";
      case 'b': return "\b";
      case 'f': return "\f";
      case 'v': return "\v";
      case '"': return "\"";
      case '\\': return "\\";
      case '/': return "/";
      case ' ': return " ";
      case 'x':
      case 'u':
      case 'U': {
        int digits = c == 'x' ? 2 : (c == 'u' ? 4 : 8);
        char32_t cp = decode_hex(rest, i, digits, line_number);
        std::string utf8;
        if (cp < 0x80) {
          utf8 += static_cast<char>(cp);
        } else if (cp < 0x800) {
          utf8 += static_cast<char>(0xc0 | (cp >> 6));
          utf8 += static_cast<char>(0x80 | (cp & 0x3f));
        } else if (cp < 0x10000) {
          utf8 += static_cast<char>(0xe0 | (cp >> 12));
          utf8 += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
          utf8 += static_cast<char>(0x80 | (cp & 0x3f));
        } else {
          utf8 += static_cast<char>(0xf0 | (cp >> 18));
          utf8 += static_cast<char>(0x80 | ((cp >> 12) & 0x3f));
          utf8 += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
          utf8 += static_cast<char>(0x80 | (cp & 0x3f));
        }
        return utf8;
      }
      default:
        throw ParseError(std::string("unsupported escape \\") + c, line_number);
    }
  }

  std::string parse_single_quoted(std::string_view fragment, int line_number) {
    std::string out;
    std::string_view rest = fragment.substr(1);
    for (;;) {
      std::size_t i = 0;
      for (; i < rest.size(); ++i) {
        if (rest[i] == '\'') {
          if (i + 1 < rest.size() && rest[i + 1] == '\'') {
            out += '\'';
            ++i;
            continue;
          }
          check_scalar_tail(rest.substr(i + 1), line_number);
          return out;
        }
        out += rest[i];
      }
      if (eof()) throw ParseError("unterminated single-quoted scalar", line_number);
      if (!out.empty() && out.back() != ' ') out += ' ';
      const Line& line = cur();
      line_number = line.number;
      rest = line.content;
      ++idx_;
    }
  }

  void check_scalar_tail(std::string_view tail, int line_number) {
    std::size_t i = 0;
    while (i < tail.size() && (tail[i] == ' ' || tail[i] == '\t')) ++i;
    if (i < tail.size() && tail[i] != '#')
      throw ParseError("unexpected content after quoted scalar", line_number);
  }

  std::string parse_block_scalar(std::string_view header, int min_indent, int line_number) {
    bool folded = header.front() == '>';
    std::string_view tail = header.substr(1);
    bool strip_final = !tail.empty() && tail.front() == '-';
    bool keep_final = !tail.empty() && tail.front() == '+';
    std::vector<std::string> body;
    int block_indent = -1;
    while (!eof()) {
      const Line& line = cur();
      if (line.blank) {
        body.emplace_back();
        ++idx_;
        continue;
      }
      if (line.indent < min_indent) break;
      if (block_indent == -1) block_indent = line.indent;
      if (line.indent < block_indent) break;
      body.push_back(std::string(line.indent - block_indent, ' ') + std::string(line.content));
      ++idx_;
    }
    while (!body.empty() && body.back().empty()) body.pop_back();
    if (body.empty()) throw ParseError("empty block scalar", line_number);
    std::string out;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (i > 0) out += folded ? (body[i].empty() || body[i - 1].empty() ? '\n' : ' ') : '\n';
      out += body[i];
    }
    if (keep_final || !strip_final) out += '\n';
    return out;
  }
};

}  // namespace detail

inline Node parse(std::string_view text) { return detail::Parser(text).parse(); }

inline Node parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string bytes = ss.str();
  // UTF-8 BOM
  if (bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xef &&
      static_cast<unsigned char>(bytes[1]) == 0xbb && static_cast<unsigned char>(bytes[2]) == 0xbf)
    bytes.erase(0, 3);
  return parse(bytes);
}

}  // namespace secrel::yamlx
