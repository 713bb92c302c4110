#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "secrel/diag.hpp"

namespace secrel::xml {

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, int line)
      : ValidationError("XML parse error at line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct Attr {
  std::string name;
  std::string value;
};

inline std::string_view local_name(std::string_view qname) {
  auto pos = qname.rfind(':');
  return pos == std::string_view::npos ? qname : qname.substr(pos + 1);
}

struct Element {
  std::string name;  // qualified name as written
  std::vector<Attr> attrs;
  std::vector<Element> children;
  std::string text;  // direct character data, entity-decoded
  int line = 0;

  std::string_view local() const { return local_name(name); }

  const std::string* attr(std::string_view attr_name) const {
    for (const auto& a : attrs)
      if (a.name == attr_name) return &a.value;
    return nullptr;
  }

  const Element* first_child(std::string_view local) const {
    for (const auto& c : children)
      if (c.local() == local) return &c;
    return nullptr;
  }

  std::vector<const Element*> children_named(std::string_view local) const {
    std::vector<const Element*> out;
    for (const auto& c : children)
      if (c.local() == local) out.push_back(&c);
    return out;
  }

  // Character data of this element and all descendants, in document order.
  void collect_text(std::string& out) const {
    out += text;
    for (const auto& c : children) {
      if (!out.empty() && out.back() != ' ') out += ' ';
      c.collect_text(out);
    }
  }

  std::string all_text() const {
    std::string out;
    collect_text(out);
    return out;
  }
};

struct Document {
  Element root;
};

namespace detail {

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xc0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3f));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xe0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
    out += static_cast<char>(0x80 | (cp & 0x3f));
  } else {
    out += static_cast<char>(0xf0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3f));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
    out += static_cast<char>(0x80 | (cp & 0x3f));
  }
}

inline std::string utf16_to_utf8(std::string_view bytes, bool big_endian) {
  std::string out;
  out.reserve(bytes.size() / 2);
  std::size_t n = bytes.size() & ~std::size_t{1};
  for (std::size_t i = 0; i < n; i += 2) {
    std::uint32_t unit = big_endian
                             ? (static_cast<unsigned char>(bytes[i]) << 8) | static_cast<unsigned char>(bytes[i + 1])
                             : (static_cast<unsigned char>(bytes[i + 1]) << 8) | static_cast<unsigned char>(bytes[i]);
    if (unit >= 0xd800 && unit <= 0xdbff && i + 3 < n) {
      std::uint32_t low = big_endian
                              ? (static_cast<unsigned char>(bytes[i + 2]) << 8) | static_cast<unsigned char>(bytes[i + 3])
                              : (static_cast<unsigned char>(bytes[i + 3]) << 8) | static_cast<unsigned char>(bytes[i + 2]);
      if (low >= 0xdc00 && low <= 0xdfff) {
        append_utf8(out, 0x10000 + ((unit - 0xd800) << 10) + (low - 0xdc00));
        i += 2;
        continue;
      }
    }
    append_utf8(out, unit);
  }
  return out;
}

// BOM sniffing; input without a BOM is treated as UTF-8.
inline std::string decode_input(std::string_view bytes) {
  if (bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xef &&
      static_cast<unsigned char>(bytes[1]) == 0xbb && static_cast<unsigned char>(bytes[2]) == 0xbf)
    return std::string(bytes.substr(3));
  if (bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0xff &&
      static_cast<unsigned char>(bytes[1]) == 0xfe)
    return utf16_to_utf8(bytes.substr(2), false);
  if (bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0xfe &&
      static_cast<unsigned char>(bytes[1]) == 0xff)
    return utf16_to_utf8(bytes.substr(2), true);
  return std::string(bytes);
}

class Parser {
 public:
  explicit Parser(std::string text, std::string source = {})
      : text_(std::move(text)), source_(std::move(source)) {}

  Document parse() {
    Document doc;
    skip_prolog();
    if (eof()) fail("document has no root element");
    doc.root = parse_element();
    skip_misc();
    if (!eof()) fail("content after root element");
    return doc;
  }

 private:
  std::string text_;
  std::string source_;
  std::size_t pos_ = 0;
  int line_ = 1;

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  char take() {
    char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source_.empty() ? what : source_ + ": " + what, line_);
  }

  bool starts_with(std::string_view s) const {
    return text_.compare(pos_, s.size(), s) == 0;
  }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && !eof(); ++i) take();
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r' || peek() == '\n')) take();
  }

  void skip_until(std::string_view terminator, const char* what) {
    auto found = text_.find(terminator, pos_);
    if (found == std::string::npos) fail(std::string("unterminated ") + what);
    advance(found + terminator.size() - pos_);
  }

  void skip_doctype() {
    int depth = 0;
    while (!eof()) {
      char c = take();
      if (c == '<') ++depth;
      if (c == '>') {
        if (depth == 0) return;
        --depth;
      }
    }
    fail("unterminated DOCTYPE");
  }

  // Comments, PIs, DOCTYPE and whitespace before/after the root.
  void skip_misc() {
    for (;;) {
      skip_ws();
      if (starts_with("<?")) {
        skip_until("?>", "processing instruction");
      } else if (starts_with("<!--")) {
        skip_until("-->", "comment");
      } else {
        return;
      }
    }
  }

  void skip_prolog() {
    for (;;) {
      skip_ws();
      if (starts_with("<?")) {
        skip_until("?>", "XML declaration");
      } else if (starts_with("<!--")) {
        skip_until("-->", "comment");
      } else if (starts_with("<!DOCTYPE")) {
        advance(9);
        skip_doctype();
      } else {
        return;
      }
    }
  }

  static bool is_name_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':' ||
           static_cast<unsigned char>(c) >= 0x80;
  }
  static bool is_name_char(char c) {
    return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
  }

  std::string parse_name() {
    if (eof() || !is_name_start(peek())) fail("expected a name");
    std::string name;
    while (!eof() && is_name_char(peek())) name += take();
    return name;
  }

  std::uint32_t parse_char_ref() {
    std::uint32_t cp = 0;
    bool hex = false;
    if (!eof() && (peek() == 'x' || peek() == 'X')) {
      hex = true;
      take();
    }
    bool any = false;
    while (!eof() && peek() != ';') {
      char c = take();
      std::uint32_t digit;
      if (c >= '0' && c <= '9')
        digit = static_cast<std::uint32_t>(c - '0');
      else if (hex && c >= 'a' && c <= 'f')
        digit = static_cast<std::uint32_t>(c - 'a' + 10);
      else if (hex && c >= 'A' && c <= 'F')
        digit = static_cast<std::uint32_t>(c - 'A' + 10);
      else
        fail("bad character reference");
      cp = cp * (hex ? 16 : 10) + digit;
      any = true;
      if (cp > 0x10ffff) fail("character reference out of range");
    }
    if (!any || eof()) fail("bad character reference");
    take();  // ';'
    return cp;
  }

  void parse_entity(std::string& out) {
    take();  // '&'
    if (!eof() && peek() == '#') {
      take();
      append_utf8(out, parse_char_ref());
      return;
    }
    std::string name;
    while (!eof() && peek() != ';' && name.size() < 8) name += take();
    if (eof() || peek() != ';') fail("unterminated entity reference");
    take();
    if (name == "amp")
      out += '&';
    else if (name == "lt")
      out += '<';
    else if (name == "gt")
      out += '>';
    else if (name == "quot")
      out += '"';
    else if (name == "apos")
      out += '\'';
    else
      fail("unknown entity &" + name + ";");
  }

  std::string parse_attr_value() {
    if (eof() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
    char quote = take();
    std::string value;
    while (!eof() && peek() != quote) {
      if (peek() == '&')
        parse_entity(value);
      else if (peek() == '<')
        fail("'<' in attribute value");
      else
        value += take();
    }
    if (eof()) fail("unterminated attribute value");
    take();
    return value;
  }

  Element parse_element() {
    if (eof() || peek() != '<') fail("expected element");
    take();
    Element el;
    el.line = line_;
    el.name = parse_name();
    for (;;) {
      skip_ws();
      if (eof()) fail("unterminated start tag <" + el.name);
      if (peek() == '/') {
        take();
        if (eof() || take() != '>') fail("malformed empty-element tag");
        return el;
      }
      if (peek() == '>') {
        take();
        break;
      }
      Attr a;
      a.name = parse_name();
      skip_ws();
      if (eof() || take() != '=') fail("expected '=' after attribute " + a.name);
      skip_ws();
      a.value = parse_attr_value();
      for (const auto& existing : el.attrs)
        if (existing.name == a.name) fail("duplicate attribute " + a.name);
      el.attrs.push_back(std::move(a));
    }
    parse_content(el);
    return el;
  }

  void parse_content(Element& el) {
    for (;;) {
      if (eof()) fail("missing end tag </" + el.name + ">");
      if (peek() == '<') {
        if (starts_with("</")) {
          advance(2);
          std::string name = parse_name();
          if (name != el.name)
            fail("mismatched end tag </" + name + ">, expected </" + el.name + ">");
          skip_ws();
          if (eof() || take() != '>') fail("malformed end tag");
          return;
        }
        if (starts_with("<!--")) {
          skip_until("-->", "comment");
        } else if (starts_with("<![CDATA[")) {
          advance(9);
          auto end = text_.find("]]>", pos_);
          if (end == std::string::npos) fail("unterminated CDATA section");
          el.text.append(text_, pos_, end - pos_);
          advance(end + 3 - pos_);
        } else if (starts_with("<?")) {
          skip_until("?>", "processing instruction");
        } else {
          el.children.push_back(parse_element());
        }
      } else if (peek() == '&') {
        parse_entity(el.text);
      } else {
        el.text += take();
      }
    }
  }
};

}  // namespace detail

inline Document parse(std::string_view bytes, std::string source = {}) {
  return detail::Parser(detail::decode_input(bytes), std::move(source)).parse();
}

inline Document parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

}  // namespace secrel::xml
