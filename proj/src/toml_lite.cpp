#include "ccep/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>

#include "ccep/errors.hpp"

namespace ccep::toml {

const Value* Table::find(std::string_view key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return &v;
  return nullptr;
}

void Table::set(std::string key, Value value) {
  for (auto& [k, v] : entries)
    if (k == key) {
      v = std::move(value);
      return;
    }
  entries.emplace_back(std::move(key), std::move(value));
}

const Table* Document::section(std::string_view name) const {
  for (const auto& [n, t] : sections)
    if (n == name) return &t;
  return nullptr;
}

Table& Document::section_mut(std::string_view name) {
  for (auto& [n, t] : sections)
    if (n == name) return t;
  sections.emplace_back(std::string(name), Table{});
  return sections.back().second;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Document run() {
    Document doc;
    Table* current = &doc.root;
    std::vector<std::string> seen_sections;
    while (true) {
      skip_blank_and_comments();
      if (at_end()) break;
      if (peek() == '[') {
        ++pos_;
        const std::size_t start = pos_;
        while (!at_end() && peek() != ']' && peek() != '\n') ++pos_;
        if (at_end() || peek() != ']') fail("unterminated section header");
        std::string name = trim(text_.substr(start, pos_ - start));
        ++pos_;
        if (name.empty()) fail("empty section name");
        for (const auto& s : seen_sections)
          if (s == name) fail("duplicate section [" + name + "]");
        seen_sections.push_back(name);
        doc.sections.emplace_back(name, Table{});
        current = &doc.sections.back().second;
        expect_line_end();
        continue;
      }
      std::string key = parse_key();
      skip_inline_space();
      if (at_end() || peek() != '=') fail("expected '=' after key '" + key + "'");
      ++pos_;
      skip_inline_space();
      Value value = parse_value();
      if (current->find(key)) fail("duplicate key '" + key + "'");
      current->entries.emplace_back(std::move(key), std::move(value));
      expect_line_end();
    }
    return doc;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  [[noreturn]] void fail(const std::string& what) const {
    std::size_t line = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i)
      if (text_[i] == '\n') ++line;
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
  }

  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
  }

  void skip_inline_space() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
  }

  void skip_comment() {
    if (!at_end() && peek() == '#')
      while (!at_end() && peek() != '\n') ++pos_;
  }

  void skip_blank_and_comments() {
    while (!at_end()) {
      skip_inline_space();
      skip_comment();
      if (!at_end() && peek() == '\n') {
        ++pos_;
        continue;
      }
      break;
    }
  }

  // Inside arrays newlines and comments are insignificant.
  void skip_array_space() { skip_blank_and_comments(); }

  void expect_line_end() {
    skip_inline_space();
    skip_comment();
    if (!at_end() && peek() != '\n') fail("unexpected trailing characters");
  }

  std::string parse_key() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++pos_;
    if (pos_ == start) fail("expected a key");
    return std::string(text_.substr(start, pos_ - start));
  }

  Value parse_value() {
    if (at_end()) fail("missing value");
    const char c = peek();
    if (c == '"') return Value{parse_string()};
    if (c == '[') return Value{parse_array()};
    if (text_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return Value{true};
    }
    if (text_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return Value{false};
    }
    return parse_number();
  }

  std::string parse_string() {
    ++pos_;
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      const char c = text_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (at_end()) fail("unterminated escape");
      const char e = text_[pos_++];
      switch (e) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
    return out;
  }

  Array parse_array() {
    ++pos_;
    Array out;
    skip_array_space();
    if (!at_end() && peek() == ']') {
      ++pos_;
      return out;
    }
    while (true) {
      skip_array_space();
      out.push_back(parse_value());
      skip_array_space();
      if (at_end()) fail("unterminated array");
      if (peek() == ',') {
        ++pos_;
        skip_array_space();
        if (!at_end() && peek() == ']') {
          ++pos_;
          return out;
        }
        continue;
      }
      if (peek() == ']') {
        ++pos_;
        return out;
      }
      fail("expected ',' or ']' in array");
    }
  }

  Value parse_number() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || std::strchr("+-._", peek()))) ++pos_;
    std::string token(text_.substr(start, pos_ - start));
    std::erase(token, '_');
    if (token.empty()) fail("expected a value");
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (*first == '+') ++first;
    const bool looks_float = token.find_first_of(".eE") != std::string::npos || token.find("inf") != std::string::npos ||
                             token.find("nan") != std::string::npos;
    if (!looks_float) {
      std::int64_t v = 0;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec == std::errc() && ptr == last) return Value{v};
      fail("invalid integer '" + token + "'");
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec == std::errc() && ptr == last) return Value{v};
    fail("invalid value '" + token + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string escape(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

void serialize_table(const Table& table, std::string& out) {
  for (const auto& [k, v] : table.entries) out += k + " = " + format_value(v) + "\n";
}

}  // namespace

Document parse(std::string_view text) { return Parser(text).run(); }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string format_value(const Value& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, std::string>) {
          return escape(v);
        } else {
          std::string out = "[";
          for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ", ";
            out += format_value(v[i]);
          }
          return out + "]";
        }
      },
      value.data);
}

std::string serialize(const Document& doc) {
  std::string out;
  serialize_table(doc.root, out);
  for (const auto& [name, table] : doc.sections) {
    if (!out.empty()) out += "\n";
    out += "[" + name + "]\n";
    serialize_table(table, out);
  }
  return out;
}

}  // namespace ccep::toml
