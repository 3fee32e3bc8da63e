#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

// Reader/writer for the TOML subset used by run configs and sweep grids:
// [section] headers, `key = value` pairs, '#' comments, and values that are
// booleans, integers, floats, basic "strings" or (possibly nested, possibly
// multi-line) arrays. Inline tables, dates and dotted keys are not supported.
namespace ccep::toml {

struct Value;
using Array = std::vector<Value>;

struct Value {
  std::variant<bool, std::int64_t, double, std::string, Array> data;

  bool is_bool() const noexcept { return std::holds_alternative<bool>(data); }
  bool is_int() const noexcept { return std::holds_alternative<std::int64_t>(data); }
  bool is_number() const noexcept { return is_int() || std::holds_alternative<double>(data); }
  bool is_string() const noexcept { return std::holds_alternative<std::string>(data); }
  bool is_array() const noexcept { return std::holds_alternative<Array>(data); }

  friend bool operator==(const Value&, const Value&) = default;
};

struct Table {
  std::vector<std::pair<std::string, Value>> entries;

  const Value* find(std::string_view key) const;
  void set(std::string key, Value value);
};

struct Document {
  Table root;  // keys before the first section header
  std::vector<std::pair<std::string, Table>> sections;

  const Table* section(std::string_view name) const;
  Table& section_mut(std::string_view name);
};

// Throws ConfigError with a line number on malformed input.
Document parse(std::string_view text);

// Canonical rendering; parse(serialize(doc)) == doc.
std::string serialize(const Document& doc);
std::string format_value(const Value& value);
// Shortest round-trip decimal form, always containing '.' or 'e'.
std::string format_double(double v);

}  // namespace ccep::toml
