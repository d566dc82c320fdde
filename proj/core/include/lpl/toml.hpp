#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lpl::toml {

class Value;
using Array = std::vector<Value>;
using Table = std::map<std::string, Value>;

/// Minimal TOML subset sufficient for config files: [table] headers, bare and
/// dotted keys, strings, integers, floats, booleans and single-line arrays of
/// scalars. Not a general TOML implementation.
class Value {
 public:
  Value() = default;
  explicit Value(bool b) : data_(b) {}
  explicit Value(std::int64_t i) : data_(i) {}
  explicit Value(double d) : data_(d) {}
  explicit Value(std::string s) : data_(std::move(s)) {}
  explicit Value(Array a) : data_(std::move(a)) {}
  explicit Value(Table t) : data_(std::move(t)) {}

  bool is_table() const { return std::holds_alternative<Table>(data_); }
  bool is_array() const { return std::holds_alternative<Array>(data_); }

  // Typed access; throws ValidationError on type mismatch. Integers promote
  // to double through as_double().
  bool as_bool() const;
  std::int64_t as_int() const;
  double as_double() const;
  const std::string& as_string() const;
  const Array& as_array() const;
  const Table& as_table() const;
  Table& as_table();

  /// Dotted-path lookup ("camera.fx"); nullptr when absent.
  const Value* find(std::string_view path) const;

  double get_double(std::string_view path, double fallback) const;
  std::int64_t get_int(std::string_view path, std::int64_t fallback) const;
  bool get_bool(std::string_view path, bool fallback) const;
  std::string get_string(std::string_view path, std::string fallback) const;

 private:
  std::variant<std::monostate, bool, std::int64_t, double, std::string, Array, Table> data_;
};

/// Parses TOML text; diagnostics carry 1-based line numbers.
Value parse(std::string_view text);

/// Reads and parses a file. Unreadable path -> IoError, bad syntax ->
/// ValidationError.
Value parse_file(const std::filesystem::path& path);

}  // namespace lpl::toml
