#include "lpl/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <span>
#include <sstream>

#include "lpl/errors.hpp"

namespace lpl::toml {
namespace {

[[noreturn]] void fail(int line, const std::string& message) {
  throw ValidationError("toml parse error at line " + std::to_string(line) + ": " + message);
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Removes a trailing comment, honoring quoted strings.
std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\' && quote == '"') {
        ++i;
      } else if (c == quote) {
        in_string = false;
      }
    } else if (c == '"' || c == '\'') {
      in_string = true;
      quote = c;
    } else if (c == '#') {
      return s.substr(0, i);
    }
  }
  return s;
}

bool valid_bare_key(std::string_view key) {
  if (key.empty()) return false;
  for (const char c : key) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  }
  return true;
}

std::vector<std::string> split_key_path(std::string_view path, int line) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const auto part = strip(path.substr(start, dot == std::string_view::npos ? dot : dot - start));
    if (!valid_bare_key(part)) fail(line, "invalid key '" + std::string(path) + "'");
    parts.emplace_back(part);
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return parts;
}

std::string parse_string_value(std::string_view text, int line) {
  const char quote = text.front();
  if (text.size() < 2 || text.back() != quote) fail(line, "unterminated string");
  const std::string_view body = text.substr(1, text.size() - 2);
  if (quote == '\'') return std::string(body);
  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] != '\\') {
      out.push_back(body[i]);
      continue;
    }
    if (++i >= body.size()) fail(line, "dangling escape in string");
    switch (body[i]) {
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case 'r': out.push_back('\r'); break;
      case '"': out.push_back('"'); break;
      case '\\': out.push_back('\\'); break;
      default: fail(line, "unsupported escape in string");
    }
  }
  return out;
}

Value parse_scalar(std::string_view text, int line);

Value parse_array(std::string_view text, int line) {
  Array items;
  std::string_view body = strip(text.substr(1, text.size() - 2));
  while (!body.empty()) {
    // Find the element end, honoring strings (arrays of arrays unsupported).
    bool in_string = false;
    char quote = 0;
    std::size_t end = body.size();
    for (std::size_t i = 0; i < body.size(); ++i) {
      const char c = body[i];
      if (in_string) {
        if (c == '\\' && quote == '"') ++i;
        else if (c == quote) in_string = false;
      } else if (c == '"' || c == '\'') {
        in_string = true;
        quote = c;
      } else if (c == ',') {
        end = i;
        break;
      }
    }
    const auto element = strip(body.substr(0, end));
    if (element.empty()) fail(line, "empty array element");
    items.push_back(parse_scalar(element, line));
    body = end == body.size() ? std::string_view{} : strip(body.substr(end + 1));
  }
  return Value(std::move(items));
}

Value parse_scalar(std::string_view text, int line) {
  if (text.front() == '"' || text.front() == '\'') return Value(parse_string_value(text, line));
  if (text.front() == '[') {
    if (text.back() != ']') fail(line, "unterminated array");
    return parse_array(text, line);
  }
  if (text == "true") return Value(true);
  if (text == "false") return Value(false);

  const std::string compact = [&] {
    std::string s;
    for (const char c : text) {
      if (c != '_') s.push_back(c);
    }
    return s;
  }();
  const bool looks_float = compact.find_first_of(".eE") != std::string::npos ||
                           compact == "inf" || compact == "-inf" || compact == "nan";
  if (!looks_float) {
    std::int64_t i = 0;
    const auto [ptr, ec] = std::from_chars(compact.data(), compact.data() + compact.size(), i);
    if (ec == std::errc() && ptr == compact.data() + compact.size()) return Value(i);
  }
  double d = 0;
  const auto [ptr, ec] = std::from_chars(compact.data(), compact.data() + compact.size(), d);
  if (ec == std::errc() && ptr == compact.data() + compact.size()) return Value(d);
  fail(line, "cannot parse value '" + std::string(text) + "'");
}

Table& descend(Table& root, std::span<const std::string> path, int line) {
  Table* node = &root;
  for (const auto& part : path) {
    auto [it, inserted] = node->try_emplace(part, Value(Table{}));
    if (!inserted && !it->second.is_table()) {
      fail(line, "key '" + part + "' is both a value and a table");
    }
    node = &it->second.as_table();
  }
  return *node;
}

}  // namespace

bool Value::as_bool() const {
  if (const auto* b = std::get_if<bool>(&data_)) return *b;
  throw ValidationError("toml: expected boolean");
}

std::int64_t Value::as_int() const {
  if (const auto* i = std::get_if<std::int64_t>(&data_)) return *i;
  throw ValidationError("toml: expected integer");
}

double Value::as_double() const {
  if (const auto* d = std::get_if<double>(&data_)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&data_)) return static_cast<double>(*i);
  throw ValidationError("toml: expected number");
}

const std::string& Value::as_string() const {
  if (const auto* s = std::get_if<std::string>(&data_)) return *s;
  throw ValidationError("toml: expected string");
}

const Array& Value::as_array() const {
  if (const auto* a = std::get_if<Array>(&data_)) return *a;
  throw ValidationError("toml: expected array");
}

const Table& Value::as_table() const {
  if (const auto* t = std::get_if<Table>(&data_)) return *t;
  throw ValidationError("toml: expected table");
}

Table& Value::as_table() {
  if (auto* t = std::get_if<Table>(&data_)) return *t;
  throw ValidationError("toml: expected table");
}

const Value* Value::find(std::string_view path) const {
  const Value* node = this;
  std::size_t start = 0;
  while (true) {
    if (!node->is_table()) return nullptr;
    const std::size_t dot = path.find('.', start);
    const std::string key(path.substr(start, dot == std::string_view::npos ? dot : dot - start));
    const auto& table = node->as_table();
    const auto it = table.find(key);
    if (it == table.end()) return nullptr;
    node = &it->second;
    if (dot == std::string_view::npos) return node;
    start = dot + 1;
  }
}

double Value::get_double(std::string_view path, double fallback) const {
  const Value* v = find(path);
  return v ? v->as_double() : fallback;
}

std::int64_t Value::get_int(std::string_view path, std::int64_t fallback) const {
  const Value* v = find(path);
  return v ? v->as_int() : fallback;
}

bool Value::get_bool(std::string_view path, bool fallback) const {
  const Value* v = find(path);
  return v ? v->as_bool() : fallback;
}

std::string Value::get_string(std::string_view path, std::string fallback) const {
  const Value* v = find(path);
  return v ? v->as_string() : fallback;
}

Value parse(std::string_view text) {
  Table root;
  std::vector<std::string> current_table;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const auto raw =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    const auto line = strip(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) fail(line_no, "malformed table header");
      if (line[1] == '[') fail(line_no, "arrays of tables are not supported");
      current_table = split_key_path(line.substr(1, line.size() - 2), line_no);
      descend(root, current_table, line_no);
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
    auto key_path = split_key_path(strip(line.substr(0, eq)), line_no);
    const auto value_text = strip(line.substr(eq + 1));
    if (value_text.empty()) fail(line_no, "missing value");

    auto full_path = current_table;
    full_path.insert(full_path.end(), key_path.begin(), key_path.end());
    const std::string leaf = full_path.back();
    full_path.pop_back();
    Table& table = descend(root, full_path, line_no);
    if (table.contains(leaf)) fail(line_no, "duplicate key '" + leaf + "'");
    table.emplace(leaf, parse_scalar(value_text, line_no));
  }
  return Value(std::move(root));
}

Value parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

}  // namespace lpl::toml
