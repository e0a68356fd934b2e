/* Copyright 2026 The mcqpipe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "mcqpipe/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "mcqpipe/text.hpp"

namespace mcqpipe {
namespace {

[[noreturn]] void fail(std::size_t line, const std::string& message) {
  throw TomlError("line " + std::to_string(line) + ": " + message);
}

bool is_bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' ||
         c == '-';
}

bool valid_bare_key(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key) {
    if (!is_bare_key_char(c)) return false;
  }
  return true;
}

bool valid_section_name(std::string_view name) {
  if (name.empty() || name.front() == '.' || name.back() == '.') return false;
  std::size_t start = 0;
  while (start <= name.size()) {
    const std::size_t dot = name.find('.', start);
    const std::string_view part =
        name.substr(start, dot == std::string_view::npos ? name.size() - start
                                                         : dot - start);
    if (!valid_bare_key(part)) return false;
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return true;
}

// Cuts an unquoted # comment. Quote state must be tracked: '#' inside a
// string is data.
std::string strip_comment(std::string_view line, std::size_t line_no) {
  std::string out;
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_string) {
      out += c;
      if (c == '\\') {
        if (i + 1 >= line.size()) fail(line_no, "dangling escape in string");
        out += line[++i];
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '#') break;
    if (c == '"') in_string = true;
    out += c;
  }
  if (in_string) fail(line_no, "unterminated string");
  return out;
}

std::string parse_basic_string(std::string_view raw, std::size_t line_no) {
  // raw includes the surrounding quotes.
  if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') {
    fail(line_no, "malformed string value");
  }
  std::string out;
  for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
    const char c = raw[i];
    if (c != '\\') {
      if (c == '"') fail(line_no, "unescaped quote inside string");
      out += c;
      continue;
    }
    if (i + 2 >= raw.size()) fail(line_no, "dangling escape in string");
    const char escape = raw[++i];
    switch (escape) {
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case 'r': out += '\r'; break;
      default:
        fail(line_no, std::string("unsupported escape '\\") + escape + "'");
    }
  }
  return out;
}

TomlValue parse_value(std::string_view raw, std::size_t line_no) {
  TomlValue value;
  value.line = line_no;
  if (raw.empty()) fail(line_no, "missing value");
  if (raw.front() == '"') {
    value.type = TomlValue::Type::string;
    value.str = parse_basic_string(raw, line_no);
    return value;
  }
  if (raw == "true" || raw == "false") {
    value.type = TomlValue::Type::boolean;
    value.boolean = (raw == "true");
    return value;
  }
  if (raw.front() == '[' || raw.front() == '{') {
    fail(line_no, "arrays and inline tables are not supported");
  }

  std::string digits;
  digits.reserve(raw.size());
  bool has_float_marker = false;
  for (char c : raw) {
    if (c == '_') continue;  // separator, legal between digits
    if (c == '.' || c == 'e' || c == 'E') has_float_marker = true;
    digits += c;
  }
  if (!has_float_marker) {
    std::int64_t parsed = 0;
    const auto [ptr, ec] = std::from_chars(
        digits.data(), digits.data() + digits.size(), parsed, 10);
    if (ec == std::errc() && ptr == digits.data() + digits.size()) {
      value.type = TomlValue::Type::integer;
      value.integer = parsed;
      return value;
    }
    fail(line_no, "unrecognized value '" + std::string(raw) + "'");
  }
  double parsed = 0.0;
  const auto [ptr, ec] = std::from_chars(
      digits.data(), digits.data() + digits.size(), parsed);
  if (ec == std::errc() && ptr == digits.data() + digits.size()) {
    value.type = TomlValue::Type::floating;
    value.floating = parsed;
    return value;
  }
  fail(line_no, "unrecognized value '" + std::string(raw) + "'");
}

const char* type_name(TomlValue::Type type) {
  switch (type) {
    case TomlValue::Type::string: return "string";
    case TomlValue::Type::integer: return "integer";
    case TomlValue::Type::floating: return "float";
    case TomlValue::Type::boolean: return "boolean";
  }
  return "unknown";
}

[[noreturn]] void type_mismatch(const std::string& key, const TomlValue& value,
                                const char* wanted) {
  throw TomlError("key '" + key + "' has type " + type_name(value.type) +
                  ", expected " + wanted + " (line " +
                  std::to_string(value.line) + ")");
}

}  // namespace

void TomlTable::insert(const std::string& key, TomlValue value) {
  if (!values_.emplace(key, std::move(value)).second) {
    throw TomlError("duplicate key '" + key + "'");
  }
}

bool TomlTable::contains(const std::string& key) const {
  return values_.count(key) > 0;
}

const TomlValue* TomlTable::find(const std::string& key) const {
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::vector<std::string> TomlTable::keys() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& [key, value] : values_) out.push_back(key);
  return out;
}

std::string TomlTable::get_string(const std::string& key,
                                  std::string fallback) const {
  const TomlValue* value = find(key);
  if (!value) return fallback;
  if (value->type != TomlValue::Type::string) {
    type_mismatch(key, *value, "string");
  }
  return value->str;
}

std::int64_t TomlTable::get_int(const std::string& key,
                                std::int64_t fallback) const {
  const TomlValue* value = find(key);
  if (!value) return fallback;
  if (value->type != TomlValue::Type::integer) {
    type_mismatch(key, *value, "integer");
  }
  return value->integer;
}

double TomlTable::get_double(const std::string& key, double fallback) const {
  const TomlValue* value = find(key);
  if (!value) return fallback;
  if (value->type == TomlValue::Type::integer) {
    return static_cast<double>(value->integer);
  }
  if (value->type != TomlValue::Type::floating) {
    type_mismatch(key, *value, "float");
  }
  return value->floating;
}

bool TomlTable::get_bool(const std::string& key, bool fallback) const {
  const TomlValue* value = find(key);
  if (!value) return fallback;
  if (value->type != TomlValue::Type::boolean) {
    type_mismatch(key, *value, "boolean");
  }
  return value->boolean;
}

TomlTable parse_toml(std::string_view text) {
  TomlTable table;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view raw_line =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                      : nl - pos);
    ++line_no;
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    if (!raw_line.empty() && raw_line.back() == '\r') {
      raw_line.remove_suffix(1);
    }

    const std::string line = trim(strip_comment(raw_line, line_no));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header");
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!valid_section_name(name)) {
        fail(line_no, "invalid section name '" + name + "'");
      }
      section = name;
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(line_no, "expected 'key = value'");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (!valid_bare_key(key)) fail(line_no, "invalid key '" + key + "'");
    const std::string raw_value = trim(std::string_view(line).substr(eq + 1));
    TomlValue value = parse_value(raw_value, line_no);
    const std::string full_key = section.empty() ? key : section + "." + key;
    table.insert(full_key, std::move(value));
  }
  return table;
}

TomlTable parse_toml_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw TomlError("cannot open config file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_toml(buffer.str());
}

}  // namespace mcqpipe
