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
#ifndef MCQPIPE_TOML_HPP_
#define MCQPIPE_TOML_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcqpipe {

struct TomlError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TomlValue {
  enum class Type { string, integer, floating, boolean };

  Type type = Type::string;
  std::string str;
  std::int64_t integer = 0;
  double floating = 0.0;
  bool boolean = false;
  std::size_t line = 0;
};

// Flat view of a parsed document: "[section]\nkey = v" is stored under
// "section.key", top-level keys under their own name.
class TomlTable {
 public:
  void insert(const std::string& key, TomlValue value);

  bool contains(const std::string& key) const;
  const TomlValue* find(const std::string& key) const;
  std::vector<std::string> keys() const;

  // Typed getters returning `fallback` when the key is absent and throwing
  // TomlError (with the key name) on a type mismatch. get_double accepts
  // integer values.
  std::string get_string(const std::string& key, std::string fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

 private:
  std::map<std::string, TomlValue> values_;
};

// Parses the TOML subset this tool's config files use: [section] headers
// (dotted names allowed), bare keys, basic strings with \" \\ \n \t \r
// escapes, integers (underscore separators allowed), floats, booleans, and
// # comments. Arrays, inline tables, multi-line strings, and dates are out
// of scope and raise TomlError, as do duplicate keys. Errors carry 1-based
// line numbers.
TomlTable parse_toml(std::string_view text);

TomlTable parse_toml_file(const std::filesystem::path& path);

}  // namespace mcqpipe

#endif  // MCQPIPE_TOML_HPP_
