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
#ifndef MCQPIPE_JSONL_HPP_
#define MCQPIPE_JSONL_HPP_

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

namespace mcqpipe {

// Field order in emitted files is part of the determinism contract, so all
// serialization goes through ordered_json.
using json = nlohmann::ordered_json;

// Calls `fn(line_number, raw_line)` for every line of `path`, including
// blank ones; line numbers start at 1. Throws std::runtime_error if the
// file cannot be opened.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::size_t, const std::string&)>& fn);

class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path, bool append = false);

  void write(const json& value);
  std::size_t lines_written() const { return lines_; }

 private:
  std::ofstream out_;
  std::size_t lines_ = 0;
};

}  // namespace mcqpipe

#endif  // MCQPIPE_JSONL_HPP_
