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
#ifndef MCQPIPE_TYPES_HPP_
#define MCQPIPE_TYPES_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mcqpipe {

enum class Domain { math, code, stem, cyber };
enum class RecordKind { qa_pair, raw_document };

std::string_view to_string(Domain d);
std::string_view to_string(RecordKind k);
std::optional<Domain> domain_from_string(std::string_view s);
std::optional<RecordKind> kind_from_string(std::string_view s);

// Exact ratio; bucket boundaries at 0 and 1 must not go through floats.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

}  // namespace mcqpipe

#endif  // MCQPIPE_TYPES_HPP_
