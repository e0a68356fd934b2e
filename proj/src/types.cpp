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
#include "mcqpipe/types.hpp"

namespace mcqpipe {

std::string_view to_string(Domain d) {
  switch (d) {
    case Domain::math:
      return "math";
    case Domain::code:
      return "code";
    case Domain::stem:
      return "stem";
    case Domain::cyber:
      return "cyber";
  }
  return "math";
}

std::string_view to_string(RecordKind k) {
  return k == RecordKind::qa_pair ? "qa_pair" : "raw_document";
}

std::optional<Domain> domain_from_string(std::string_view s) {
  if (s == "math") return Domain::math;
  if (s == "code") return Domain::code;
  if (s == "stem") return Domain::stem;
  if (s == "cyber") return Domain::cyber;
  return std::nullopt;
}

std::optional<RecordKind> kind_from_string(std::string_view s) {
  if (s == "qa_pair") return RecordKind::qa_pair;
  if (s == "raw_document") return RecordKind::raw_document;
  return std::nullopt;
}

}  // namespace mcqpipe
