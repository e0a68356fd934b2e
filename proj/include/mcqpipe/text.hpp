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
#ifndef MCQPIPE_TEXT_HPP_
#define MCQPIPE_TEXT_HPP_

#include <string>
#include <string_view>

namespace mcqpipe {

std::string trim(std::string_view s);
std::string rstrip(std::string_view s);

// Collapses every run of ASCII whitespace to a single space.
std::string collapse_whitespace(std::string_view s);

// Unicode NFC via ICU. Invalid UTF-8 sequences are replaced with U+FFFD.
std::string nfc(std::string_view utf8);

// Canonical form used for every option/distractor comparison:
// NFC, trim, collapse internal whitespace. Case is preserved; masked spans
// from math and code are case-significant.
std::string normalize_for_compare(std::string_view s);

// NFC plus trailing-whitespace strip, applied to corpus text fields at load.
std::string normalize_field(std::string_view s);

std::size_t count_occurrences(std::string_view haystack,
                              std::string_view needle);

// Whitespace-delimited token count; used for the soft passage-length check.
std::size_t word_count(std::string_view s);

}  // namespace mcqpipe

#endif  // MCQPIPE_TEXT_HPP_
