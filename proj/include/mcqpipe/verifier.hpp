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
#ifndef MCQPIPE_VERIFIER_HPP_
#define MCQPIPE_VERIFIER_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcqpipe/synthesizer.hpp"

namespace mcqpipe {

enum class ExtractionRule { boxed, answer_phrase, lone_letter, none };

std::string_view to_string(ExtractionRule rule);
std::optional<ExtractionRule> extraction_rule_from_string(std::string_view s);

// Bumped whenever extraction behavior changes; stored in rollout logs so
// that probe results are only compared within one rule version.
inline constexpr const char* kExtractionRuleVersion = "boxed-phrase-lone/1";

struct Verdict {
  std::optional<char> chosen_label;
  int reward = 0;  // 1 iff chosen_label == task.answer_label
  ExtractionRule extraction_rule = ExtractionRule::none;
};

// Student-facing rendering of a task: masked context, one "A. <text>" line
// per option, then the instruction to answer with a boxed letter.
// Deterministic.
std::string format_question(const McqTask& task);

struct Extraction {
  std::optional<char> label;
  ExtractionRule rule = ExtractionRule::none;
};

// Pulls the chosen option out of a free-form response. Rules, in precedence
// order, each taking the LAST match in the text (reasoning models restate
// options mid-chain; the final statement is the answer):
//   1. boxed:         last \boxed{...} containing exactly one valid label
//   2. answer_phrase: last "answer is L" / "Answer: L", optional parentheses
//   3. lone_letter:   final non-empty line is a single valid label
// Total over arbitrary text; no match returns an empty extraction.
Extraction extract_choice(std::string_view response,
                          const std::vector<char>& labels);

// Binary verifiable reward: 1 iff the extracted label matches the ground-truth
// option's label. Total; never throws on any response text.
Verdict score(const McqTask& task, std::string_view response);

}  // namespace mcqpipe

#endif  // MCQPIPE_VERIFIER_HPP_
