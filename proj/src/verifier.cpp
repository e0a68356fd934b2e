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
#include "mcqpipe/verifier.hpp"

#include <algorithm>
#include <cctype>

#include "mcqpipe/text.hpp"

namespace mcqpipe {
namespace {

bool is_alnum(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool in_labels(char c, const std::vector<char>& labels) {
  return std::find(labels.begin(), labels.end(), c) != labels.end();
}

// Label occurrences inside `text` with non-alphanumeric characters (or the
// string edge) on both sides. Matching is case-sensitive: option labels are
// uppercase and a lowercase letter in prose is not an answer.
std::vector<char> standalone_labels(std::string_view text,
                                    const std::vector<char>& labels) {
  std::vector<char> found;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!in_labels(text[i], labels)) continue;
    if (i > 0 && is_alnum(text[i - 1])) continue;
    if (i + 1 < text.size() && is_alnum(text[i + 1])) continue;
    found.push_back(text[i]);
  }
  return found;
}

// All \boxed{...} payloads in order, with brace nesting respected.
std::vector<std::string_view> boxed_payloads(std::string_view text) {
  constexpr std::string_view kBoxed = "\\boxed{";
  std::vector<std::string_view> payloads;
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = text.find(kBoxed, pos);
    if (open == std::string_view::npos) break;
    std::size_t i = open + kBoxed.size();
    int depth = 1;
    while (i < text.size() && depth > 0) {
      if (text[i] == '{') ++depth;
      if (text[i] == '}') --depth;
      ++i;
    }
    if (depth != 0) break;  // unbalanced tail; ignore it
    payloads.push_back(text.substr(open + kBoxed.size(),
                                   i - 1 - (open + kBoxed.size())));
    pos = i;
  }
  return payloads;
}

std::optional<char> match_boxed(std::string_view text,
                                const std::vector<char>& labels) {
  const std::vector<std::string_view> payloads = boxed_payloads(text);
  for (auto it = payloads.rbegin(); it != payloads.rend(); ++it) {
    const std::vector<char> found = standalone_labels(*it, labels);
    if (found.size() == 1) return found[0];
  }
  return std::nullopt;
}

bool iequals(std::string_view text, std::string_view lower_word) {
  if (text.size() != lower_word.size()) return false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[i])) != lower_word[i]) {
      return false;
    }
  }
  return true;
}

std::size_t skip_spaces(std::string_view text, std::size_t i) {
  while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  return i;
}

// "answer is B", "Answer: B", "final answer is (B)." and similar. The
// phrase is case-insensitive, the label is not. Returns the last match.
std::optional<char> match_answer_phrase(std::string_view text,
                                        const std::vector<char>& labels) {
  constexpr std::string_view kWord = "answer";
  std::optional<char> last;
  for (std::size_t i = 0; i + kWord.size() <= text.size(); ++i) {
    if (!iequals(text.substr(i, kWord.size()), kWord)) continue;
    if (i > 0 && is_alnum(text[i - 1])) continue;
    std::size_t j = skip_spaces(text, i + kWord.size());
    bool connected = false;
    if (j + 2 <= text.size() && iequals(text.substr(j, 2), "is") &&
        (j + 2 == text.size() || !is_alnum(text[j + 2]))) {
      j = skip_spaces(text, j + 2);
      connected = true;
    }
    if (j < text.size() && text[j] == ':') {
      j = skip_spaces(text, j + 1);
      connected = true;
    }
    if (!connected) continue;
    bool paren = false;
    if (j < text.size() && text[j] == '(') {
      paren = true;
      ++j;
    }
    if (j >= text.size() || !in_labels(text[j], labels)) continue;
    const char label = text[j];
    std::size_t k = j + 1;
    if (paren) {
      if (k < text.size() && text[k] == ')') {
        ++k;
      } else {
        continue;
      }
    }
    if (k < text.size() && is_alnum(text[k])) continue;
    last = label;
  }
  return last;
}

std::optional<char> match_lone_letter(std::string_view text,
                                      const std::vector<char>& labels) {
  // Final non-empty line, allowing "B", "(B)", or "B.".
  std::size_t end = text.size();
  while (end > 0) {
    std::size_t start = text.rfind('\n', end - 1);
    start = (start == std::string_view::npos) ? 0 : start + 1;
    const std::string line = trim(text.substr(start, end - start));
    if (!line.empty()) {
      if (line.size() == 1 && in_labels(line[0], labels)) return line[0];
      if (line.size() == 2 && line[1] == '.' && in_labels(line[0], labels)) {
        return line[0];
      }
      if (line.size() == 3 && line[0] == '(' && line[2] == ')' &&
          in_labels(line[1], labels)) {
        return line[1];
      }
      return std::nullopt;
    }
    if (start == 0) break;
    end = start - 1;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(ExtractionRule rule) {
  switch (rule) {
    case ExtractionRule::boxed: return "boxed";
    case ExtractionRule::answer_phrase: return "answer_phrase";
    case ExtractionRule::lone_letter: return "lone_letter";
    case ExtractionRule::none: return "none";
  }
  return "none";
}

std::optional<ExtractionRule> extraction_rule_from_string(std::string_view s) {
  if (s == "boxed") return ExtractionRule::boxed;
  if (s == "answer_phrase") return ExtractionRule::answer_phrase;
  if (s == "lone_letter") return ExtractionRule::lone_letter;
  if (s == "none") return ExtractionRule::none;
  return std::nullopt;
}

std::string format_question(const McqTask& task) {
  std::string out = task.masked_context;
  out += "\n\nOptions:\n";
  for (const McqOption& option : task.options) {
    out += option.label;
    out += ". ";
    out += option.text;
    out += '\n';
  }
  out +=
      "\nChoose the option that correctly fills in [MASK]. Respond with "
      "your chosen option letter in \\boxed{}.";
  return out;
}

Extraction extract_choice(std::string_view response,
                          const std::vector<char>& labels) {
  if (auto label = match_boxed(response, labels)) {
    return {label, ExtractionRule::boxed};
  }
  if (auto label = match_answer_phrase(response, labels)) {
    return {label, ExtractionRule::answer_phrase};
  }
  if (auto label = match_lone_letter(response, labels)) {
    return {label, ExtractionRule::lone_letter};
  }
  return {std::nullopt, ExtractionRule::none};
}

Verdict score(const McqTask& task, std::string_view response) {
  const Extraction extraction = extract_choice(response, task.labels());
  Verdict verdict;
  verdict.chosen_label = extraction.label;
  verdict.extraction_rule = extraction.rule;
  verdict.reward =
      (extraction.label && *extraction.label == task.answer_label) ? 1 : 0;
  return verdict;
}

}  // namespace mcqpipe
