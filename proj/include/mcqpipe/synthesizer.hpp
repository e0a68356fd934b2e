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
#ifndef MCQPIPE_SYNTHESIZER_HPP_
#define MCQPIPE_SYNTHESIZER_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mcqpipe/corpus.hpp"
#include "mcqpipe/jsonl.hpp"
#include "mcqpipe/types.hpp"

namespace mcqpipe {

class GenerationClient;

// The one blank every task carries. Multiple occurrences in a generated
// draft invalidate it; downstream formatting assumes a single blank.
inline constexpr std::string_view kMaskToken = "[MASK]";

enum class PromptVariant { math_stem, code, cyber };

std::string_view to_string(PromptVariant variant);
PromptVariant prompt_variant_for(Domain domain);

// The synthesis instruction shipped for `variant`, with [Question] /
// [Solution] / [Document] slots still unfilled.
std::string_view prompt_template(PromptVariant variant);

// Parsed synthesis output, before option sampling and shuffling: the masked
// text, the removed span (ground truth), and the candidate distractor set.
struct SynthesisDraft {
  std::string source_id;
  Domain domain = Domain::math;
  std::string masked_text;   // contains [MASK] exactly once
  std::string ground_truth;  // non-empty
  std::vector<std::string> distractors;  // pairwise distinct, none == truth
  std::optional<std::string> extracted_passage;  // cyber path only
};

struct McqOption {
  char label = 'A';
  std::string text;
};

struct TaskProvenance {
  std::string source_id;
  std::string model_id;
  std::string prompt_variant;
  std::string timestamp;
};

// A verifiable task: masked context plus labeled, shuffled options, exactly
// one of which restores the removed span.
struct McqTask {
  std::string task_id;
  Domain domain = Domain::math;
  std::string masked_context;
  std::vector<McqOption> options;
  char answer_label = 'A';
  int option_count = 0;
  std::int64_t shuffle_seed = 0;
  TaskProvenance provenance;

  std::vector<char> labels() const;
};

struct AssemblyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fills the domain-matched template with the record's fields, verbatim.
// Throws std::invalid_argument when the record kind does not fit the
// domain's template (reasoning templates need qa_pair, cyber needs
// raw_document).
std::string build_prompt(const SourceRecord& record);

enum class ParseStatus { draft, empty_answer, error };

struct ParseResult {
  ParseStatus status = ParseStatus::error;
  SynthesisDraft draft;         // engaged iff status == draft
  std::string error;            // named cause iff status == error
  std::vector<std::string> warnings;
};

// Extracts the last <answer>...</answer> block from a raw model response,
// strips an optional code fence, parses the strict-JSON payload for
// `domain`, and enforces draft invariants. Distractors are deduplicated
// (and cleansed of any ground-truth duplicates) by normalized comparison;
// falling below `min_distractors` afterwards is an error. An empty answer
// is legitimate only for cyber sources with no usable passage.
ParseResult parse_response(std::string_view text, Domain domain,
                           std::size_t min_distractors = 1,
                           std::string_view source_id = "");

// Inverse of parse_response for valid drafts; also what mock services emit.
std::string serialize_draft(const SynthesisDraft& draft);

// Deterministically samples option_count - 1 distractors, shuffles them
// together with the ground truth, and labels the result A, B, C, ...
// Byte-identical output for identical (draft, option_count, seed); the
// random stream is seeded from both `seed` and the draft's source_id so a
// single master seed does not align shuffles across tasks.
// Throws AssemblyError when distinct distractors fall short of
// option_count - 1, std::invalid_argument on option_count outside [2, 26].
McqTask assemble_mcq(const SynthesisDraft& draft, int option_count,
                     std::int64_t seed, std::string_view model_id = "",
                     std::string_view timestamp = "");

// First violated McqTask invariant, or nullopt. Every task leaving
// synthesize() passes this check; it is enforced, not assumed.
std::optional<std::string> validate_task(const McqTask& task);

struct Skipped {
  std::string reason;
};

struct SynthesisResult {
  std::variant<McqTask, Skipped> outcome;
  int attempts = 0;
  std::vector<std::string> warnings;

  bool ok() const { return std::holds_alternative<McqTask>(outcome); }
  const McqTask& task() const { return std::get<McqTask>(outcome); }
  const Skipped& skipped() const { return std::get<Skipped>(outcome); }
};

struct SynthesisOptions {
  int option_count = 9;  // ground truth + 8 distractors
  std::int64_t seed = 0;
  int max_attempts = 3;
  double temperature = 1.0;
  int max_output_tokens = 4096;
  std::string timestamp;  // provenance; empty keeps runs reproducible
};

// Full per-record synthesis: build_prompt -> generate -> parse_response ->
// assemble_mcq, re-querying on parse or invariant failures up to
// max_attempts (attempt i uses request seed options.seed + i). Quality
// failures come back as Skipped with a reason code; only transport-fatal
// generation errors escape, as TransportError.
SynthesisResult synthesize(const SourceRecord& record,
                           const GenerationClient& client,
                           const SynthesisOptions& options);

json serialize_task(const McqTask& task);

// Parses one tasks.jsonl line back into a task. Throws std::runtime_error
// on schema violations.
McqTask task_from_json(const json& doc);

}  // namespace mcqpipe

#endif  // MCQPIPE_SYNTHESIZER_HPP_
