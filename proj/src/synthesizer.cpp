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
#include "mcqpipe/synthesizer.hpp"

#include <algorithm>
#include <utility>

#include "mcqpipe/generation_client.hpp"
#include "mcqpipe/hash.hpp"
#include "mcqpipe/prompt_templates.hpp"
#include "mcqpipe/rng.hpp"
#include "mcqpipe/text.hpp"

namespace mcqpipe {
namespace {

struct FieldKeys {
  const char* masked;
  const char* removed;
};

FieldKeys keys_for(Domain domain) {
  switch (domain) {
    case Domain::math:
    case Domain::stem:
      return {"masked_reference_solution", "removed_steps"};
    case Domain::code:
      return {"masked_reference_solution", "removed_lines"};
    case Domain::cyber:
      return {"masked_passage", "removed_content"};
  }
  return {"masked_reference_solution", "removed_steps"};
}

// Left-to-right, single pass: substituted text is never rescanned, so a
// literal "[Solution]" inside a question cannot trigger a second expansion.
std::string fill_slots(
    std::string_view tmpl,
    const std::vector<std::pair<std::string_view, std::string_view>>& slots) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    std::size_t best = std::string_view::npos;
    std::size_t best_slot = 0;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const std::size_t at = tmpl.find(slots[s].first, pos);
      if (at < best) {
        best = at;
        best_slot = s;
      }
    }
    if (best == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, best - pos));
    out.append(slots[best_slot].second);
    pos = best + slots[best_slot].first.size();
  }
  return out;
}

std::optional<std::pair<std::size_t, std::size_t>> last_answer_block(
    std::string_view text) {
  constexpr std::string_view kOpen = "<answer>";
  constexpr std::string_view kClose = "</answer>";
  std::optional<std::pair<std::size_t, std::size_t>> found;
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = text.find(kOpen, pos);
    if (open == std::string_view::npos) break;
    const std::size_t close = text.find(kClose, open + kOpen.size());
    if (close == std::string_view::npos) break;
    found = {open + kOpen.size(), close};
    pos = close + kClose.size();
  }
  return found;
}

std::string strip_code_fence(std::string_view payload) {
  std::string t = trim(payload);
  if (t.rfind("```", 0) != 0) return t;
  const std::size_t nl = t.find('\n');
  if (nl == std::string::npos) return "";
  t = t.substr(nl + 1);
  std::string r = rstrip(t);
  if (r.size() >= 3 && r.compare(r.size() - 3, 3, "```") == 0) {
    r.erase(r.size() - 3);
  }
  return r;
}

ParseResult parse_error(std::string message) {
  ParseResult result;
  result.status = ParseStatus::error;
  result.error = std::move(message);
  return result;
}

// Keeps the first occurrence of each normalized form, drops empties and
// anything that collides with the ground truth.
std::vector<std::string> distinct_distractors(
    const std::vector<std::string>& raw, const std::string& truth_normalized) {
  std::vector<std::string> kept;
  std::vector<std::string> seen;
  for (const std::string& d : raw) {
    std::string norm = normalize_for_compare(d);
    if (norm.empty() || norm == truth_normalized) continue;
    if (std::find(seen.begin(), seen.end(), norm) != seen.end()) continue;
    seen.push_back(std::move(norm));
    kept.push_back(d);
  }
  return kept;
}

constexpr std::size_t kCyberPassageMinWords = 50;
constexpr std::size_t kCyberPassageMaxWords = 1200;

}  // namespace

std::string_view to_string(PromptVariant variant) {
  switch (variant) {
    case PromptVariant::math_stem: return "math_stem";
    case PromptVariant::code: return "code";
    case PromptVariant::cyber: return "cyber";
  }
  return "math_stem";
}

PromptVariant prompt_variant_for(Domain domain) {
  switch (domain) {
    case Domain::math:
    case Domain::stem:
      return PromptVariant::math_stem;
    case Domain::code:
      return PromptVariant::code;
    case Domain::cyber:
      return PromptVariant::cyber;
  }
  return PromptVariant::math_stem;
}

std::string_view prompt_template(PromptVariant variant) {
  switch (variant) {
    case PromptVariant::math_stem: return kMathStemTemplate;
    case PromptVariant::code: return kCodeTemplate;
    case PromptVariant::cyber: return kCyberTemplate;
  }
  return kMathStemTemplate;
}

std::vector<char> McqTask::labels() const {
  std::vector<char> out;
  out.reserve(options.size());
  for (const McqOption& option : options) out.push_back(option.label);
  return out;
}

std::string build_prompt(const SourceRecord& record) {
  const PromptVariant variant = prompt_variant_for(record.domain);
  if (variant == PromptVariant::cyber) {
    if (record.kind != RecordKind::raw_document || !record.document) {
      throw std::invalid_argument(
          "template mismatch: cyber synthesis needs a raw_document with a "
          "document field (record " + record.id + ")");
    }
    return fill_slots(prompt_template(variant),
                      {{"[Document]", *record.document}});
  }
  if (record.kind != RecordKind::qa_pair || !record.question ||
      !record.solution) {
    throw std::invalid_argument(
        "template mismatch: " + std::string(to_string(record.domain)) +
        " synthesis needs a qa_pair with question and solution (record " +
        record.id + ")");
  }
  return fill_slots(prompt_template(variant),
                    {{"[Question]", *record.question},
                     {"[Solution]", *record.solution}});
}

ParseResult parse_response(std::string_view text, Domain domain,
                           std::size_t min_distractors,
                           std::string_view source_id) {
  const auto block = last_answer_block(text);
  if (!block) return parse_error("missing answer block");
  const std::string_view content =
      text.substr(block->first, block->second - block->first);
  if (trim(content).empty()) {
    if (domain == Domain::cyber) {
      ParseResult result;
      result.status = ParseStatus::empty_answer;
      return result;
    }
    return parse_error("empty answer block");
  }

  const std::string payload = strip_code_fence(content);
  json doc = json::parse(payload, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) return parse_error("invalid JSON payload");
  if (!doc.is_object()) return parse_error("payload is not a JSON object");

  const FieldKeys keys = keys_for(domain);
  for (const char* key : {keys.masked, keys.removed}) {
    if (!doc.contains(key)) {
      return parse_error(std::string("missing field: ") + key);
    }
    if (!doc[key].is_string()) {
      return parse_error(std::string("field ") + key + " must be a string");
    }
  }
  if (!doc.contains("distractors") || !doc["distractors"].is_array()) {
    return parse_error("field distractors must be an array of strings");
  }
  std::vector<std::string> raw_distractors;
  for (const json& item : doc["distractors"]) {
    if (!item.is_string()) {
      return parse_error("field distractors must be an array of strings");
    }
    raw_distractors.push_back(item.get<std::string>());
  }

  ParseResult result;
  result.status = ParseStatus::draft;
  result.draft.source_id = std::string(source_id);
  result.draft.domain = domain;
  result.draft.masked_text = doc[keys.masked].get<std::string>();
  result.draft.ground_truth = doc[keys.removed].get<std::string>();

  const std::size_t masks = count_occurrences(result.draft.masked_text,
                                              kMaskToken);
  if (masks != 1) {
    return parse_error("mask token count " + std::to_string(masks));
  }
  const std::string truth_norm =
      normalize_for_compare(result.draft.ground_truth);
  if (truth_norm.empty()) return parse_error("empty ground truth");

  result.draft.distractors = distinct_distractors(raw_distractors, truth_norm);
  if (result.draft.distractors.size() < min_distractors) {
    return parse_error("distractors below minimum (have " +
                       std::to_string(result.draft.distractors.size()) +
                       ", need " + std::to_string(min_distractors) + ")");
  }

  if (domain == Domain::cyber) {
    // The passage the model worked from, reconstructed by undoing the mask.
    std::string restored = result.draft.masked_text;
    const std::size_t at = restored.find(kMaskToken);
    restored.replace(at, kMaskToken.size(), result.draft.ground_truth);
    const std::size_t words = word_count(restored);
    if (words < kCyberPassageMinWords || words > kCyberPassageMaxWords) {
      result.warnings.push_back("cyber passage word count " +
                                std::to_string(words) +
                                " outside expected range");
    }
    result.draft.extracted_passage = std::move(restored);
  }
  return result;
}

std::string serialize_draft(const SynthesisDraft& draft) {
  const FieldKeys keys = keys_for(draft.domain);
  json payload;
  payload[keys.masked] = draft.masked_text;
  payload[keys.removed] = draft.ground_truth;
  payload["distractors"] = draft.distractors;
  return "<answer>\n" + payload.dump(2) + "\n</answer>";
}

McqTask assemble_mcq(const SynthesisDraft& draft, int option_count,
                     std::int64_t seed, std::string_view model_id,
                     std::string_view timestamp) {
  if (option_count < 2 || option_count > 26) {
    throw std::invalid_argument("option_count must be between 2 and 26");
  }
  const std::size_t masks = count_occurrences(draft.masked_text, kMaskToken);
  if (masks != 1) {
    throw AssemblyError("draft invalid: mask token count " +
                        std::to_string(masks));
  }
  const std::string truth_norm = normalize_for_compare(draft.ground_truth);
  if (truth_norm.empty()) {
    throw AssemblyError("draft invalid: empty ground truth");
  }
  const std::vector<std::string> pool =
      distinct_distractors(draft.distractors, truth_norm);
  const std::size_t need = static_cast<std::size_t>(option_count) - 1;
  if (pool.size() < need) {
    throw AssemblyError("insufficient distractors (have " +
                        std::to_string(pool.size()) + " distinct, need " +
                        std::to_string(need) + ")");
  }

  std::mt19937_64 rng(derive_seed(static_cast<std::uint64_t>(seed), "assemble",
                                  draft.source_id));
  const std::vector<std::size_t> chosen = sample_indices(pool.size(), need, rng);

  // Slot 0 is the ground truth until the shuffle moves it.
  std::vector<std::string> texts;
  texts.reserve(static_cast<std::size_t>(option_count));
  texts.push_back(draft.ground_truth);
  for (std::size_t index : chosen) texts.push_back(pool[index]);
  std::vector<std::size_t> order(texts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  deterministic_shuffle(order, rng);

  McqTask task;
  task.task_id = draft.source_id + "#0";
  task.domain = draft.domain;
  task.masked_context = draft.masked_text;
  task.option_count = option_count;
  task.shuffle_seed = seed;
  task.options.reserve(texts.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    McqOption option;
    option.label = static_cast<char>('A' + i);
    option.text = texts[order[i]];
    if (order[i] == 0) task.answer_label = option.label;
    task.options.push_back(std::move(option));
  }
  task.provenance.source_id = draft.source_id;
  task.provenance.model_id = std::string(model_id);
  task.provenance.prompt_variant =
      std::string(to_string(prompt_variant_for(draft.domain)));
  task.provenance.timestamp = std::string(timestamp);
  return task;
}

std::optional<std::string> validate_task(const McqTask& task) {
  if (task.task_id.empty()) return "task_id: empty";
  if (task.option_count < 2 || task.option_count > 26) {
    return "option_count out of range";
  }
  if (task.options.size() != static_cast<std::size_t>(task.option_count)) {
    return "options: size != option_count";
  }
  const std::size_t masks = count_occurrences(task.masked_context, kMaskToken);
  if (masks != 1) return "mask token count " + std::to_string(masks);
  std::vector<std::string> seen;
  bool answer_present = false;
  for (std::size_t i = 0; i < task.options.size(); ++i) {
    const McqOption& option = task.options[i];
    if (option.label != static_cast<char>('A' + i)) {
      return "labels: expected contiguous A.. sequence";
    }
    std::string norm = normalize_for_compare(option.text);
    if (norm.empty()) {
      return std::string("options: empty text at label ") + option.label;
    }
    if (std::find(seen.begin(), seen.end(), norm) != seen.end()) {
      return std::string("options: duplicate text at label ") + option.label;
    }
    seen.push_back(std::move(norm));
    if (option.label == task.answer_label) answer_present = true;
  }
  if (!answer_present) return "answer_label: not among labels";
  return std::nullopt;
}

SynthesisResult synthesize(const SourceRecord& record,
                           const GenerationClient& client,
                           const SynthesisOptions& options) {
  SynthesisResult result;
  std::string prompt;
  try {
    prompt = build_prompt(record);
  } catch (const std::invalid_argument&) {
    result.outcome = Skipped{"template mismatch"};
    return result;
  }

  const std::size_t min_distractors =
      static_cast<std::size_t>(options.option_count) - 1;
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    result.attempts = attempt + 1;
    GenerationRequest request;
    request.prompt = prompt;
    request.temperature = options.temperature;
    request.max_tokens = options.max_output_tokens;
    request.seed = options.seed + attempt;
    const GenerationResponse response = client.generate(request);
    if (response.finish_reason == FinishReason::error) {
      throw TransportError("generation for record " + record.id +
                           " finished in error state");
    }
    const std::string attempt_tag = "attempt " + std::to_string(attempt + 1);
    if (response.finish_reason == FinishReason::length) {
      result.warnings.push_back(attempt_tag + ": response truncated");
      continue;
    }

    ParseResult parsed = parse_response(response.text, record.domain,
                                        min_distractors, record.id);
    for (std::string& w : parsed.warnings) {
      result.warnings.push_back(attempt_tag + ": " + w);
    }
    if (parsed.status == ParseStatus::empty_answer) {
      result.outcome = Skipped{"no educational passage"};
      return result;
    }
    if (parsed.status == ParseStatus::error) {
      result.warnings.push_back(attempt_tag + ": " + parsed.error);
      continue;
    }

    try {
      // Provenance names the model the serving path reported for this very
      // reply; the client's configured identity is only the fallback.
      const std::string& model =
          response.model_id.empty() ? client.model_id() : response.model_id;
      McqTask task =
          assemble_mcq(parsed.draft, options.option_count, options.seed,
                       model, options.timestamp);
      if (auto violation = validate_task(task)) {
        result.warnings.push_back(attempt_tag + ": " + *violation);
        continue;
      }
      result.outcome = std::move(task);
      return result;
    } catch (const AssemblyError& e) {
      result.warnings.push_back(attempt_tag + ": " + std::string(e.what()));
      continue;
    }
  }
  result.outcome = Skipped{"synthesis failed"};
  return result;
}

json serialize_task(const McqTask& task) {
  json doc;
  doc["task_id"] = task.task_id;
  doc["domain"] = std::string(to_string(task.domain));
  doc["masked_context"] = task.masked_context;
  json options = json::array();
  for (const McqOption& option : task.options) {
    json entry;
    entry["label"] = std::string(1, option.label);
    entry["text"] = option.text;
    options.push_back(std::move(entry));
  }
  doc["options"] = std::move(options);
  doc["answer_label"] = std::string(1, task.answer_label);
  doc["option_count"] = task.option_count;
  doc["shuffle_seed"] = task.shuffle_seed;
  json provenance;
  provenance["source_id"] = task.provenance.source_id;
  provenance["model_id"] = task.provenance.model_id;
  provenance["prompt_variant"] = task.provenance.prompt_variant;
  provenance["timestamp"] = task.provenance.timestamp;
  doc["provenance"] = std::move(provenance);
  return doc;
}

namespace {

const json& require_field(const json& doc, const char* name,
                          const char* context) {
  auto it = doc.find(name);
  if (it == doc.end()) {
    throw std::runtime_error(std::string(context) + ": missing field '" +
                             name + "'");
  }
  return *it;
}

std::string require_string(const json& doc, const char* name,
                           const char* context) {
  const json& value = require_field(doc, name, context);
  if (!value.is_string()) {
    throw std::runtime_error(std::string(context) + ": field '" + name +
                             "' must be a string");
  }
  return value.get<std::string>();
}

char require_label(const json& doc, const char* name, const char* context) {
  const std::string s = require_string(doc, name, context);
  if (s.size() != 1 || s[0] < 'A' || s[0] > 'Z') {
    throw std::runtime_error(std::string(context) + ": field '" + name +
                             "' must be a single letter A-Z");
  }
  return s[0];
}

}  // namespace

McqTask task_from_json(const json& doc) {
  constexpr const char* kContext = "task record";
  if (!doc.is_object()) {
    throw std::runtime_error(std::string(kContext) + ": not a JSON object");
  }
  McqTask task;
  task.task_id = require_string(doc, "task_id", kContext);
  const std::string domain = require_string(doc, "domain", kContext);
  const auto parsed_domain = domain_from_string(domain);
  if (!parsed_domain) {
    throw std::runtime_error(std::string(kContext) + ": unknown domain '" +
                             domain + "'");
  }
  task.domain = *parsed_domain;
  task.masked_context = require_string(doc, "masked_context", kContext);
  const json& options = require_field(doc, "options", kContext);
  if (!options.is_array()) {
    throw std::runtime_error(std::string(kContext) +
                             ": field 'options' must be an array");
  }
  for (const json& entry : options) {
    if (!entry.is_object()) {
      throw std::runtime_error(std::string(kContext) +
                               ": option entries must be objects");
    }
    McqOption option;
    option.label = require_label(entry, "label", kContext);
    option.text = require_string(entry, "text", kContext);
    task.options.push_back(std::move(option));
  }
  task.answer_label = require_label(doc, "answer_label", kContext);
  const json& count = require_field(doc, "option_count", kContext);
  if (!count.is_number_integer()) {
    throw std::runtime_error(std::string(kContext) +
                             ": field 'option_count' must be an integer");
  }
  task.option_count = count.get<int>();
  const json& seed = require_field(doc, "shuffle_seed", kContext);
  if (!seed.is_number_integer()) {
    throw std::runtime_error(std::string(kContext) +
                             ": field 'shuffle_seed' must be an integer");
  }
  task.shuffle_seed = seed.get<std::int64_t>();
  const json& provenance = require_field(doc, "provenance", kContext);
  if (!provenance.is_object()) {
    throw std::runtime_error(std::string(kContext) +
                             ": field 'provenance' must be an object");
  }
  task.provenance.source_id = require_string(provenance, "source_id", kContext);
  task.provenance.model_id = require_string(provenance, "model_id", kContext);
  task.provenance.prompt_variant =
      require_string(provenance, "prompt_variant", kContext);
  task.provenance.timestamp = require_string(provenance, "timestamp", kContext);
  if (auto violation = validate_task(task)) {
    throw std::runtime_error(std::string(kContext) + " invalid: " + *violation);
  }
  return task;
}

}  // namespace mcqpipe
