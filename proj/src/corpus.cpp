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
#include "mcqpipe/corpus.hpp"

#include <stdexcept>
#include <utility>

#include "mcqpipe/text.hpp"

namespace mcqpipe {

namespace {

constexpr const char* kKnownFields[] = {"id",       "domain",   "kind",
                                        "question", "solution", "document",
                                        "meta"};

bool is_known_field(const std::string& key) {
  for (const char* f : kKnownFields) {
    if (key == f) return true;
  }
  return false;
}

// Parses one corpus line into a record. Returns the skip reason on failure.
std::optional<std::string> parse_record_line(
    const std::string& line, std::optional<Domain> default_domain,
    std::optional<RecordKind> default_kind, SourceRecord& out) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error&) {
    return "malformed JSON";
  }
  if (!doc.is_object()) return "not a JSON object";

  if (!doc.contains("id") || !doc["id"].is_string()) return "missing id";
  out.id = doc["id"].get<std::string>();

  if (doc.contains("domain")) {
    if (!doc["domain"].is_string()) return "invalid domain";
    auto d = domain_from_string(doc["domain"].get<std::string>());
    if (!d) return "invalid domain";
    if (default_domain && *d != *default_domain) return "domain mismatch";
    out.domain = *d;
  } else if (default_domain) {
    out.domain = *default_domain;
  } else {
    return "missing domain";
  }

  if (doc.contains("kind")) {
    if (!doc["kind"].is_string()) return "invalid kind";
    auto k = kind_from_string(doc["kind"].get<std::string>());
    if (!k) return "invalid kind";
    if (default_kind && *k != *default_kind) return "kind mismatch";
    out.kind = *k;
  } else if (default_kind) {
    out.kind = *default_kind;
  } else {
    return "missing kind";
  }

  auto read_text = [&doc](const char* key,
                          std::optional<std::string>& slot) -> bool {
    if (!doc.contains(key)) return true;
    if (!doc[key].is_string()) return false;
    slot = normalize_field(doc[key].get<std::string>());
    return true;
  };
  if (!read_text("question", out.question)) return "invalid question";
  if (!read_text("solution", out.solution)) return "invalid solution";
  if (!read_text("document", out.document)) return "invalid document";

  if (doc.contains("meta")) {
    if (!doc["meta"].is_object()) return "invalid meta";
    for (auto& [key, value] : doc["meta"].items()) {
      out.meta[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
  }
  // Source corpora carry heterogeneous extra metadata; preserve it rather
  // than reject. Explicit meta entries win on key collision.
  for (auto& [key, value] : doc.items()) {
    if (is_known_field(key)) continue;
    if (out.meta.count(key) != 0) continue;
    out.meta[key] = value.is_string() ? value.get<std::string>() : value.dump();
  }

  if (auto err = validation_error(out)) return err;
  return std::nullopt;
}

}  // namespace

namespace {

// Whitespace-only content is as useless as none; the loader trims before
// validating, but the validator must hold on raw records too.
bool blank(const std::optional<std::string>& value) {
  if (!value) return true;
  return value->find_first_not_of(" \t\r\n\f\v") == std::string::npos;
}

}  // namespace

std::optional<std::string> validation_error(const SourceRecord& record) {
  // Order is part of the contract: kind-consistency, non-emptiness, id.
  if (record.kind == RecordKind::qa_pair) {
    if (record.document.has_value()) {
      return "kind-consistency: qa_pair must not carry a document";
    }
  } else {
    if (record.question.has_value() || record.solution.has_value()) {
      return "kind-consistency: raw_document must not carry question/solution";
    }
  }
  if (record.kind == RecordKind::qa_pair) {
    if (blank(record.question)) return "non-emptiness: question";
    if (blank(record.solution)) return "non-emptiness: solution";
  } else {
    if (blank(record.document)) return "non-emptiness: document";
  }
  if (record.id.empty()) return "id: empty";
  return std::nullopt;
}

const SourceRecord& validate_record(const SourceRecord& record) {
  if (auto err = validation_error(record)) {
    throw std::invalid_argument("invalid record: " + *err);
  }
  return record;
}

json serialize_record(const SourceRecord& record) {
  json doc;
  doc["id"] = record.id;
  doc["domain"] = std::string(to_string(record.domain));
  doc["kind"] = std::string(to_string(record.kind));
  if (record.question) doc["question"] = *record.question;
  if (record.solution) doc["solution"] = *record.solution;
  if (record.document) doc["document"] = *record.document;
  if (!record.meta.empty()) doc["meta"] = record.meta;
  return doc;
}

CorpusReader::CorpusReader(const std::filesystem::path& path,
                           std::optional<Domain> default_domain,
                           std::optional<RecordKind> default_kind)
    : in_(path),
      default_domain_(default_domain),
      default_kind_(default_kind) {
  if (!in_) {
    throw std::runtime_error("cannot open corpus file: " + path.string());
  }
}

void CorpusReader::skip(const std::string& reason) {
  ++summary_.skipped;
  ++summary_.skipped_by_reason[reason];
}

std::optional<SourceRecord> CorpusReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++summary_.lines;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      skip("empty line");
      continue;
    }
    SourceRecord record;
    if (auto reason =
            parse_record_line(line, default_domain_, default_kind_, record)) {
      skip(*reason);
      continue;
    }
    if (!seen_ids_.insert(record.id).second) {
      skip("duplicate id");
      continue;
    }
    ++summary_.loaded;
    return record;
  }
  return std::nullopt;
}

std::pair<std::vector<SourceRecord>, LoadSummary> load_corpus(
    const std::filesystem::path& path, std::optional<Domain> default_domain,
    std::optional<RecordKind> default_kind) {
  CorpusReader reader(path, default_domain, default_kind);
  std::vector<SourceRecord> records;
  while (auto record = reader.next()) {
    records.push_back(std::move(*record));
  }
  return {std::move(records), reader.summary()};
}

}  // namespace mcqpipe
