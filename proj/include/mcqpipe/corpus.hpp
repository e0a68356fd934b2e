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
#ifndef MCQPIPE_CORPUS_HPP_
#define MCQPIPE_CORPUS_HPP_

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mcqpipe/jsonl.hpp"
#include "mcqpipe/types.hpp"

namespace mcqpipe {

// One unit of raw input: a question/solution pair for the reasoning domains,
// or a raw document for noisy web-scrape sources. Immutable after load.
struct SourceRecord {
  std::string id;
  Domain domain = Domain::math;
  RecordKind kind = RecordKind::qa_pair;
  std::optional<std::string> question;
  std::optional<std::string> solution;
  std::optional<std::string> document;
  std::map<std::string, std::string> meta;
};

// First violated invariant, checked in a fixed order:
// kind-consistency, then non-emptiness, then id. nullopt if valid.
std::optional<std::string> validation_error(const SourceRecord& record);

// Returns the record unchanged iff valid; throws std::invalid_argument
// naming the first violated invariant otherwise. Idempotent.
const SourceRecord& validate_record(const SourceRecord& record);

json serialize_record(const SourceRecord& record);

struct LoadSummary {
  std::size_t lines = 0;
  std::size_t loaded = 0;
  std::size_t skipped = 0;
  std::map<std::string, std::size_t> skipped_by_reason;
};

// Streaming reader over a line-delimited JSON corpus file. Records with
// schema violations are skipped and counted, never fatal; an unreadable
// file throws. `default_domain` / `default_kind` fill in records that do
// not carry the field themselves; a record that carries a conflicting
// explicit value is a schema violation.
class CorpusReader {
 public:
  CorpusReader(const std::filesystem::path& path,
               std::optional<Domain> default_domain,
               std::optional<RecordKind> default_kind);

  // Next valid record in file order, or nullopt at end of file.
  std::optional<SourceRecord> next();

  const LoadSummary& summary() const { return summary_; }

 private:
  void skip(const std::string& reason);

  std::ifstream in_;
  std::optional<Domain> default_domain_;
  std::optional<RecordKind> default_kind_;
  std::set<std::string> seen_ids_;
  LoadSummary summary_;
};

// Eager convenience wrapper around CorpusReader.
std::pair<std::vector<SourceRecord>, LoadSummary> load_corpus(
    const std::filesystem::path& path, std::optional<Domain> default_domain,
    std::optional<RecordKind> default_kind);

}  // namespace mcqpipe

#endif  // MCQPIPE_CORPUS_HPP_
