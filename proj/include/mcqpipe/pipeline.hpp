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
#ifndef MCQPIPE_PIPELINE_HPP_
#define MCQPIPE_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mcqpipe/config.hpp"
#include "mcqpipe/corpus.hpp"
#include "mcqpipe/generation_client.hpp"
#include "mcqpipe/jsonl.hpp"
#include "mcqpipe/rollout.hpp"
#include "mcqpipe/types.hpp"

namespace mcqpipe {

// Stages communicate through files; the manifest is the audit trail tying
// them together. Counts are keyed by basename so the manifest's bytes do
// not depend on where the working directory lives.
struct ManifestEntry {
  std::string stage;
  std::string timestamp;  // from config; empty keeps reruns byte-identical
  std::map<std::string, std::int64_t> inputs;   // basename -> records read
  std::map<std::string, std::int64_t> outputs;  // basename -> records written
  std::map<std::string, std::int64_t> counts;   // stage-specific tallies
};

json serialize_manifest_entry(const ManifestEntry& entry);
ManifestEntry manifest_entry_from_json(const json& doc);

void append_manifest_entry(const std::filesystem::path& path,
                           const ManifestEntry& entry);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

// Checks that no stage gains or loses records: every input is accounted for
// in an output or an explicit skip/drop tally. Returns the first violation,
// or nullopt when the ledger balances.
std::optional<std::string> manifest_conservation_error(
    const std::vector<ManifestEntry>& entries);

struct StageResult {
  ManifestEntry manifest;
  json summary;  // what the CLI prints, one JSON object per stage
};

// Canonical file names under the working directory.
inline constexpr const char* kCorpusFile = "corpus.jsonl";
inline constexpr const char* kTasksFile = "tasks.jsonl";
inline constexpr const char* kSkippedFile = "skipped.jsonl";
inline constexpr const char* kReportsFile = "reports.jsonl";
inline constexpr const char* kKeptFile = "kept.jsonl";
inline constexpr const char* kStatsFile = "stats.json";
inline constexpr const char* kAdvantagesFile = "advantages.jsonl";
inline constexpr const char* kManifestFile = "manifest.jsonl";

struct IngestArgs {
  std::vector<std::filesystem::path> inputs;
  std::optional<Domain> domain;     // default for records without the field
  std::optional<RecordKind> kind;   // likewise
  std::filesystem::path out;
};

// Validates raw corpora into one clean file. Schema violations and
// duplicate ids (within and across inputs) are skipped and counted.
StageResult run_ingest(const PipelineConfig& config, const IngestArgs& args);

struct SynthesizeArgs {
  std::filesystem::path corpus;
  std::filesystem::path out_tasks;
  std::filesystem::path out_skipped;
};

// Turns each corpus record into a task via the generator model. Skips are
// logged, never silently dropped: every record lands in out_tasks or
// out_skipped. Transport-fatal generation errors abort the stage.
StageResult run_synthesize(const PipelineConfig& config,
                           const GenerationClient& client,
                           const SynthesizeArgs& args);

struct ProbeArgs {
  std::filesystem::path tasks;
  std::filesystem::path out_reports;
  std::optional<int> n;
  std::optional<std::int64_t> seed;  // base seed; rollout i uses seed + i
};

// Probes every task with n student rollouts. All tasks share one seed
// ladder (the prompts differ); omitted seed derives a stable base from the
// master seed.
StageResult run_probe(const PipelineConfig& config,
                      const GenerationClient& client, const ProbeArgs& args);

struct FilterArgs {
  std::filesystem::path reports;
  std::filesystem::path out;
  // Explicit buckets to drop. Unset falls back to config.filter_drop, and
  // failing that to the domain default: drop easy tasks from cyber
  // corpora only, since noisy-source synthesis is where saturated tasks
  // concentrate.
  std::optional<std::set<Bucket>> drop;
};

StageResult run_filter(const PipelineConfig& config, const FilterArgs& args);

struct StatsArgs {
  std::filesystem::path reports;
  std::filesystem::path out;
  std::optional<int> bins;
};

// Aggregates reports into bucket counts, effectiveness ratio, and the
// accuracy histogram; writes them as one JSON document.
StageResult run_stats(const PipelineConfig& config, const StatsArgs& args);

struct SignalCheckArgs {
  std::filesystem::path reports;
  std::filesystem::path out;
};

// Converts per-rollout rewards into trainer-ready advantages (group mean
// subtraction, then batch standardization) and writes one line per rollout.
StageResult run_signal_check(const PipelineConfig& config,
                             const SignalCheckArgs& args);

// ingest -> synthesize -> probe -> filter -> stats -> signal-check with
// canonical paths under config.workdir. signal-check runs on the filtered
// reports: those are the tasks a trainer would see.
std::vector<StageResult> run_all(const PipelineConfig& config,
                                 const GenerationClient& generator,
                                 const GenerationClient& student,
                                 const IngestArgs& ingest);

}  // namespace mcqpipe

#endif  // MCQPIPE_PIPELINE_HPP_
