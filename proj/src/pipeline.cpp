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
#include "mcqpipe/pipeline.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <thread>

#include "mcqpipe/hash.hpp"
#include "mcqpipe/rl_signal.hpp"
#include "mcqpipe/synthesizer.hpp"
#include "mcqpipe/text.hpp"

namespace mcqpipe {
namespace {

namespace fs = std::filesystem;

std::map<std::string, std::int64_t> counts_from_json(const json& doc,
                                                     const char* field) {
  std::map<std::string, std::int64_t> out;
  if (!doc.contains(field)) return out;
  if (!doc[field].is_object()) {
    throw std::runtime_error(std::string("manifest entry: field '") + field +
                             "' must be an object");
  }
  for (const auto& [key, value] : doc[field].items()) {
    if (!value.is_number_integer()) {
      throw std::runtime_error(std::string("manifest entry: count '") + key +
                               "' must be an integer");
    }
    out[key] = value.get<std::int64_t>();
  }
  return out;
}

std::int64_t count_or(const std::map<std::string, std::int64_t>& counts,
                      const std::string& key, std::int64_t fallback) {
  auto it = counts.find(key);
  return it == counts.end() ? fallback : it->second;
}

// Strict reader for our own intermediate files: a corrupted tasks/reports
// file is a bug, not input noise, so it fails the stage.
std::vector<McqTask> read_tasks_file(const fs::path& path) {
  std::vector<McqTask> tasks;
  for_each_line(path, [&](std::size_t line_no, const std::string& line) {
    if (trim(line).empty()) return;
    json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": malformed JSON");
    }
    tasks.push_back(task_from_json(doc));
  });
  return tasks;
}

std::vector<RolloutReport> read_reports_file(const fs::path& path) {
  std::vector<RolloutReport> reports;
  for_each_line(path, [&](std::size_t line_no, const std::string& line) {
    if (trim(line).empty()) return;
    json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": malformed JSON");
    }
    reports.push_back(report_from_json(doc));
  });
  return reports;
}

std::string basename_of(const fs::path& path) {
  return path.filename().string();
}

void append_stage_manifest(const PipelineConfig& config,
                           const ManifestEntry& entry) {
  append_manifest_entry(config.workdir / kManifestFile, entry);
}

}  // namespace

json serialize_manifest_entry(const ManifestEntry& entry) {
  json doc;
  doc["stage"] = entry.stage;
  doc["timestamp"] = entry.timestamp;
  doc["inputs"] = entry.inputs;
  doc["outputs"] = entry.outputs;
  doc["counts"] = entry.counts;
  return doc;
}

ManifestEntry manifest_entry_from_json(const json& doc) {
  if (!doc.is_object()) {
    throw std::runtime_error("manifest entry: not a JSON object");
  }
  if (!doc.contains("stage") || !doc["stage"].is_string()) {
    throw std::runtime_error("manifest entry: missing stage");
  }
  ManifestEntry entry;
  entry.stage = doc["stage"].get<std::string>();
  if (doc.contains("timestamp") && doc["timestamp"].is_string()) {
    entry.timestamp = doc["timestamp"].get<std::string>();
  }
  entry.inputs = counts_from_json(doc, "inputs");
  entry.outputs = counts_from_json(doc, "outputs");
  entry.counts = counts_from_json(doc, "counts");
  return entry;
}

void append_manifest_entry(const fs::path& path, const ManifestEntry& entry) {
  JsonlWriter writer(path, /*append=*/true);
  writer.write(serialize_manifest_entry(entry));
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::vector<ManifestEntry> entries;
  for_each_line(path, [&](std::size_t line_no, const std::string& line) {
    if (trim(line).empty()) return;
    json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": malformed JSON");
    }
    entries.push_back(manifest_entry_from_json(doc));
  });
  return entries;
}

std::optional<std::string> manifest_conservation_error(
    const std::vector<ManifestEntry>& entries) {
  for (const ManifestEntry& entry : entries) {
    const auto& c = entry.counts;
    auto fail = [&](const std::string& detail) {
      return "stage " + entry.stage + ": " + detail;
    };
    if (entry.stage == "ingest") {
      const std::int64_t lines = count_or(c, "lines", -1);
      const std::int64_t loaded = count_or(c, "loaded", -1);
      const std::int64_t skipped = count_or(c, "skipped", -1);
      if (lines < 0 || loaded < 0 || skipped < 0) {
        return fail("missing counts");
      }
      if (loaded + skipped != lines) {
        return fail("loaded + skipped != lines");
      }
    } else if (entry.stage == "synthesize") {
      const std::int64_t in = count_or(c, "records_in", -1);
      const std::int64_t tasks = count_or(c, "tasks_out", -1);
      const std::int64_t skipped = count_or(c, "skipped", -1);
      if (in < 0 || tasks < 0 || skipped < 0) return fail("missing counts");
      if (tasks + skipped != in) return fail("tasks_out + skipped != records_in");
    } else if (entry.stage == "probe") {
      const std::int64_t in = count_or(c, "tasks_in", -1);
      const std::int64_t out = count_or(c, "reports_out", -1);
      if (in < 0 || out < 0) return fail("missing counts");
      if (in != out) return fail("reports_out != tasks_in");
    } else if (entry.stage == "filter") {
      const std::int64_t in = count_or(c, "reports_in", -1);
      const std::int64_t kept = count_or(c, "kept", -1);
      const std::int64_t dropped = count_or(c, "dropped", -1);
      if (in < 0 || kept < 0 || dropped < 0) return fail("missing counts");
      if (kept + dropped != in) return fail("kept + dropped != reports_in");
    } else if (entry.stage == "stats") {
      const std::int64_t in = count_or(c, "reports_in", -1);
      const std::int64_t considered = count_or(c, "considered", -1);
      const std::int64_t excluded = count_or(c, "excluded", -1);
      if (in < 0 || considered < 0 || excluded < 0) {
        return fail("missing counts");
      }
      if (considered + excluded != in) {
        return fail("considered + excluded != reports_in");
      }
    } else if (entry.stage == "signal-check") {
      const std::int64_t groups = count_or(c, "groups", -1);
      const std::int64_t rollouts = count_or(c, "rollouts_in", -1);
      const std::int64_t out = count_or(c, "advantages_out", -1);
      if (groups < 0 || rollouts < 0 || out < 0) return fail("missing counts");
      if (out != rollouts) return fail("advantages_out != rollouts_in");
    }
  }
  return std::nullopt;
}

StageResult run_ingest(const PipelineConfig& config, const IngestArgs& args) {
  if (args.inputs.empty()) {
    throw ConfigError("ingest: at least one input file is required");
  }
  JsonlWriter out(args.out);
  std::set<std::string> seen_ids;
  LoadSummary total;
  ManifestEntry entry;
  entry.stage = "ingest";
  entry.timestamp = config.timestamp;

  for (const fs::path& input : args.inputs) {
    CorpusReader reader(input, args.domain, args.kind);
    while (auto record = reader.next()) {
      if (!seen_ids.insert(record->id).second) {
        ++total.skipped;
        ++total.skipped_by_reason["duplicate id"];
        continue;
      }
      out.write(serialize_record(*record));
      ++total.loaded;
    }
    const LoadSummary& file_summary = reader.summary();
    total.lines += file_summary.lines;
    total.skipped += file_summary.skipped;
    for (const auto& [reason, count] : file_summary.skipped_by_reason) {
      total.skipped_by_reason[reason] += count;
    }
    entry.inputs[basename_of(input)] +=
        static_cast<std::int64_t>(file_summary.lines);
  }

  entry.outputs[basename_of(args.out)] =
      static_cast<std::int64_t>(total.loaded);
  entry.counts["lines"] = static_cast<std::int64_t>(total.lines);
  entry.counts["loaded"] = static_cast<std::int64_t>(total.loaded);
  entry.counts["skipped"] = static_cast<std::int64_t>(total.skipped);
  append_stage_manifest(config, entry);

  json summary;
  summary["stage"] = "ingest";
  summary["lines"] = total.lines;
  summary["loaded"] = total.loaded;
  summary["skipped"] = total.skipped;
  summary["skipped_by_reason"] = total.skipped_by_reason;
  summary["out"] = args.out.string();
  return {entry, summary};
}

StageResult run_synthesize(const PipelineConfig& config,
                           const GenerationClient& client,
                           const SynthesizeArgs& args) {
  auto [records, load] = load_corpus(args.corpus, std::nullopt, std::nullopt);

  std::vector<SynthesisResult> results(records.size());
  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> aborted{false};
  std::mutex failure_mutex;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      if (aborted.load()) return;
      const std::size_t i = cursor.fetch_add(1);
      if (i >= records.size()) return;
      SynthesisOptions options;
      options.option_count = config.option_count;
      options.seed = static_cast<std::int64_t>(
          derive_seed(config.master_seed, "synthesize", records[i].id) >> 1);
      options.max_attempts = config.synthesis.max_attempts;
      options.temperature = config.synthesis.temperature;
      options.max_output_tokens = config.synthesis.max_output_tokens;
      options.timestamp = config.timestamp;
      try {
        results[i] = synthesize(records[i], client, options);
      } catch (...) {
        {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
        aborted.store(true);
        return;
      }
    }
  };

  const int workers = std::clamp<int>(config.synthesis.parallelism, 1,
                                      std::max<int>(1, static_cast<int>(records.size())));
  if (workers <= 1 || records.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  JsonlWriter tasks_out(args.out_tasks);
  JsonlWriter skipped_out(args.out_skipped);
  std::int64_t tasks = 0;
  std::int64_t skipped = 0;
  std::map<std::string, std::int64_t> skip_reasons;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const SynthesisResult& result = results[i];
    if (result.ok()) {
      tasks_out.write(serialize_task(result.task()));
      ++tasks;
      continue;
    }
    json line;
    line["source_id"] = records[i].id;
    line["reason"] = result.skipped().reason;
    line["attempts"] = result.attempts;
    line["warnings"] = result.warnings;
    skipped_out.write(line);
    ++skipped;
    ++skip_reasons[result.skipped().reason];
  }

  ManifestEntry entry;
  entry.stage = "synthesize";
  entry.timestamp = config.timestamp;
  entry.inputs[basename_of(args.corpus)] =
      static_cast<std::int64_t>(records.size());
  entry.outputs[basename_of(args.out_tasks)] = tasks;
  entry.outputs[basename_of(args.out_skipped)] = skipped;
  entry.counts["records_in"] = static_cast<std::int64_t>(records.size());
  entry.counts["tasks_out"] = tasks;
  entry.counts["skipped"] = skipped;
  append_stage_manifest(config, entry);

  json summary;
  summary["stage"] = "synthesize";
  summary["records_in"] = records.size();
  summary["corpus_rejected"] = load.skipped;
  summary["tasks_out"] = tasks;
  summary["skipped"] = skipped;
  summary["skipped_by_reason"] = skip_reasons;
  summary["out"] = args.out_tasks.string();
  return {entry, summary};
}

StageResult run_probe(const PipelineConfig& config,
                      const GenerationClient& client, const ProbeArgs& args) {
  const std::vector<McqTask> tasks = read_tasks_file(args.tasks);

  RolloutConfig rollout = config.rollout;
  if (args.n) rollout.n = *args.n;
  if (rollout.n < 1) throw ConfigError("probe: n must be >= 1");
  rollout.base_seed = args.seed.value_or(static_cast<std::int64_t>(
      derive_seed(config.master_seed, "probe", "base") >> 1));

  JsonlWriter out(args.out_reports);
  std::int64_t flagged = 0;
  std::map<std::string, std::int64_t> buckets;
  for (const McqTask& task : tasks) {
    const RolloutReport report = probe_task(task, client, rollout);
    if (report.excluded_from_stats) ++flagged;
    ++buckets[std::string(to_string(report.bucket))];
    out.write(serialize_report(report));
  }

  ManifestEntry entry;
  entry.stage = "probe";
  entry.timestamp = config.timestamp;
  entry.inputs[basename_of(args.tasks)] =
      static_cast<std::int64_t>(tasks.size());
  entry.outputs[basename_of(args.out_reports)] =
      static_cast<std::int64_t>(tasks.size());
  entry.counts["tasks_in"] = static_cast<std::int64_t>(tasks.size());
  entry.counts["reports_out"] = static_cast<std::int64_t>(tasks.size());
  entry.counts["flagged"] = flagged;
  append_stage_manifest(config, entry);

  json summary;
  summary["stage"] = "probe";
  summary["tasks_in"] = tasks.size();
  summary["n"] = rollout.n;
  summary["base_seed"] = rollout.base_seed;
  summary["buckets"] = buckets;
  summary["flagged"] = flagged;
  summary["out"] = args.out_reports.string();
  return {entry, summary};
}

StageResult run_filter(const PipelineConfig& config, const FilterArgs& args) {
  const std::vector<RolloutReport> reports = read_reports_file(args.reports);

  const std::optional<std::set<Bucket>> drop =
      args.drop ? args.drop : config.filter_drop;
  JsonlWriter out(args.out);
  std::int64_t kept = 0;
  std::map<std::string, std::int64_t> dropped_by_bucket;
  for (const RolloutReport& report : reports) {
    bool keep = true;
    if (drop) {
      keep = drop->count(report.bucket) == 0;
    } else {
      // Domain default: saturated tasks from noisy-source synthesis carry
      // no signal; reasoning-domain reports pass through untouched.
      keep = !(report.domain == Domain::cyber && report.bucket == Bucket::easy);
    }
    if (keep) {
      out.write(serialize_report(report));
      ++kept;
    } else {
      ++dropped_by_bucket[std::string(to_string(report.bucket))];
    }
  }
  const std::int64_t dropped = static_cast<std::int64_t>(reports.size()) - kept;

  ManifestEntry entry;
  entry.stage = "filter";
  entry.timestamp = config.timestamp;
  entry.inputs[basename_of(args.reports)] =
      static_cast<std::int64_t>(reports.size());
  entry.outputs[basename_of(args.out)] = kept;
  entry.counts["reports_in"] = static_cast<std::int64_t>(reports.size());
  entry.counts["kept"] = kept;
  entry.counts["dropped"] = dropped;
  append_stage_manifest(config, entry);

  json summary;
  summary["stage"] = "filter";
  summary["reports_in"] = reports.size();
  if (drop) {
    std::vector<std::string> names;
    for (Bucket bucket : *drop) names.push_back(std::string(to_string(bucket)));
    summary["drop"] = names;
  } else {
    summary["drop"] = "easy (cyber only, default)";
  }
  summary["kept"] = kept;
  summary["dropped"] = dropped;
  summary["dropped_by_bucket"] = dropped_by_bucket;
  summary["out"] = args.out.string();
  return {entry, summary};
}

StageResult run_stats(const PipelineConfig& config, const StatsArgs& args) {
  const std::vector<RolloutReport> reports = read_reports_file(args.reports);
  const int bins = args.bins.value_or(config.stats_bins);
  if (bins < 1) throw ConfigError("stats: bins must be >= 1");

  const ProbeStats stats = compute_stats(reports, bins);

  json doc;
  doc["bins"] = bins;
  doc["total"] = stats.total;
  doc["excluded"] = stats.excluded;
  doc["easy"] = stats.easy;
  doc["effective"] = stats.effective;
  doc["stale"] = stats.stale;
  doc["effectiveness"] = stats.effectiveness;
  doc["histogram"] = stats.histogram;
  {
    if (args.out.has_parent_path()) {
      std::filesystem::create_directories(args.out.parent_path());
    }
    std::ofstream out(args.out, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open output file: " +
                               args.out.string());
    }
    out << doc.dump(2) << '\n';
  }

  ManifestEntry entry;
  entry.stage = "stats";
  entry.timestamp = config.timestamp;
  entry.inputs[basename_of(args.reports)] =
      static_cast<std::int64_t>(reports.size());
  entry.outputs[basename_of(args.out)] = 1;
  entry.counts["reports_in"] = static_cast<std::int64_t>(reports.size());
  entry.counts["considered"] = static_cast<std::int64_t>(stats.total);
  entry.counts["excluded"] = static_cast<std::int64_t>(stats.excluded);
  append_stage_manifest(config, entry);

  json summary = doc;
  summary["stage"] = "stats";
  summary["out"] = args.out.string();
  return {entry, summary};
}

StageResult run_signal_check(const PipelineConfig& config,
                             const SignalCheckArgs& args) {
  const std::vector<RolloutReport> reports = read_reports_file(args.reports);

  std::vector<RewardGroup> groups;
  groups.reserve(reports.size());
  std::int64_t rollouts_in = 0;
  for (const RolloutReport& report : reports) {
    RewardGroup group;
    group.prompt_id = report.task_id;
    group.rewards.reserve(report.rollouts.size());
    for (const RolloutRecord& record : report.rollouts) {
      group.rewards.push_back(static_cast<double>(record.reward));
    }
    rollouts_in += static_cast<std::int64_t>(group.rewards.size());
    groups.push_back(std::move(group));
  }

  JsonlWriter out(args.out);
  json summary;
  summary["stage"] = "signal-check";
  summary["groups"] = groups.size();
  summary["rollouts"] = rollouts_in;
  std::int64_t advantages_out = 0;
  if (groups.empty()) {
    summary["batch_mean"] = 0.0;
    summary["batch_std"] = 0.0;
    summary["degenerate"] = true;
  } else {
    const AdvantageBatch batch = compute_advantages(groups);
    for (const AdvantageEntry& advantage : batch.entries) {
      json line;
      line["prompt_id"] = advantage.prompt_id;
      line["rollout_index"] = advantage.rollout_index;
      line["advantage"] = advantage.advantage;
      out.write(line);
      ++advantages_out;
    }
    summary["batch_mean"] = batch.batch_mean;
    summary["batch_std"] = batch.batch_std;
    summary["degenerate"] = batch.degenerate;
  }
  summary["out"] = args.out.string();

  ManifestEntry entry;
  entry.stage = "signal-check";
  entry.timestamp = config.timestamp;
  entry.inputs[basename_of(args.reports)] =
      static_cast<std::int64_t>(reports.size());
  entry.outputs[basename_of(args.out)] = advantages_out;
  entry.counts["groups"] = static_cast<std::int64_t>(groups.size());
  entry.counts["rollouts_in"] = rollouts_in;
  entry.counts["advantages_out"] = advantages_out;
  append_stage_manifest(config, entry);

  return {entry, summary};
}

std::vector<StageResult> run_all(const PipelineConfig& config,
                                 const GenerationClient& generator,
                                 const GenerationClient& student,
                                 const IngestArgs& ingest) {
  const fs::path workdir = config.workdir;
  std::filesystem::create_directories(workdir);
  // A full run owns its manifest; stale entries from earlier runs would
  // break the conservation audit and rerun reproducibility.
  std::filesystem::remove(workdir / kManifestFile);

  IngestArgs ingest_args = ingest;
  if (ingest_args.out.empty()) ingest_args.out = workdir / kCorpusFile;

  std::vector<StageResult> results;
  results.push_back(run_ingest(config, ingest_args));
  results.push_back(run_synthesize(
      config, generator,
      {ingest_args.out, workdir / kTasksFile, workdir / kSkippedFile}));
  results.push_back(run_probe(
      config, student,
      {workdir / kTasksFile, workdir / kReportsFile, std::nullopt,
       std::nullopt}));
  results.push_back(run_filter(
      config, {workdir / kReportsFile, workdir / kKeptFile, std::nullopt}));
  results.push_back(run_stats(
      config, {workdir / kReportsFile, workdir / kStatsFile, std::nullopt}));
  results.push_back(run_signal_check(
      config, {workdir / kKeptFile, workdir / kAdvantagesFile}));
  return results;
}

}  // namespace mcqpipe
