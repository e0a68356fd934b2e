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

#include <string>
#include <vector>

#include "doctest.h"
#include "mcqpipe/mockllm.hpp"
#include "test_util.hpp"

using namespace mcqpipe;
using mcqpipe::testing::TempDir;
using mcqpipe::testing::read_file;
using mcqpipe::testing::write_file;

namespace {

std::string corpus_line(const std::string& id, Domain domain,
                        const std::string& marker = "") {
  SourceRecord r;
  r.id = id;
  r.domain = domain;
  if (domain == Domain::cyber) {
    r.kind = RecordKind::raw_document;
    r.document = "Notes on sandbox escapes. " + marker;
  } else {
    r.kind = RecordKind::qa_pair;
    r.question = "Question for " + id + ". " + marker;
    r.solution = "Solution for " + id + " with several steps.";
  }
  return serialize_record(r).dump() + "\n";
}

PipelineConfig test_config(const std::filesystem::path& workdir) {
  PipelineConfig config;
  config.workdir = workdir;
  config.master_seed = 7;
  config.rollout.n = 8;
  config.rollout.parallelism = 2;
  config.synthesis.parallelism = 2;
  return config;
}

std::size_t count_lines(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  std::size_t lines = 0;
  for (char c : content) {
    if (c == '\n') ++lines;
  }
  return lines;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("manifest entries round trip") {
  ManifestEntry entry;
  entry.stage = "synthesize";
  entry.timestamp = "";
  entry.inputs["corpus.jsonl"] = 10;
  entry.outputs["tasks.jsonl"] = 8;
  entry.outputs["skipped.jsonl"] = 2;
  entry.counts["records_in"] = 10;
  entry.counts["tasks_out"] = 8;
  entry.counts["skipped"] = 2;

  const json doc = serialize_manifest_entry(entry);
  const ManifestEntry back = manifest_entry_from_json(doc);
  CHECK(back.stage == entry.stage);
  CHECK(back.inputs == entry.inputs);
  CHECK(back.outputs == entry.outputs);
  CHECK(back.counts == entry.counts);

  TempDir dir;
  const auto path = dir / "manifest.jsonl";
  append_manifest_entry(path, entry);
  append_manifest_entry(path, entry);
  const auto entries = read_manifest(path);
  REQUIRE(entries.size() == 2);
  CHECK(entries[1].counts.at("records_in") == 10);
}

TEST_CASE("conservation checking catches leaks") {
  ManifestEntry ok;
  ok.stage = "synthesize";
  ok.counts["records_in"] = 10;
  ok.counts["tasks_out"] = 8;
  ok.counts["skipped"] = 2;
  CHECK_FALSE(manifest_conservation_error({ok}).has_value());

  ManifestEntry leak = ok;
  leak.counts["tasks_out"] = 7;  // one record vanished
  const auto violation = manifest_conservation_error({leak});
  REQUIRE(violation.has_value());
  CHECK(violation->find("synthesize") != std::string::npos);

  ManifestEntry ingest;
  ingest.stage = "ingest";
  ingest.counts["lines"] = 5;
  ingest.counts["loaded"] = 3;
  ingest.counts["skipped"] = 1;  // where did the fifth line go?
  CHECK(manifest_conservation_error({ingest}).has_value());
}

TEST_CASE("ingest validates, dedups across files, and counts") {
  TempDir dir;
  write_file(dir / "a.jsonl", corpus_line("r1", Domain::math) +
                                  corpus_line("r2", Domain::math) +
                                  "garbage\n");
  write_file(dir / "b.jsonl", corpus_line("r2", Domain::math) +
                                  corpus_line("r3", Domain::math));

  const PipelineConfig config = test_config(dir / "out");
  IngestArgs args;
  args.inputs = {dir / "a.jsonl", dir / "b.jsonl"};
  args.out = dir / "out" / "corpus.jsonl";
  const StageResult result = run_ingest(config, args);

  CHECK(count_lines(args.out) == 3);  // r1, r2, r3
  CHECK(result.manifest.counts.at("lines") == 5);
  CHECK(result.manifest.counts.at("loaded") == 3);
  CHECK(result.manifest.counts.at("skipped") == 2);
  CHECK_FALSE(
      manifest_conservation_error(read_manifest(dir / "out" / "manifest.jsonl"))
          .has_value());
}

TEST_CASE("full in-process run balances and filters by domain default") {
  TempDir dir;
  // Default student behavior answers correctly always: every task is easy.
  // The default filter drops easy cyber tasks only.
  write_file(dir / "corpus.jsonl",
             corpus_line("m1", Domain::math) + corpus_line("m2", Domain::math) +
                 corpus_line("c1", Domain::cyber) +
                 corpus_line("c2", Domain::cyber, "[[empty]]") +
                 corpus_line("k1", Domain::code));

  const PipelineConfig config = test_config(dir / "out");
  ScriptedClient generator;
  ScriptedClient student;
  IngestArgs ingest;
  ingest.inputs = {dir / "corpus.jsonl"};

  const std::vector<StageResult> results =
      run_all(config, generator, student, ingest);
  REQUIRE(results.size() == 6);

  const auto workdir = dir / "out";
  CHECK(count_lines(workdir / kCorpusFile) == 5);
  CHECK(count_lines(workdir / kTasksFile) == 4);    // c2 skipped
  CHECK(count_lines(workdir / kSkippedFile) == 1);
  CHECK(count_lines(workdir / kReportsFile) == 4);
  CHECK(count_lines(workdir / kKeptFile) == 3);     // c1 easy+cyber dropped
  CHECK(count_lines(workdir / kAdvantagesFile) == 3 * 8);

  const auto manifest = read_manifest(workdir / kManifestFile);
  CHECK(manifest.size() == 6);
  CHECK_FALSE(manifest_conservation_error(manifest).has_value());

  // The skip reason is recorded, not discarded.
  const std::string skipped = read_file(workdir / kSkippedFile);
  CHECK(skipped.find("\"source_id\":\"c2\"") != std::string::npos);
  CHECK(skipped.find("no educational passage") != std::string::npos);

  // Stats cover the pre-filter reports.
  const json stats = json::parse(read_file(workdir / kStatsFile));
  CHECK(stats["total"] == 4);
  CHECK(stats["easy"] == 4);
  CHECK(stats["effectiveness"] == doctest::Approx(0.0));
}

TEST_CASE("reruns are byte-identical, including across workdirs") {
  TempDir dir;
  write_file(dir / "corpus.jsonl",
             corpus_line("m1", Domain::math) + corpus_line("m2", Domain::stem) +
                 corpus_line("c1", Domain::cyber));

  ScriptedClient generator;
  ScriptedClient student;
  IngestArgs ingest;
  ingest.inputs = {dir / "corpus.jsonl"};

  const PipelineConfig config_a = test_config(dir / "a");
  (void)run_all(config_a, generator, student, ingest);
  // A second run into the same workdir, then a third into a fresh one.
  (void)run_all(config_a, generator, student, ingest);
  const PipelineConfig config_b = test_config(dir / "deeper" / "b");
  (void)run_all(config_b, generator, student, ingest);

  for (const char* name :
       {kCorpusFile, kTasksFile, kSkippedFile, kReportsFile, kKeptFile,
        kStatsFile, kAdvantagesFile, kManifestFile}) {
    CAPTURE(name);
    CHECK(read_file(dir / "a" / name) ==
          read_file(dir / "deeper" / "b" / name));
  }
}

TEST_CASE("probe honors an explicit base seed and n") {
  TempDir dir;
  write_file(dir / "corpus.jsonl", corpus_line("m1", Domain::math));
  const PipelineConfig config = test_config(dir / "out");
  ScriptedClient client;

  IngestArgs ingest;
  ingest.inputs = {dir / "corpus.jsonl"};
  ingest.out = dir / "out" / "corpus.jsonl";
  (void)run_ingest(config, ingest);
  SynthesizeArgs synth;
  synth.corpus = dir / "out" / "corpus.jsonl";
  synth.out_tasks = dir / "out" / "tasks.jsonl";
  synth.out_skipped = dir / "out" / "skipped.jsonl";
  (void)run_synthesize(config, client, synth);

  ProbeArgs probe;
  probe.tasks = dir / "out" / "tasks.jsonl";
  probe.out_reports = dir / "out" / "reports.jsonl";
  probe.n = 4;
  probe.seed = 12345;
  (void)run_probe(config, client, probe);

  const std::string reports = read_file(dir / "out" / "reports.jsonl");
  const json report = json::parse(reports.substr(0, reports.find('\n')));
  CHECK(report["n"] == 4);
  CHECK(report["base_seed"] == 12345);
  CHECK(report["rollouts"][0]["seed"] == 12345);
  CHECK(report["rollouts"][3]["seed"] == 12348);
}

TEST_CASE("filter stage respects explicit drop sets") {
  TempDir dir;
  write_file(dir / "corpus.jsonl",
             corpus_line("m1", Domain::math) +
                 corpus_line("m2", Domain::math, "[[acc=4/8]]") +
                 corpus_line("m3", Domain::math, "[[acc=0/8]]"));
  const PipelineConfig config = test_config(dir / "out");
  ScriptedClient client;
  IngestArgs ingest;
  ingest.inputs = {dir / "corpus.jsonl"};
  (void)run_all(config, client, client, ingest);

  // m1 easy, m2 effective, m3 stale. Default config (math) drops nothing.
  CHECK(count_lines(dir / "out" / kKeptFile) == 3);

  FilterArgs filter;
  filter.reports = dir / "out" / kReportsFile;
  filter.out = dir / "out" / "narrow.jsonl";
  filter.drop = std::set<Bucket>{Bucket::easy, Bucket::stale};
  const StageResult result = run_filter(config, filter);
  CHECK(count_lines(dir / "out" / "narrow.jsonl") == 1);
  CHECK(result.manifest.counts.at("kept") == 1);
  CHECK(result.manifest.counts.at("dropped") == 2);
}

TEST_CASE("signal-check emits one advantage per rollout") {
  TempDir dir;
  write_file(dir / "corpus.jsonl",
             corpus_line("m1", Domain::math, "[[acc=4/8]]") +
                 corpus_line("m2", Domain::math, "[[acc=6/8]]"));
  const PipelineConfig config = test_config(dir / "out");
  ScriptedClient client;
  IngestArgs ingest;
  ingest.inputs = {dir / "corpus.jsonl"};
  (void)run_all(config, client, client, ingest);

  const std::string advantages = read_file(dir / "out" / kAdvantagesFile);
  std::vector<json> lines;
  std::size_t pos = 0;
  while (pos < advantages.size()) {
    const std::size_t end = advantages.find('\n', pos);
    lines.push_back(json::parse(advantages.substr(pos, end - pos)));
    pos = end + 1;
  }
  REQUIRE(lines.size() == 16);
  double sum = 0.0;
  for (const json& line : lines) {
    CHECK(line.contains("prompt_id"));
    CHECK(line.contains("rollout_index"));
    sum += line["advantage"].get<double>();
  }
  CHECK(std::abs(sum) < 1e-9);
}

TEST_CASE("empty reports produce a degenerate signal summary, not a crash") {
  TempDir dir;
  const PipelineConfig config = test_config(dir / "out");
  write_file(dir / "out" / "kept.jsonl", "");
  SignalCheckArgs args;
  args.reports = dir / "out" / "kept.jsonl";
  args.out = dir / "out" / "advantages.jsonl";
  const StageResult result = run_signal_check(config, args);
  CHECK(count_lines(dir / "out" / "advantages.jsonl") == 0);
  CHECK(result.summary.contains("degenerate"));
}

TEST_CASE("stats stage writes into a fresh directory") {
  TempDir dir;
  write_file(dir / "corpus.jsonl", corpus_line("m1", Domain::math));
  const PipelineConfig config = test_config(dir / "out");
  ScriptedClient client;
  IngestArgs ingest;
  ingest.inputs = {dir / "corpus.jsonl"};
  (void)run_all(config, client, client, ingest);

  StatsArgs stats;
  stats.reports = dir / "out" / kReportsFile;
  stats.out = dir / "elsewhere" / "stats.json";
  stats.bins = 9;
  (void)run_stats(config, stats);
  const json doc = json::parse(read_file(dir / "elsewhere" / "stats.json"));
  CHECK(doc["bins"] == 9);
  REQUIRE(doc["histogram"].is_array());
  CHECK(doc["histogram"].size() == 9);
}

TEST_CASE("transport-fatal synthesis aborts the stage") {
  TempDir dir;
  write_file(dir / "corpus.jsonl",
             corpus_line("m1", Domain::math, "[[fail500=99]]"));
  const PipelineConfig config = test_config(dir / "out");
  ScriptedClient client;
  IngestArgs ingest;
  ingest.inputs = {dir / "corpus.jsonl"};
  ingest.out = dir / "out" / "corpus.jsonl";
  (void)run_ingest(config, ingest);
  SynthesizeArgs synth;
  synth.corpus = dir / "out" / "corpus.jsonl";
  synth.out_tasks = dir / "out" / "tasks.jsonl";
  synth.out_skipped = dir / "out" / "skipped.jsonl";
  CHECK_THROWS_AS((void)run_synthesize(config, client, synth),
                  TransportError);
}

}  // TEST_SUITE
