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
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mcqpipe/config.hpp"
#include "mcqpipe/generation_client.hpp"
#include "mcqpipe/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using namespace mcqpipe;

constexpr const char* kVersion = "mcqpipe 0.1.0";

void require_service(const ClientConfig& client, const char* section) {
  if (client.base_url.empty()) {
    throw ConfigError(std::string(section) +
                      ".base_url is required for this command; set it in the "
                      "config file passed via --config");
  }
}

std::optional<Domain> domain_flag(const CLI::App* cmd,
                                  const std::string& value) {
  if (cmd->count("--domain") == 0) return std::nullopt;
  const auto domain = domain_from_string(value);
  if (!domain) {
    throw ConfigError("unknown domain '" + value +
                      "' (expected math, code, stem, or cyber)");
  }
  return domain;
}

std::optional<RecordKind> kind_flag(const CLI::App* cmd,
                                    const std::string& value) {
  if (cmd->count("--kind") == 0) return std::nullopt;
  const auto kind = kind_from_string(value);
  if (!kind) {
    throw ConfigError("unknown kind '" + value +
                      "' (expected qa_pair or raw_document)");
  }
  return kind;
}

void print_result(const StageResult& result) {
  std::cout << result.summary.dump(2) << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Converts reasoning corpora into verifiable multiple-choice "
      "fill-in-the-middle tasks, probes their difficulty with student "
      "rollouts, and turns rollout rewards into training advantages."};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("-c,--config", config_path,
                 "TOML config file; omitting it uses built-in defaults")
      ->check(CLI::ExistingFile);
  std::string workdir_override;
  app.add_option("--workdir", workdir_override,
                 "Working directory override (default from config: out)");

  auto* ingest_cmd = app.add_subcommand(
      "ingest", "Validate raw corpora into one clean JSONL file");
  std::vector<std::string> ingest_inputs;
  std::string ingest_domain;
  std::string ingest_kind;
  std::string ingest_out;
  ingest_cmd->add_option("--input", ingest_inputs, "Input JSONL file(s)")
      ->required()
      ->check(CLI::ExistingFile);
  ingest_cmd->add_option("--domain", ingest_domain,
                         "Default domain for records missing the field "
                         "(math|code|stem|cyber)");
  ingest_cmd->add_option("--kind", ingest_kind,
                         "Default kind for records missing the field "
                         "(qa_pair|raw_document)");
  ingest_cmd->add_option("--out", ingest_out,
                         "Output path (default <workdir>/corpus.jsonl)");

  auto* synth_cmd = app.add_subcommand(
      "synthesize",
      "Generate one multiple-choice task per record via the generator "
      "service");
  std::string synth_corpus;
  std::string synth_tasks;
  std::string synth_skipped;
  synth_cmd->add_option("--corpus", synth_corpus,
                        "Corpus path (default <workdir>/corpus.jsonl)");
  synth_cmd->add_option("--tasks", synth_tasks,
                        "Tasks output (default <workdir>/tasks.jsonl)");
  synth_cmd->add_option("--skipped", synth_skipped,
                        "Skip log output (default <workdir>/skipped.jsonl)");

  auto* probe_cmd = app.add_subcommand(
      "probe", "Estimate task difficulty with repeated student rollouts");
  std::string probe_tasks;
  std::string probe_reports;
  int probe_n = 0;
  std::int64_t probe_seed = 0;
  probe_cmd->add_option("--tasks", probe_tasks,
                        "Tasks path (default <workdir>/tasks.jsonl)");
  probe_cmd->add_option("--reports", probe_reports,
                        "Reports output (default <workdir>/reports.jsonl)");
  probe_cmd->add_option("--n", probe_n,
                        "Rollouts per task (default from config: 16)")
      ->check(CLI::PositiveNumber);
  probe_cmd->add_option("--seed", probe_seed,
                        "Base seed; rollout i uses seed + i (default derived "
                        "from the master seed)");

  auto* filter_cmd = app.add_subcommand(
      "filter", "Drop difficulty buckets from probe reports");
  std::string filter_reports;
  std::string filter_out;
  std::string filter_drop;
  filter_cmd->add_option("--reports", filter_reports,
                         "Reports path (default <workdir>/reports.jsonl)");
  filter_cmd->add_option("--out", filter_out,
                         "Kept-reports output (default <workdir>/kept.jsonl)");
  filter_cmd->add_option(
      "--drop", filter_drop,
      "Comma-separated buckets to drop, e.g. easy or easy,stale "
      "(default: drop easy from cyber tasks only)");

  auto* stats_cmd = app.add_subcommand(
      "stats",
      "Aggregate reports into bucket counts, effectiveness ratio, and an "
      "accuracy histogram");
  std::string stats_reports;
  std::string stats_out;
  int stats_bins = 0;
  stats_cmd->add_option("--reports", stats_reports,
                        "Reports path (default <workdir>/reports.jsonl)");
  stats_cmd->add_option("--out", stats_out,
                        "Stats output (default <workdir>/stats.json)");
  stats_cmd->add_option("--bins", stats_bins,
                        "Histogram bins (default from config: 17)")
      ->check(CLI::PositiveNumber);

  auto* signal_cmd = app.add_subcommand(
      "signal-check",
      "Convert rollout rewards into trainer-ready advantages");
  std::string signal_reports;
  std::string signal_out;
  signal_cmd->add_option("--reports", signal_reports,
                         "Reports path (default <workdir>/kept.jsonl)");
  signal_cmd->add_option(
      "--out", signal_out,
      "Advantages output (default <workdir>/advantages.jsonl)");

  auto* all_cmd = app.add_subcommand(
      "run-all",
      "Run the full pipeline: ingest, synthesize, probe, filter, stats, "
      "signal-check");
  std::vector<std::string> all_inputs;
  std::string all_domain;
  std::string all_kind;
  all_cmd->add_option("--input", all_inputs, "Input JSONL file(s)")
      ->required()
      ->check(CLI::ExistingFile);
  all_cmd->add_option("--domain", all_domain,
                      "Default domain for records missing the field");
  all_cmd->add_option("--kind", all_kind,
                      "Default kind for records missing the field");

  CLI11_PARSE(app, argc, argv);

  try {
    PipelineConfig config =
        config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (!workdir_override.empty()) config.workdir = workdir_override;
    for (const std::string& warning : config.warnings) {
      std::cerr << "warning: " << warning << "\n";
    }
    const fs::path workdir = config.workdir;
    const auto or_default = [&](const std::string& value,
                                const char* name) -> fs::path {
      return value.empty() ? workdir / name : fs::path(value);
    };

    if (*ingest_cmd) {
      IngestArgs args;
      for (const std::string& input : ingest_inputs) {
        args.inputs.emplace_back(input);
      }
      args.domain = domain_flag(ingest_cmd, ingest_domain);
      args.kind = kind_flag(ingest_cmd, ingest_kind);
      args.out = or_default(ingest_out, kCorpusFile);
      print_result(run_ingest(config, args));
    } else if (*synth_cmd) {
      require_service(config.generator, "generator");
      HttpGenerationClient client(config.generator);
      print_result(run_synthesize(
          config, client,
          {or_default(synth_corpus, kCorpusFile),
           or_default(synth_tasks, kTasksFile),
           or_default(synth_skipped, kSkippedFile)}));
    } else if (*probe_cmd) {
      require_service(config.student, "student");
      HttpGenerationClient client(config.student);
      ProbeArgs args;
      args.tasks = or_default(probe_tasks, kTasksFile);
      args.out_reports = or_default(probe_reports, kReportsFile);
      if (probe_cmd->count("--n") > 0) args.n = probe_n;
      if (probe_cmd->count("--seed") > 0) args.seed = probe_seed;
      print_result(run_probe(config, client, args));
    } else if (*filter_cmd) {
      FilterArgs args;
      args.reports = or_default(filter_reports, kReportsFile);
      args.out = or_default(filter_out, kKeptFile);
      if (filter_cmd->count("--drop") > 0) {
        args.drop = parse_drop_list(filter_drop);
      }
      print_result(run_filter(config, args));
    } else if (*stats_cmd) {
      StatsArgs args;
      args.reports = or_default(stats_reports, kReportsFile);
      args.out = or_default(stats_out, kStatsFile);
      if (stats_cmd->count("--bins") > 0) args.bins = stats_bins;
      print_result(run_stats(config, args));
    } else if (*signal_cmd) {
      SignalCheckArgs args;
      args.reports = or_default(signal_reports, kKeptFile);
      args.out = or_default(signal_out, kAdvantagesFile);
      print_result(run_signal_check(config, args));
    } else if (*all_cmd) {
      require_service(config.generator, "generator");
      require_service(config.student, "student");
      HttpGenerationClient generator(config.generator);
      HttpGenerationClient student(config.student);
      IngestArgs args;
      for (const std::string& input : all_inputs) {
        args.inputs.emplace_back(input);
      }
      args.domain = domain_flag(all_cmd, all_domain);
      args.kind = kind_flag(all_cmd, all_kind);
      const std::vector<StageResult> results =
          run_all(config, generator, student, args);
      json summaries = json::array();
      for (const StageResult& result : results) {
        summaries.push_back(result.summary);
      }
      std::cout << summaries.dump(2) << std::endl;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
