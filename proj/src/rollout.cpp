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
#include "mcqpipe/rollout.hpp"

#include <algorithm>
#include <stdexcept>

namespace mcqpipe {

std::string_view to_string(Bucket bucket) {
  switch (bucket) {
    case Bucket::easy: return "easy";
    case Bucket::effective: return "effective";
    case Bucket::stale: return "stale";
  }
  return "stale";
}

std::optional<Bucket> bucket_from_string(std::string_view s) {
  if (s == "easy") return Bucket::easy;
  if (s == "effective") return Bucket::effective;
  if (s == "stale") return Bucket::stale;
  return std::nullopt;
}

Bucket classify(std::int64_t successes, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("classify: n must be >= 1");
  if (successes < 0 || successes > n) {
    throw std::invalid_argument("classify: successes outside [0, n]");
  }
  if (successes == n) return Bucket::easy;
  if (successes == 0) return Bucket::stale;
  return Bucket::effective;
}

RolloutReport probe_task(const McqTask& task, const GenerationClient& client,
                         const RolloutConfig& config) {
  if (config.n < 1) throw std::invalid_argument("probe_task: n must be >= 1");
  if (auto violation = validate_task(task)) {
    throw std::invalid_argument("probe_task: task invalid: " + *violation);
  }

  const std::string prompt = format_question(task);
  std::vector<GenerationRequest> requests(static_cast<std::size_t>(config.n));
  for (int i = 0; i < config.n; ++i) {
    requests[static_cast<std::size_t>(i)] = GenerationRequest{
        prompt, config.temperature, config.max_tokens, config.base_seed + i};
  }
  const std::vector<GenerationOutcome> outcomes =
      client.generate_batch(requests, config.parallelism);

  RolloutReport report;
  report.task_id = task.task_id;
  report.domain = task.domain;
  report.n = config.n;
  report.rule_version = kExtractionRuleVersion;
  report.base_seed = config.base_seed;
  report.rollouts.reserve(outcomes.size());
  for (int i = 0; i < config.n; ++i) {
    const GenerationOutcome& outcome = outcomes[static_cast<std::size_t>(i)];
    RolloutRecord record;
    record.rollout_index = i;
    record.seed = config.base_seed + i;
    if (!outcome.ok()) {
      record.error = outcome.error_kind + ": " + outcome.error;
      ++report.error_count;
    } else if (outcome.response->finish_reason == FinishReason::error) {
      record.error = "transport: generation finished in error state";
      ++report.error_count;
    } else {
      const Verdict verdict = score(task, outcome.response->text);
      record.reward = verdict.reward;
      record.chosen_label = verdict.chosen_label;
      record.extraction_rule = verdict.extraction_rule;
      report.successes += verdict.reward;
    }
    report.rollouts.push_back(std::move(record));
  }
  report.accuracy = Rational{report.successes, report.n};
  report.bucket = classify(report.successes, report.n);
  report.excluded_from_stats = 4 * report.error_count > report.n;
  return report;
}

std::vector<RolloutReport> filter_reports(
    const std::vector<RolloutReport>& reports, const std::set<Bucket>& drop) {
  std::vector<RolloutReport> kept;
  kept.reserve(reports.size());
  for (const RolloutReport& report : reports) {
    if (drop.count(report.bucket) == 0) kept.push_back(report);
  }
  return kept;
}

std::vector<RolloutReport> filter_easy(
    const std::vector<RolloutReport>& reports) {
  return filter_reports(reports, {Bucket::easy});
}

double effectiveness_ratio(const std::vector<RolloutReport>& reports,
                           bool include_flagged) {
  std::size_t considered = 0;
  std::size_t effective = 0;
  for (const RolloutReport& report : reports) {
    if (report.excluded_from_stats && !include_flagged) continue;
    ++considered;
    if (report.bucket == Bucket::effective) ++effective;
  }
  if (considered == 0) return 0.0;
  return static_cast<double>(effective) / static_cast<double>(considered);
}

std::vector<std::size_t> accuracy_histogram(
    const std::vector<RolloutReport>& reports, int bins,
    bool include_flagged) {
  if (bins < 1) {
    throw std::invalid_argument("accuracy_histogram: bins must be >= 1");
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (const RolloutReport& report : reports) {
    if (report.excluded_from_stats && !include_flagged) continue;
    if (report.n < 1) {
      throw std::invalid_argument("accuracy_histogram: report with n < 1");
    }
    const std::int64_t raw = report.successes * bins / report.n;
    const std::int64_t bin = std::min<std::int64_t>(raw, bins - 1);
    ++counts[static_cast<std::size_t>(bin)];
  }
  return counts;
}

ProbeStats compute_stats(const std::vector<RolloutReport>& reports, int bins,
                         bool include_flagged) {
  ProbeStats stats;
  stats.histogram = accuracy_histogram(reports, bins, include_flagged);
  for (const RolloutReport& report : reports) {
    if (report.excluded_from_stats && !include_flagged) {
      ++stats.excluded;
      continue;
    }
    ++stats.total;
    switch (report.bucket) {
      case Bucket::easy: ++stats.easy; break;
      case Bucket::effective: ++stats.effective; break;
      case Bucket::stale: ++stats.stale; break;
    }
  }
  stats.effectiveness =
      stats.total == 0
          ? 0.0
          : static_cast<double>(stats.effective) /
                static_cast<double>(stats.total);
  return stats;
}

json serialize_report(const RolloutReport& report) {
  json doc;
  doc["task_id"] = report.task_id;
  doc["domain"] = std::string(to_string(report.domain));
  doc["n"] = report.n;
  doc["successes"] = report.successes;
  doc["error_count"] = report.error_count;
  doc["accuracy"] = json{{"num", report.accuracy.num},
                         {"den", report.accuracy.den}};
  doc["bucket"] = std::string(to_string(report.bucket));
  doc["excluded_from_stats"] = report.excluded_from_stats;
  doc["rule_version"] = report.rule_version;
  doc["base_seed"] = report.base_seed;
  json rollouts = json::array();
  for (const RolloutRecord& record : report.rollouts) {
    json entry;
    entry["rollout_index"] = record.rollout_index;
    entry["seed"] = record.seed;
    entry["reward"] = record.reward;
    if (record.chosen_label) {
      entry["chosen_label"] = std::string(1, *record.chosen_label);
    } else {
      entry["chosen_label"] = nullptr;
    }
    entry["extraction_rule"] = std::string(to_string(record.extraction_rule));
    if (!record.error.empty()) entry["error"] = record.error;
    rollouts.push_back(std::move(entry));
  }
  doc["rollouts"] = std::move(rollouts);
  return doc;
}

namespace {

constexpr const char* kContext = "rollout report";

const json& require_field(const json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end()) {
    throw std::runtime_error(std::string(kContext) + ": missing field '" +
                             name + "'");
  }
  return *it;
}

std::string require_string(const json& doc, const char* name) {
  const json& value = require_field(doc, name);
  if (!value.is_string()) {
    throw std::runtime_error(std::string(kContext) + ": field '" + name +
                             "' must be a string");
  }
  return value.get<std::string>();
}

std::int64_t require_int(const json& doc, const char* name) {
  const json& value = require_field(doc, name);
  if (!value.is_number_integer()) {
    throw std::runtime_error(std::string(kContext) + ": field '" + name +
                             "' must be an integer");
  }
  return value.get<std::int64_t>();
}

}  // namespace

RolloutReport report_from_json(const json& doc) {
  if (!doc.is_object()) {
    throw std::runtime_error(std::string(kContext) + ": not a JSON object");
  }
  RolloutReport report;
  report.task_id = require_string(doc, "task_id");
  const std::string domain = require_string(doc, "domain");
  const auto parsed_domain = domain_from_string(domain);
  if (!parsed_domain) {
    throw std::runtime_error(std::string(kContext) + ": unknown domain '" +
                             domain + "'");
  }
  report.domain = *parsed_domain;
  report.n = require_int(doc, "n");
  report.successes = require_int(doc, "successes");
  report.error_count = require_int(doc, "error_count");
  const json& accuracy = require_field(doc, "accuracy");
  if (!accuracy.is_object()) {
    throw std::runtime_error(std::string(kContext) +
                             ": field 'accuracy' must be an object");
  }
  report.accuracy.num = require_int(accuracy, "num");
  report.accuracy.den = require_int(accuracy, "den");
  const std::string bucket = require_string(doc, "bucket");
  const auto parsed_bucket = bucket_from_string(bucket);
  if (!parsed_bucket) {
    throw std::runtime_error(std::string(kContext) + ": unknown bucket '" +
                             bucket + "'");
  }
  report.bucket = *parsed_bucket;
  const json& excluded = require_field(doc, "excluded_from_stats");
  if (!excluded.is_boolean()) {
    throw std::runtime_error(std::string(kContext) +
                             ": field 'excluded_from_stats' must be a bool");
  }
  report.excluded_from_stats = excluded.get<bool>();
  report.rule_version = require_string(doc, "rule_version");
  report.base_seed = require_int(doc, "base_seed");
  if (doc.contains("rollouts")) {
    const json& rollouts = doc["rollouts"];
    if (!rollouts.is_array()) {
      throw std::runtime_error(std::string(kContext) +
                               ": field 'rollouts' must be an array");
    }
    for (const json& entry : rollouts) {
      if (!entry.is_object()) {
        throw std::runtime_error(std::string(kContext) +
                                 ": rollout entries must be objects");
      }
      RolloutRecord record;
      record.rollout_index = static_cast<int>(require_int(entry, "rollout_index"));
      record.seed = require_int(entry, "seed");
      record.reward = static_cast<int>(require_int(entry, "reward"));
      const json& label = require_field(entry, "chosen_label");
      if (label.is_string()) {
        const std::string s = label.get<std::string>();
        if (s.size() != 1) {
          throw std::runtime_error(std::string(kContext) +
                                   ": chosen_label must be one letter");
        }
        record.chosen_label = s[0];
      } else if (!label.is_null()) {
        throw std::runtime_error(std::string(kContext) +
                                 ": chosen_label must be a string or null");
      }
      const std::string rule = require_string(entry, "extraction_rule");
      const auto parsed_rule = extraction_rule_from_string(rule);
      if (!parsed_rule) {
        throw std::runtime_error(std::string(kContext) +
                                 ": unknown extraction_rule '" + rule + "'");
      }
      record.extraction_rule = *parsed_rule;
      if (entry.contains("error")) {
        if (!entry["error"].is_string()) {
          throw std::runtime_error(std::string(kContext) +
                                   ": field 'error' must be a string");
        }
        record.error = entry["error"].get<std::string>();
      }
      report.rollouts.push_back(std::move(record));
    }
  }
  if (report.n < 1 || report.successes < 0 || report.successes > report.n) {
    throw std::runtime_error(std::string(kContext) +
                             ": successes/n out of range");
  }
  if (report.accuracy != Rational{report.successes, report.n}) {
    throw std::runtime_error(std::string(kContext) +
                             ": accuracy does not match successes/n");
  }
  if (classify(report.successes, report.n) != report.bucket) {
    throw std::runtime_error(std::string(kContext) +
                             ": bucket does not match accuracy");
  }
  return report;
}

}  // namespace mcqpipe
