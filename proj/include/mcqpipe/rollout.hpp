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
#ifndef MCQPIPE_ROLLOUT_HPP_
#define MCQPIPE_ROLLOUT_HPP_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mcqpipe/generation_client.hpp"
#include "mcqpipe/jsonl.hpp"
#include "mcqpipe/synthesizer.hpp"
#include "mcqpipe/types.hpp"
#include "mcqpipe/verifier.hpp"

namespace mcqpipe {

// Difficulty bucket from repeated rollouts: easy tasks the student always
// solves, stale tasks it never solves, effective tasks sit in between and
// carry training signal.
enum class Bucket { easy, effective, stale };

std::string_view to_string(Bucket bucket);
std::optional<Bucket> bucket_from_string(std::string_view s);

// Bucket for `successes` correct rollouts out of `n`. Exact integer
// comparison; accuracy never passes through floating point here.
Bucket classify(std::int64_t successes, std::int64_t n);

struct RolloutRecord {
  int rollout_index = 0;
  std::int64_t seed = 0;
  int reward = 0;
  std::optional<char> chosen_label;
  ExtractionRule extraction_rule = ExtractionRule::none;
  std::string error;  // empty unless the rollout's generation failed
};

struct RolloutReport {
  std::string task_id;
  Domain domain = Domain::math;
  std::int64_t n = 0;
  std::int64_t successes = 0;
  std::int64_t error_count = 0;
  Rational accuracy;  // successes / n, exact
  Bucket bucket = Bucket::stale;
  // Set when more than a quarter of rollouts errored; such a report says
  // more about the serving path than about the task.
  bool excluded_from_stats = false;
  std::string rule_version;
  std::int64_t base_seed = 0;
  std::vector<RolloutRecord> rollouts;
};

struct RolloutConfig {
  int n = 16;
  std::int64_t base_seed = 0;
  int parallelism = 8;
  double temperature = 1.0;
  int max_tokens = 2048;
};

// Runs config.n rollouts of the formatted task against the student client,
// seeds base_seed .. base_seed + n - 1, and scores each response. A failed
// generation becomes a reward-0 rollout with the error recorded, never an
// exception: one flaky call must not sink the whole probe.
RolloutReport probe_task(const McqTask& task, const GenerationClient& client,
                         const RolloutConfig& config);

// Reports whose bucket is not in `drop`, original order preserved.
std::vector<RolloutReport> filter_reports(
    const std::vector<RolloutReport>& reports, const std::set<Bucket>& drop);

// Drops saturated tasks (accuracy 1) and nothing else.
std::vector<RolloutReport> filter_easy(
    const std::vector<RolloutReport>& reports);

// Fraction of reports sitting in the effective bucket. Reports flagged
// excluded_from_stats are left out of both sides unless include_flagged;
// an empty selection yields 0.
double effectiveness_ratio(const std::vector<RolloutReport>& reports,
                           bool include_flagged = false);

// Exact integer binning of per-report accuracy: report with s successes of
// n lands in bin min(s * bins / n, bins - 1). With bins == n + 1 this is
// the identity on success counts.
std::vector<std::size_t> accuracy_histogram(
    const std::vector<RolloutReport>& reports, int bins,
    bool include_flagged = false);

struct ProbeStats {
  std::size_t total = 0;     // reports counted, after exclusion
  std::size_t excluded = 0;  // reports dropped by the error-rate flag
  std::size_t easy = 0;
  std::size_t effective = 0;
  std::size_t stale = 0;
  double effectiveness = 0.0;
  std::vector<std::size_t> histogram;
};

ProbeStats compute_stats(const std::vector<RolloutReport>& reports, int bins,
                         bool include_flagged = false);

json serialize_report(const RolloutReport& report);

// Parses one reports.jsonl line. Throws std::runtime_error on schema
// violations or internally inconsistent counts.
RolloutReport report_from_json(const json& doc);

}  // namespace mcqpipe

#endif  // MCQPIPE_ROLLOUT_HPP_
