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
#ifndef MCQPIPE_CONFIG_HPP_
#define MCQPIPE_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcqpipe/generation_client.hpp"
#include "mcqpipe/rollout.hpp"
#include "mcqpipe/toml.hpp"

namespace mcqpipe {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SynthesisStageConfig {
  int max_attempts = 3;
  double temperature = 1.0;
  int max_output_tokens = 4096;
  int parallelism = 8;
};

struct PipelineConfig {
  std::uint64_t master_seed = 0;
  int option_count = 9;  // ground truth + 8 distractors
  // Written into task provenance verbatim. Defaults to empty so two runs of
  // the same config produce byte-identical outputs; set it explicitly when
  // wall-clock provenance matters more than reproducibility.
  std::string timestamp;
  std::filesystem::path workdir = "out";
  SynthesisStageConfig synthesis;
  RolloutConfig rollout;  // base_seed is derived per task, not configured
  // Buckets the filter stage drops. nullopt means the domain default:
  // drop easy tasks from noisy-source (cyber) corpora, keep everything
  // else untouched.
  std::optional<std::set<Bucket>> filter_drop;
  int stats_bins = 17;
  ClientConfig generator;
  ClientConfig student;
  // Unknown-key notices, surfaced on stderr; never fatal.
  std::vector<std::string> warnings;
};

// "easy" or "easy,stale" and permutations; empty input gives an empty set.
// Unknown bucket names raise ConfigError.
std::set<Bucket> parse_drop_list(std::string_view csv);

PipelineConfig config_from_table(const TomlTable& table);

// Parses and range-checks a TOML config file. Credentials never live here:
// only the NAME of the environment variable holding the API key is
// configurable.
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace mcqpipe

#endif  // MCQPIPE_CONFIG_HPP_
