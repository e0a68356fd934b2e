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
#include "mcqpipe/config.hpp"

#include <algorithm>
#include <array>

#include "mcqpipe/text.hpp"

namespace mcqpipe {
namespace {

constexpr std::array kKnownKeys = {
    "run.master_seed",
    "run.option_count",
    "run.timestamp",
    "run.workdir",
    "synthesis.max_attempts",
    "synthesis.temperature",
    "synthesis.max_output_tokens",
    "synthesis.parallelism",
    "rollout.n",
    "rollout.temperature",
    "rollout.max_tokens",
    "rollout.parallelism",
    "filter.drop",
    "stats.bins",
};

constexpr std::array kClientKeys = {
    "base_url",          "model_id",          "api_key_env",
    "connect_timeout_ms", "read_timeout_ms",  "max_retries",
    "backoff_initial_ms", "backoff_multiplier", "backoff_jitter",
    "min_interval_ms",   "max_in_flight",
};

int require_range_int(const TomlTable& table, const std::string& key,
                      std::int64_t fallback, std::int64_t lo,
                      std::int64_t hi) {
  const std::int64_t value = table.get_int(key, fallback);
  if (value < lo || value > hi) {
    throw ConfigError("config key '" + key + "' must be in [" +
                      std::to_string(lo) + ", " + std::to_string(hi) +
                      "], got " + std::to_string(value));
  }
  return static_cast<int>(value);
}

double require_range_double(const TomlTable& table, const std::string& key,
                            double fallback, double lo, double hi) {
  const double value = table.get_double(key, fallback);
  if (value < lo || value > hi) {
    throw ConfigError("config key '" + key + "' must be in [" +
                      std::to_string(lo) + ", " + std::to_string(hi) +
                      "], got " + std::to_string(value));
  }
  return value;
}

ClientConfig read_client(const TomlTable& table, const std::string& prefix) {
  ClientConfig config;
  config.base_url = table.get_string(prefix + ".base_url", "");
  config.model_id = table.get_string(prefix + ".model_id", "");
  config.api_key_env =
      table.get_string(prefix + ".api_key_env", config.api_key_env);
  config.connect_timeout_ms = require_range_int(
      table, prefix + ".connect_timeout_ms", config.connect_timeout_ms, 1,
      3600000);
  config.read_timeout_ms = require_range_int(
      table, prefix + ".read_timeout_ms", config.read_timeout_ms, 1, 3600000);
  config.max_retries = require_range_int(table, prefix + ".max_retries",
                                         config.max_retries, 0, 100);
  config.backoff_initial_ms =
      require_range_int(table, prefix + ".backoff_initial_ms",
                        config.backoff_initial_ms, 0, 3600000);
  config.backoff_multiplier =
      require_range_double(table, prefix + ".backoff_multiplier",
                           config.backoff_multiplier, 1.0, 100.0);
  config.backoff_jitter = require_range_double(
      table, prefix + ".backoff_jitter", config.backoff_jitter, 0.0, 0.99);
  config.min_interval_ms = require_range_int(
      table, prefix + ".min_interval_ms", config.min_interval_ms, 0, 3600000);
  config.max_in_flight = require_range_int(table, prefix + ".max_in_flight",
                                           config.max_in_flight, 1, 4096);
  return config;
}

}  // namespace

std::set<Bucket> parse_drop_list(std::string_view csv) {
  std::set<Bucket> drop;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string_view part = csv.substr(
        start,
        comma == std::string_view::npos ? csv.size() - start : comma - start);
    const std::string name = trim(part);
    if (!name.empty()) {
      const auto bucket = bucket_from_string(name);
      if (!bucket) {
        throw ConfigError("unknown bucket '" + name +
                          "' in drop list (expected easy, effective, stale)");
      }
      drop.insert(*bucket);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return drop;
}

PipelineConfig config_from_table(const TomlTable& table) {
  PipelineConfig config;

  const std::int64_t master = table.get_int("run.master_seed", 0);
  if (master < 0) {
    throw ConfigError("config key 'run.master_seed' must be >= 0");
  }
  config.master_seed = static_cast<std::uint64_t>(master);
  config.option_count =
      require_range_int(table, "run.option_count", config.option_count, 2, 26);
  config.timestamp = table.get_string("run.timestamp", "");
  config.workdir = table.get_string("run.workdir", "out");

  config.synthesis.max_attempts = require_range_int(
      table, "synthesis.max_attempts", config.synthesis.max_attempts, 1, 100);
  config.synthesis.temperature =
      require_range_double(table, "synthesis.temperature",
                           config.synthesis.temperature, 0.0, 2.0);
  config.synthesis.max_output_tokens = require_range_int(
      table, "synthesis.max_output_tokens",
      config.synthesis.max_output_tokens, 1, 1000000);
  config.synthesis.parallelism = require_range_int(
      table, "synthesis.parallelism", config.synthesis.parallelism, 1, 1024);

  config.rollout.n =
      require_range_int(table, "rollout.n", config.rollout.n, 1, 10000);
  config.rollout.temperature = require_range_double(
      table, "rollout.temperature", config.rollout.temperature, 0.0, 2.0);
  config.rollout.max_tokens = require_range_int(
      table, "rollout.max_tokens", config.rollout.max_tokens, 1, 1000000);
  config.rollout.parallelism = require_range_int(
      table, "rollout.parallelism", config.rollout.parallelism, 1, 1024);

  if (table.contains("filter.drop")) {
    config.filter_drop = parse_drop_list(table.get_string("filter.drop", ""));
  }
  config.stats_bins =
      require_range_int(table, "stats.bins", config.stats_bins, 1, 100000);

  config.generator = read_client(table, "generator");
  config.student = read_client(table, "student");

  // Hard refusal, not a mere unknown-key warning: a key in a config file is
  // a key in version control sooner or later.
  for (const char* section : {"generator", "student"}) {
    const std::string key = std::string(section) + ".api_key";
    if (table.contains(key)) {
      throw ConfigError("config key '" + key +
                        "' is not allowed: credentials never live in config "
                        "files; export the environment variable named by '" +
                        section + ".api_key_env' instead");
    }
  }

  for (const std::string& key : table.keys()) {
    bool known = std::find(kKnownKeys.begin(), kKnownKeys.end(), key) !=
                 kKnownKeys.end();
    for (const char* client_key : kClientKeys) {
      if (key == std::string("generator.") + client_key ||
          key == std::string("student.") + client_key) {
        known = true;
        break;
      }
    }
    if (!known) config.warnings.push_back("unknown config key: " + key);
  }
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  try {
    return config_from_table(parse_toml_file(path));
  } catch (const TomlError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace mcqpipe
