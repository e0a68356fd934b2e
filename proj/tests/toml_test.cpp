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
#include "mcqpipe/toml.hpp"

#include <string>

#include "doctest.h"
#include "mcqpipe/config.hpp"
#include "test_util.hpp"

using namespace mcqpipe;

TEST_SUITE("toml") {

TEST_CASE("sections, scalars, and comments parse") {
  const TomlTable t = parse_toml(
      "# top comment\n"
      "title = \"hello \\\"world\\\"\"\n"
      "\n"
      "[run]\n"
      "master_seed = 1_000\n"
      "ratio = 2.5\n"
      "exp = 1e3\n"
      "flag = true\n"
      "off = false  # trailing comment\n"
      "hash_in_string = \"a # b\"\n"
      "[deep.nested]\n"
      "k = -7\n");

  CHECK(t.get_string("title", "") == "hello \"world\"");
  CHECK(t.get_int("run.master_seed", 0) == 1000);
  CHECK(t.get_double("run.ratio", 0.0) == doctest::Approx(2.5));
  CHECK(t.get_double("run.exp", 0.0) == doctest::Approx(1000.0));
  CHECK(t.get_bool("run.flag", false));
  CHECK_FALSE(t.get_bool("run.off", true));
  CHECK(t.get_string("run.hash_in_string", "") == "a # b");
  CHECK(t.get_int("deep.nested.k", 0) == -7);
}

TEST_CASE("string escapes") {
  const TomlTable t = parse_toml("s = \"a\\nb\\tc\\\\d\\re\"\n");
  CHECK(t.get_string("s", "") == "a\nb\tc\\d\re");
}

TEST_CASE("CRLF input is tolerated") {
  const TomlTable t = parse_toml("[a]\r\nk = 3\r\n");
  CHECK(t.get_int("a.k", 0) == 3);
}

TEST_CASE("typed getter fallbacks and mismatches") {
  const TomlTable t = parse_toml("[x]\nnum = 4\nname = \"n\"\n");
  CHECK(t.get_int("x.absent", 42) == 42);
  CHECK(t.get_string("x.absent", "d") == "d");
  // Integers promote to double; the reverse does not hold.
  CHECK(t.get_double("x.num", 0.0) == doctest::Approx(4.0));
  CHECK_THROWS_AS((void)t.get_int("x.name", 0), TomlError);
  CHECK_THROWS_AS((void)t.get_string("x.num", ""), TomlError);
  CHECK_THROWS_WITH_AS((void)t.get_bool("x.num", false),
                       doctest::Contains("x.num"), TomlError);
}

TEST_CASE("errors carry line numbers and causes") {
  CHECK_THROWS_WITH_AS(parse_toml("k = \"unterminated\n"),
                       doctest::Contains("line 1"), TomlError);
  CHECK_THROWS_WITH_AS(parse_toml("\nk = \"bad \\q escape\"\n"),
                       doctest::Contains("line 2"), TomlError);
  CHECK_THROWS_WITH_AS(parse_toml("k = [1, 2]\n"),
                       doctest::Contains("not supported"), TomlError);
  CHECK_THROWS_AS(parse_toml("just a bare line\n"), TomlError);
  CHECK_THROWS_AS(parse_toml("k = \n"), TomlError);
  CHECK_THROWS_AS(parse_toml("[unclosed\nk = 1\n"), TomlError);
  CHECK_THROWS_WITH_AS(parse_toml("a = 1\na = 2\n"),
                       doctest::Contains("duplicate"), TomlError);
  // Same key through different section paths is still a duplicate.
  CHECK_THROWS_AS(parse_toml("[s]\nk = 1\n[s]\nk = 2\n"), TomlError);
}

TEST_CASE("parse_toml_file round trip") {
  mcqpipe::testing::TempDir dir;
  const auto path = dir / "c.toml";
  mcqpipe::testing::write_file(path, "[run]\noption_count = 5\n");
  const TomlTable t = parse_toml_file(path);
  CHECK(t.get_int("run.option_count", 0) == 5);
  CHECK_THROWS(parse_toml_file(dir / "missing.toml"));
}

TEST_CASE("pipeline config defaults") {
  const PipelineConfig cfg = config_from_table(parse_toml(""));
  CHECK(cfg.master_seed == 0);
  CHECK(cfg.option_count == 9);
  CHECK(cfg.timestamp.empty());
  CHECK(cfg.workdir == std::filesystem::path("out"));
  CHECK(cfg.synthesis.max_attempts == 3);
  CHECK(cfg.rollout.n == 16);
  CHECK(cfg.stats_bins == 17);
  CHECK_FALSE(cfg.filter_drop.has_value());
  CHECK(cfg.generator.api_key_env == "MCQPIPE_API_KEY");
  CHECK(cfg.student.max_retries == 3);
  CHECK(cfg.warnings.empty());
}

TEST_CASE("pipeline config reads every section") {
  const PipelineConfig cfg = config_from_table(parse_toml(
      "[run]\n"
      "master_seed = 99\n"
      "option_count = 4\n"
      "timestamp = \"2026-01-01T00:00:00Z\"\n"
      "workdir = \"w\"\n"
      "[synthesis]\n"
      "max_attempts = 2\n"
      "temperature = 0.5\n"
      "max_output_tokens = 512\n"
      "parallelism = 3\n"
      "[rollout]\n"
      "n = 8\n"
      "temperature = 0.7\n"
      "max_tokens = 128\n"
      "parallelism = 2\n"
      "[filter]\n"
      "drop = \"easy,stale\"\n"
      "[stats]\n"
      "bins = 9\n"
      "[generator]\n"
      "base_url = \"http://127.0.0.1:9\"\n"
      "model_id = \"gen\"\n"
      "max_retries = 1\n"
      "backoff_initial_ms = 10\n"
      "[student]\n"
      "base_url = \"http://127.0.0.1:9\"\n"
      "model_id = \"stu\"\n"
      "min_interval_ms = 5\n"
      "max_in_flight = 2\n"));
  CHECK(cfg.master_seed == 99);
  CHECK(cfg.option_count == 4);
  CHECK(cfg.timestamp == "2026-01-01T00:00:00Z");
  CHECK(cfg.synthesis.max_attempts == 2);
  CHECK(cfg.synthesis.parallelism == 3);
  CHECK(cfg.rollout.n == 8);
  CHECK(cfg.rollout.max_tokens == 128);
  REQUIRE(cfg.filter_drop.has_value());
  CHECK(*cfg.filter_drop == std::set<Bucket>{Bucket::easy, Bucket::stale});
  CHECK(cfg.stats_bins == 9);
  CHECK(cfg.generator.model_id == "gen");
  CHECK(cfg.generator.max_retries == 1);
  CHECK(cfg.generator.backoff_initial_ms == 10);
  CHECK(cfg.student.min_interval_ms == 5);
  CHECK(cfg.student.max_in_flight == 2);
}

TEST_CASE("config range checks") {
  CHECK_THROWS_WITH_AS(
      config_from_table(parse_toml("[run]\noption_count = 1\n")),
      doctest::Contains("run.option_count"), ConfigError);
  CHECK_THROWS_AS(config_from_table(parse_toml("[run]\noption_count = 27\n")),
                  ConfigError);
  CHECK_THROWS_AS(config_from_table(parse_toml("[rollout]\nn = 0\n")),
                  ConfigError);
  CHECK_THROWS_AS(
      config_from_table(parse_toml("[synthesis]\nmax_attempts = 0\n")),
      ConfigError);
  CHECK_THROWS_AS(
      config_from_table(parse_toml("[generator]\nbackoff_multiplier = 0.5\n")),
      ConfigError);
  CHECK_THROWS_AS(
      config_from_table(parse_toml("[generator]\nbackoff_jitter = 2.0\n")),
      ConfigError);
}

TEST_CASE("unknown keys warn but do not fail") {
  const PipelineConfig cfg =
      config_from_table(parse_toml("[run]\nmystery = 1\n"));
  REQUIRE(cfg.warnings.size() == 1);
  CHECK(cfg.warnings[0] == "unknown config key: run.mystery");
}

TEST_CASE("api key never comes from the config file") {
  // Only the NAME of the environment variable is configurable.
  const PipelineConfig cfg = config_from_table(
      parse_toml("[generator]\napi_key_env = \"OTHER_KEY\"\n"));
  CHECK(cfg.generator.api_key_env == "OTHER_KEY");
  CHECK_THROWS_AS(
      config_from_table(parse_toml("[generator]\napi_key = \"sk-123\"\n")),
      ConfigError);
}

TEST_CASE("drop list parsing") {
  CHECK(parse_drop_list("") == std::set<Bucket>{});
  CHECK(parse_drop_list("easy") == std::set<Bucket>{Bucket::easy});
  CHECK(parse_drop_list("stale, easy") ==
        std::set<Bucket>{Bucket::easy, Bucket::stale});
  CHECK(parse_drop_list("effective") == std::set<Bucket>{Bucket::effective});
  CHECK_THROWS_WITH_AS(parse_drop_list("hard"), doctest::Contains("hard"),
                       ConfigError);
}

TEST_CASE("load_config names the file on syntax errors") {
  mcqpipe::testing::TempDir dir;
  const auto path = dir / "bad.toml";
  mcqpipe::testing::write_file(path, "k = [\n");
  CHECK_THROWS_WITH_AS(load_config(path), doctest::Contains("bad.toml"),
                       ConfigError);
}

}  // TEST_SUITE
