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
#ifndef MCQPIPE_MOCKLLM_HPP_
#define MCQPIPE_MOCKLLM_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "mcqpipe/generation_client.hpp"

namespace mcqpipe {

// Deterministic scripted stand-in for both the generator and the student
// service, used by the demo binary and the hermetic test suite. A reply is
// a pure function of (prompt, seed, attempt), where attempt counts how many
// times this exact prompt has been served before. Markers embedded in the
// prompt text steer behavior:
//   [[empty]]      cyber synthesis returns an empty <answer></answer>
//   [[thin]]       draft carries only 3 distractors
//   [[flaky]]      attempt 0 returns malformed JSON, later attempts are valid
//   [[fail429=N]]  attempts 0..N-1 get HTTP 429
//   [[fail500=N]]  attempts 0..N-1 get HTTP 500
//   [[acc=K/N]]    student answers correctly iff seed mod N < K
//   [[uniform]]    student guesses uniformly among the options
// Without a student marker the student picks the ground-truth option, which
// synthesis replies make recognizable by its "gt-" text prefix.

struct MockReply {
  int status = 200;
  std::string text;  // assistant message content when status == 200
};

// Whether `prompt` is a student request (a rendered question with options)
// as opposed to a synthesis request.
bool is_student_prompt(std::string_view prompt);

MockReply scripted_reply(const std::string& prompt,
                         std::optional<std::int64_t> seed, int attempt);

// In-process GenerationClient over the same script; no sockets, so large
// property suites can run hundreds of thousands of calls. Scripted HTTP
// failures surface as TransportError, mirroring the real client after
// exhausted retries.
class ScriptedClient : public GenerationClient {
 public:
  explicit ScriptedClient(std::string model = "mockllm");

  GenerationResponse generate(const GenerationRequest& request) const override;
  std::string model_id() const override { return model_; }

  std::size_t calls() const;

 private:
  std::string model_;
  mutable std::mutex mutex_;
  mutable std::map<std::uint64_t, int> attempts_;
  mutable std::size_t calls_ = 0;
};

// The same script behind a real chat-completions HTTP endpoint on
// 127.0.0.1. Construction binds and starts serving; port 0 picks a free
// port.
class MockService {
 public:
  explicit MockService(int port = 0);
  ~MockService();

  MockService(const MockService&) = delete;
  MockService& operator=(const MockService&) = delete;

  int port() const { return port_; }
  std::string base_url() const;
  std::size_t request_count() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace mcqpipe

#endif  // MCQPIPE_MOCKLLM_HPP_
