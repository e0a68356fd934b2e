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
#include "mcqpipe/mockllm.hpp"

#include <charconv>
#include <random>
#include <vector>

#include "httplib.h"
#include "mcqpipe/hash.hpp"
#include "mcqpipe/jsonl.hpp"
#include "mcqpipe/rng.hpp"

namespace mcqpipe {
namespace {

std::string short_hash(const std::string& prompt) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::uint64_t h = fnv1a64(prompt);
  std::string out;
  for (int i = 0; i < 8; ++i) {
    out += kHex[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::optional<int> marker_int(const std::string& prompt,
                              const std::string& marker) {
  const std::size_t at = prompt.find(marker);
  if (at == std::string::npos) return std::nullopt;
  const std::size_t start = at + marker.size();
  const std::size_t end = prompt.find("]]", start);
  if (end == std::string::npos) return std::nullopt;
  int value = 0;
  const auto [ptr, ec] =
      std::from_chars(prompt.data() + start, prompt.data() + end, value);
  if (ec != std::errc() || ptr != prompt.data() + end) return std::nullopt;
  return value;
}

// The verbatim "[[acc=K/N]]" marker text, so synthesis replies can forward
// it into the masked context where the student will see it.
std::string forwarded_markers(const std::string& prompt) {
  std::string out;
  for (const char* name : {"[[acc=", "[[uniform]]"}) {
    const std::size_t at = prompt.find(name);
    if (at == std::string::npos) continue;
    const std::size_t end = prompt.find("]]", at);
    if (end == std::string::npos) continue;
    if (!out.empty()) out += ' ';
    out += prompt.substr(at, end + 2 - at);
  }
  return out;
}

MockReply generator_reply(const std::string& prompt, int attempt) {
  const bool cyber = prompt.find("\"removed_content\"") != std::string::npos;
  const bool code = prompt.find("\"removed_lines\"") != std::string::npos;

  if (cyber && prompt.find("[[empty]]") != std::string::npos) {
    return {200, "The document has no suitable passage.\n<answer></answer>"};
  }
  if (prompt.find("[[flaky]]") != std::string::npos && attempt == 0) {
    return {200, "<answer>{this is not json]</answer>"};
  }

  const std::string h = short_hash(prompt);
  const std::string markers = forwarded_markers(prompt);
  std::string masked = "ctx-" + h;
  if (!markers.empty()) masked += " " + markers;
  masked += " leading step [MASK] closing step";

  json payload;
  const char* masked_key = cyber ? "masked_passage" : "masked_reference_solution";
  const char* removed_key =
      cyber ? "removed_content" : (code ? "removed_lines" : "removed_steps");
  payload[masked_key] = masked;
  payload[removed_key] = "gt-" + h;
  const int distractor_count =
      prompt.find("[[thin]]") != std::string::npos ? 3 : 10;
  json distractors = json::array();
  for (int k = 1; k <= distractor_count; ++k) {
    distractors.push_back("d" + std::to_string(k) + "-" + h);
  }
  payload["distractors"] = std::move(distractors);
  return {200, "Here is the task.\n<answer>\n" + payload.dump(2) +
                   "\n</answer>"};
}

struct ParsedOption {
  char label;
  std::string text;
};

std::vector<ParsedOption> parse_options(const std::string& prompt) {
  std::vector<ParsedOption> options;
  std::size_t pos = 0;
  while (pos < prompt.size()) {
    std::size_t end = prompt.find('\n', pos);
    if (end == std::string::npos) end = prompt.size();
    const std::string_view line(prompt.data() + pos, end - pos);
    if (line.size() >= 3 && line[0] >= 'A' && line[0] <= 'Z' &&
        line[1] == '.' && line[2] == ' ') {
      options.push_back({line[0], std::string(line.substr(3))});
    }
    pos = end + 1;
  }
  return options;
}

MockReply student_reply(const std::string& prompt,
                        std::optional<std::int64_t> seed) {
  const std::vector<ParsedOption> options = parse_options(prompt);
  if (options.empty()) {
    return {200, "I cannot find any options to choose from."};
  }

  char truth = options.front().label;
  char decoy = options.front().label;
  for (const ParsedOption& option : options) {
    if (option.text.rfind("gt-", 0) == 0) truth = option.label;
  }
  for (const ParsedOption& option : options) {
    if (option.label != truth) {
      decoy = option.label;
      break;
    }
  }

  char chosen = truth;
  if (prompt.find("[[uniform]]") != std::string::npos) {
    const std::uint64_t mixed =
        mix64(fnv1a64(prompt) ^
              static_cast<std::uint64_t>(seed.value_or(0)));
    std::mt19937_64 rng(mixed);
    chosen = options[static_cast<std::size_t>(
                         uniform_below(rng, options.size()))]
                 .label;
  } else if (const std::size_t at = prompt.find("[[acc=");
             at != std::string::npos) {
    const std::size_t slash = prompt.find('/', at);
    const std::size_t end = prompt.find("]]", at);
    std::int64_t k = 0;
    std::int64_t n = 0;
    if (slash != std::string::npos && end != std::string::npos &&
        slash < end) {
      std::from_chars(prompt.data() + at + 6, prompt.data() + slash, k);
      std::from_chars(prompt.data() + slash + 1, prompt.data() + end, n);
    }
    if (n > 0) {
      const std::int64_t s = seed.value_or(
          static_cast<std::int64_t>(fnv1a64(prompt) & 0x7fffffff));
      const std::int64_t residue = ((s % n) + n) % n;
      chosen = residue < k ? truth : decoy;
    }
  }

  std::string text = "The structure of the context points one way.\n";
  text += "\\boxed{";
  text += chosen;
  text += "}";
  return {200, text};
}

}  // namespace

bool is_student_prompt(std::string_view prompt) {
  return prompt.find("\nOptions:\n") != std::string_view::npos &&
         prompt.find("\\boxed{}") != std::string_view::npos;
}

MockReply scripted_reply(const std::string& prompt,
                         std::optional<std::int64_t> seed, int attempt) {
  if (const auto n = marker_int(prompt, "[[fail429=")) {
    if (attempt < *n) return {429, ""};
  }
  if (const auto n = marker_int(prompt, "[[fail500=")) {
    if (attempt < *n) return {500, ""};
  }
  if (is_student_prompt(prompt)) return student_reply(prompt, seed);
  return generator_reply(prompt, attempt);
}

ScriptedClient::ScriptedClient(std::string model) : model_(std::move(model)) {}

GenerationResponse ScriptedClient::generate(
    const GenerationRequest& request) const {
  int attempt = 0;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    attempt = attempts_[fnv1a64(request.prompt)]++;
    ++calls_;
  }
  const MockReply reply = scripted_reply(request.prompt, request.seed, attempt);
  if (reply.status != 200) {
    throw TransportError("scripted failure: HTTP " +
                         std::to_string(reply.status));
  }
  GenerationResponse response;
  response.text = reply.text;
  response.finish_reason = FinishReason::stop;
  response.model_id = model_;
  return response;
}

std::size_t ScriptedClient::calls() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return calls_;
}

struct MockService::Impl {
  httplib::Server server;
  std::thread thread;
  mutable std::mutex mutex;
  std::map<std::uint64_t, int> attempts;
  std::size_t requests = 0;
};

MockService::MockService(int port) : impl_(std::make_unique<Impl>()) {
  impl_->server.Post(
      "/v1/chat/completions",
      [impl = impl_.get()](const httplib::Request& req,
                           httplib::Response& res) {
        json doc = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
        std::string prompt;
        std::optional<std::int64_t> seed;
        if (doc.is_object() && doc.contains("messages") &&
            doc["messages"].is_array() && !doc["messages"].empty() &&
            doc["messages"][0].is_object() &&
            doc["messages"][0].contains("content") &&
            doc["messages"][0]["content"].is_string()) {
          prompt = doc["messages"][0]["content"].get<std::string>();
        }
        if (doc.is_object() && doc.contains("seed") &&
            doc["seed"].is_number_integer()) {
          seed = doc["seed"].get<std::int64_t>();
        }

        int attempt = 0;
        {
          std::lock_guard<std::mutex> lock(impl->mutex);
          attempt = impl->attempts[fnv1a64(prompt)]++;
          ++impl->requests;
        }
        const MockReply reply = scripted_reply(prompt, seed, attempt);
        if (reply.status != 200) {
          res.status = reply.status;
          res.set_content("{\"error\": {\"message\": \"scripted failure\"}}",
                          "application/json");
          return;
        }
        json body;
        body["id"] = "mock-completion";
        body["object"] = "chat.completion";
        body["model"] = "mockllm";
        json message;
        message["role"] = "assistant";
        message["content"] = reply.text;
        json choice;
        choice["index"] = 0;
        choice["message"] = std::move(message);
        choice["finish_reason"] = "stop";
        body["choices"] = json::array({std::move(choice)});
        res.set_content(body.dump(), "application/json");
      });

  if (port == 0) {
    port_ = impl_->server.bind_to_any_port("127.0.0.1");
  } else {
    if (!impl_->server.bind_to_port("127.0.0.1", port)) {
      throw std::runtime_error("mock service: cannot bind port " +
                               std::to_string(port));
    }
    port_ = port;
  }
  if (port_ <= 0) {
    throw std::runtime_error("mock service: cannot bind a port");
  }
  impl_->thread = std::thread([impl = impl_.get()] {
    impl->server.listen_after_bind();
  });
  impl_->server.wait_until_ready();
}

MockService::~MockService() { stop(); }

void MockService::stop() {
  if (!impl_) return;
  if (impl_->server.is_running()) impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockService::base_url() const {
  return "http://127.0.0.1:" + std::to_string(port_);
}

std::size_t MockService::request_count() const {
  std::lock_guard<std::mutex> lock(impl_->mutex);
  return impl_->requests;
}

}  // namespace mcqpipe
