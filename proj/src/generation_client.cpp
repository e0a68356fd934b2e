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
#include "mcqpipe/generation_client.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "mcqpipe/hash.hpp"
#include "mcqpipe/jsonl.hpp"

namespace mcqpipe {
namespace {

constexpr const char* kCompletionsPath = "/v1/chat/completions";

FinishReason finish_reason_from(const std::string& value) {
  if (value == "stop") return FinishReason::stop;
  if (value == "length") return FinishReason::length;
  return FinishReason::error;
}

GenerationResponse parse_completion_body(const std::string& body,
                                         const std::string& fallback_model) {
  json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ProtocolError("malformed completion body: not a JSON object");
  }
  auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty()) {
    throw ProtocolError("malformed completion body: missing choices");
  }
  const json& choice = (*choices)[0];
  if (!choice.is_object()) {
    throw ProtocolError("malformed completion body: choice is not an object");
  }
  auto message = choice.find("message");
  if (message == choice.end() || !message->is_object() ||
      !message->contains("content") || !(*message)["content"].is_string()) {
    throw ProtocolError("malformed completion body: missing message content");
  }
  GenerationResponse response;
  response.text = (*message)["content"].get<std::string>();
  std::string reason = "stop";
  if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
    reason = choice["finish_reason"].get<std::string>();
  }
  response.finish_reason = finish_reason_from(reason);
  response.model_id = fallback_model;
  if (doc.contains("model") && doc["model"].is_string()) {
    response.model_id = doc["model"].get<std::string>();
  }
  return response;
}

}  // namespace

std::string_view to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::stop: return "stop";
    case FinishReason::length: return "length";
    case FinishReason::error: return "error";
  }
  return "error";
}

std::vector<GenerationOutcome> GenerationClient::generate_batch(
    const std::vector<GenerationRequest>& requests, int parallelism) const {
  std::vector<GenerationOutcome> results(requests.size());
  if (requests.empty()) return results;
  const std::size_t n = requests.size();
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= n) return;
      try {
        results[i].response = generate(requests[i]);
      } catch (const CredentialError& e) {
        results[i] = {std::nullopt, "credential", e.what()};
      } catch (const ProtocolError& e) {
        results[i] = {std::nullopt, "protocol", e.what()};
      } catch (const std::exception& e) {
        // TransportError and anything unforeseen: the request may have been
        // retried already, there is nothing smarter left to do per item.
        results[i] = {std::nullopt, "transport", e.what()};
      }
    }
  };
  const int workers =
      std::clamp<int>(parallelism, 1, static_cast<int>(n));
  if (workers == 1) {
    worker();
    return results;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return results;
}

// Bounds concurrent HTTP calls across all threads using this client.
struct HttpGenerationClient::Gate {
  explicit Gate(int slots) : available(slots) {}

  void acquire() {
    std::unique_lock<std::mutex> lock(mutex);
    cv.wait(lock, [this] { return available > 0; });
    --available;
  }

  void release() {
    {
      std::lock_guard<std::mutex> lock(mutex);
      ++available;
    }
    cv.notify_one();
  }

  // RAII hold on one slot.
  struct Slot {
    explicit Slot(Gate& gate) : gate_(gate) { gate_.acquire(); }
    ~Slot() { gate_.release(); }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    Gate& gate_;
  };

  std::mutex mutex;
  std::condition_variable cv;
  int available;
};

HttpGenerationClient::HttpGenerationClient(ClientConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
  if (config_.base_url.empty()) {
    throw std::invalid_argument("ClientConfig.base_url is empty");
  }
  if (config_.max_retries < 0) {
    throw std::invalid_argument("ClientConfig.max_retries is negative");
  }
  if (config_.max_in_flight < 1) {
    throw std::invalid_argument("ClientConfig.max_in_flight must be >= 1");
  }
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) {
      api_key_ = key;
    }
  }
  if (!sleeper_) {
    sleeper_ = [](std::chrono::milliseconds d) {
      std::this_thread::sleep_for(d);
    };
  }
  std::uint64_t seed = config_.jitter_seed
                           ? *config_.jitter_seed
                           : (static_cast<std::uint64_t>(std::random_device{}())
                                  << 32) ^
                                 std::random_device{}();
  jitter_rng_.seed(mix64(seed));
  next_start_ = std::chrono::steady_clock::now();
  gate_ = std::make_shared<Gate>(config_.max_in_flight);
}

std::chrono::milliseconds HttpGenerationClient::next_backoff_delay(
    int attempt, std::chrono::milliseconds previous) const {
  const double base = static_cast<double>(config_.backoff_initial_ms) *
                      std::pow(config_.backoff_multiplier, attempt);
  double unit;
  {
    std::lock_guard<std::mutex> lock(jitter_mutex_);
    unit = std::uniform_real_distribution<double>(-1.0, 1.0)(jitter_rng_);
  }
  double ms = base * (1.0 + config_.backoff_jitter * unit);
  // Jitter must not let a later delay undercut an earlier one.
  ms = std::max(ms, static_cast<double>(previous.count()));
  ms = std::max(ms, 0.0);
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(ms)));
}

void HttpGenerationClient::await_rate_slot() const {
  if (config_.min_interval_ms <= 0) return;
  std::chrono::milliseconds wait{0};
  const auto interval = std::chrono::milliseconds(config_.min_interval_ms);
  {
    std::lock_guard<std::mutex> lock(rate_mutex_);
    const auto now = std::chrono::steady_clock::now();
    if (next_start_ < now) next_start_ = now;
    wait = std::chrono::duration_cast<std::chrono::milliseconds>(next_start_ -
                                                                 now);
    next_start_ += interval;
  }
  if (wait.count() > 0) sleeper_(wait);
}

GenerationResponse HttpGenerationClient::generate(
    const GenerationRequest& request) const {
  const Gate::Slot slot(*gate_);

  json body;
  body["model"] = config_.model_id;
  body["messages"] = json::array({json{{"role", "user"},
                                       {"content", request.prompt}}});
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  if (request.seed) body["seed"] = *request.seed;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!api_key_.empty()) {
    headers.emplace("Authorization", "Bearer " + api_key_);
  }

  std::string last_error = "no attempt made";
  std::chrono::milliseconds previous{0};
  for (int attempt = 0;; ++attempt) {
    await_rate_slot();
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(
        std::chrono::milliseconds(config_.connect_timeout_ms));
    client.set_read_timeout(std::chrono::milliseconds(config_.read_timeout_ms));
    client.set_write_timeout(
        std::chrono::milliseconds(config_.read_timeout_ms));

    auto result =
        client.Post(kCompletionsPath, headers, payload, "application/json");
    if (result) {
      const int status = result->status;
      if (status == 200) {
        return parse_completion_body(result->body, config_.model_id);
      }
      if (status == 401 || status == 403) {
        throw CredentialError("credential rejected (HTTP " +
                              std::to_string(status) + "); check $" +
                              config_.api_key_env);
      }
      if (status != 429 && status < 500) {
        throw ProtocolError("unexpected HTTP status " +
                            std::to_string(status));
      }
      last_error = "HTTP status " + std::to_string(status);
    } else {
      last_error =
          std::string("connection failed: ") + httplib::to_string(result.error());
    }

    if (attempt >= config_.max_retries) {
      throw TransportError("retries exhausted after " +
                           std::to_string(attempt + 1) +
                           " attempts; last error: " + last_error);
    }
    previous = next_backoff_delay(attempt, previous);
    sleeper_(previous);
  }
}

}  // namespace mcqpipe
