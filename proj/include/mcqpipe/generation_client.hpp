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
#ifndef MCQPIPE_GENERATION_CLIENT_HPP_
#define MCQPIPE_GENERATION_CLIENT_HPP_

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcqpipe {

struct GenerationRequest {
  std::string prompt;
  double temperature = 1.0;
  int max_tokens = 4096;
  std::optional<std::int64_t> seed;
};

enum class FinishReason { stop, length, error };

std::string_view to_string(FinishReason reason);

struct GenerationResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::stop;
  std::string model_id;
};

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Connection failures, timeouts, 429s, and 5xx responses that survived the
// retry budget.
struct TransportError : GenerationError {
  using GenerationError::GenerationError;
};

// 401/403: retrying cannot help, the key itself is bad or missing.
struct CredentialError : GenerationError {
  using GenerationError::GenerationError;
};

// The service answered but not in the shape this client speaks: malformed
// completion bodies and 4xx responses other than 401/403/429.
struct ProtocolError : GenerationError {
  using GenerationError::GenerationError;
};

struct GenerationOutcome {
  std::optional<GenerationResponse> response;
  std::string error_kind;  // "transport" | "credential" | "protocol"
  std::string error;

  bool ok() const { return response.has_value(); }
};

class GenerationClient {
 public:
  virtual ~GenerationClient() = default;

  // Must be safe to call from several threads at once.
  virtual GenerationResponse generate(const GenerationRequest& request) const = 0;

  virtual std::string model_id() const = 0;

  // Runs generate() over all requests with at most `parallelism` worker
  // threads. results[i] always corresponds to requests[i]; per-request
  // errors are captured in the outcome instead of thrown so one bad item
  // cannot abort the batch.
  std::vector<GenerationOutcome> generate_batch(
      const std::vector<GenerationRequest>& requests, int parallelism) const;
};

struct ClientConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8080
  std::string model_id;
  // Name of the environment variable holding the bearer token. The key
  // itself never appears in config files.
  std::string api_key_env = "MCQPIPE_API_KEY";
  int connect_timeout_ms = 10000;
  int read_timeout_ms = 120000;
  // Retries after the first try, for retryable failures only.
  int max_retries = 3;
  int backoff_initial_ms = 1000;
  double backoff_multiplier = 2.0;
  double backoff_jitter = 0.2;  // +/- fraction of the base delay
  // Minimum spacing between request starts, across all threads. 0 disables.
  int min_interval_ms = 0;
  int max_in_flight = 8;
  std::optional<std::uint64_t> jitter_seed;
};

// Chat-completions HTTP client: POST {base_url}/v1/chat/completions with a
// single user message. Timeouts, 429 and 5xx retry with exponential backoff
// (jittered, delays never decrease across attempts); 401/403 raise
// CredentialError at once; other 4xx and malformed bodies raise
// ProtocolError at once. TransportError reports an exhausted retry budget.
class HttpGenerationClient : public GenerationClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  // `sleeper` defaults to std::this_thread::sleep_for; tests inject a
  // recorder to observe backoff without waiting.
  explicit HttpGenerationClient(ClientConfig config, Sleeper sleeper = {});

  GenerationResponse generate(const GenerationRequest& request) const override;
  std::string model_id() const override { return config_.model_id; }

  const ClientConfig& config() const { return config_; }

 private:
  std::chrono::milliseconds next_backoff_delay(int attempt,
                                               std::chrono::milliseconds previous) const;
  void await_rate_slot() const;

  ClientConfig config_;
  std::string api_key_;
  Sleeper sleeper_;
  mutable std::mutex jitter_mutex_;
  mutable std::mt19937_64 jitter_rng_;
  mutable std::mutex rate_mutex_;
  mutable std::chrono::steady_clock::time_point next_start_;
  struct Gate;
  std::shared_ptr<Gate> gate_;
};

}  // namespace mcqpipe

#endif  // MCQPIPE_GENERATION_CLIENT_HPP_
