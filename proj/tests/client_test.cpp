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

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "httplib.h"
#include "mcqpipe/jsonl.hpp"
#include "test_util.hpp"

using namespace mcqpipe;

namespace {

std::string completion_body(const std::string& text,
                            const std::string& finish = "stop",
                            const std::string& model = "test-model") {
  json doc;
  doc["id"] = "cmpl-1";
  doc["model"] = model;
  doc["choices"] =
      json::array({json{{"index", 0},
                        {"message", json{{"role", "assistant"},
                                         {"content", text}}},
                        {"finish_reason", finish}}});
  return doc.dump();
}

// Local chat-completions endpoint whose per-request behavior comes from a
// handler callback. Starts on construction, stops on destruction.
class TestServer {
 public:
  using Handler =
      std::function<void(const httplib::Request&, httplib::Response&)>;

  explicit TestServer(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   requests_.fetch_add(1);
                   handler_(req, res);
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    REQUIRE(port_ > 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~TestServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int requests() const { return requests_.load(); }

 private:
  Handler handler_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
};

struct SleepRecorder {
  std::vector<std::chrono::milliseconds> delays;
  std::mutex mutex;

  HttpGenerationClient::Sleeper sleeper() {
    return [this](std::chrono::milliseconds d) {
      std::lock_guard<std::mutex> lock(mutex);
      delays.push_back(d);
    };
  }
};

ClientConfig base_config(const std::string& url) {
  ClientConfig config;
  config.base_url = url;
  config.model_id = "test-model";
  config.api_key_env = "MCQPIPE_TEST_ABSENT_KEY";
  config.max_retries = 3;
  config.backoff_initial_ms = 100;
  config.jitter_seed = 7;
  return config;
}

}  // namespace

TEST_SUITE("generation_client") {

TEST_CASE("happy path posts an OpenAI-shaped request") {
  json seen_body;
  std::string seen_auth = "unset";
  TestServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen_body = json::parse(req.body);
    seen_auth = req.has_header("Authorization")
                    ? req.get_header_value("Authorization")
                    : "";
    res.set_content(completion_body("hello back"), "application/json");
  });

  HttpGenerationClient client(base_config(server.url()));
  GenerationRequest request;
  request.prompt = "say hello";
  request.temperature = 0.25;
  request.max_tokens = 77;
  request.seed = 41;
  const GenerationResponse response = client.generate(request);

  CHECK(response.text == "hello back");
  CHECK(response.finish_reason == FinishReason::stop);
  CHECK(response.model_id == "test-model");
  CHECK(seen_body["model"] == "test-model");
  REQUIRE(seen_body["messages"].is_array());
  CHECK(seen_body["messages"][0]["role"] == "user");
  CHECK(seen_body["messages"][0]["content"] == "say hello");
  CHECK(seen_body["temperature"] == doctest::Approx(0.25));
  CHECK(seen_body["max_tokens"] == 77);
  CHECK(seen_body["seed"] == 41);
  // No key in the named env var: no Authorization header at all.
  CHECK(seen_auth.empty());
}

TEST_CASE("bearer token comes from the configured environment variable") {
  std::string seen_auth;
  TestServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    res.set_content(completion_body("ok"), "application/json");
  });

  ::setenv("MCQPIPE_TEST_KEY_VAR", "sk-test-123", 1);
  ClientConfig config = base_config(server.url());
  config.api_key_env = "MCQPIPE_TEST_KEY_VAR";
  HttpGenerationClient client(config);
  (void)client.generate({.prompt = "p"});
  ::unsetenv("MCQPIPE_TEST_KEY_VAR");

  CHECK(seen_auth == "Bearer sk-test-123");
}

TEST_CASE("429 retries with jittered, non-decreasing backoff") {
  std::atomic<int> hits{0};
  TestServer server([&](const httplib::Request&, httplib::Response& res) {
    if (hits.fetch_add(1) < 2) {
      res.status = 429;
      res.set_content("slow down", "text/plain");
    } else {
      res.set_content(completion_body("finally"), "application/json");
    }
  });

  SleepRecorder recorder;
  HttpGenerationClient client(base_config(server.url()), recorder.sleeper());
  const GenerationResponse response = client.generate({.prompt = "p"});

  CHECK(response.text == "finally");
  CHECK(server.requests() == 3);
  REQUIRE(recorder.delays.size() == 2);
  // First delay: 100ms +/- 20% jitter. Second: 200ms +/- 20%, but never
  // below the first.
  CHECK(recorder.delays[0].count() >= 80);
  CHECK(recorder.delays[0].count() <= 120);
  CHECK(recorder.delays[1].count() >= recorder.delays[0].count());
  CHECK(recorder.delays[1].count() <= 240);
}

TEST_CASE("persistent 5xx exhausts the retry budget") {
  TestServer server([&](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
  });

  SleepRecorder recorder;
  ClientConfig config = base_config(server.url());
  config.max_retries = 2;
  HttpGenerationClient client(config, recorder.sleeper());

  CHECK_THROWS_WITH_AS((void)client.generate({.prompt = "p"}),
                       doctest::Contains("retries exhausted after 3 attempts"),
                       TransportError);
  CHECK(server.requests() == 3);
  CHECK(recorder.delays.size() == 2);
}

// A loopback port that refuses connections instantly: bound so nothing else
// (including this process's own ephemeral source ports) can take it, but
// never put into the listen state, so every SYN draws a reset. An
// httplib::Server is no good here; its bind_to_any_port already listens, and
// connections would park in the accept backlog until the read timeout.
class DeadPort {
 public:
  DeadPort() {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(fd_ >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    REQUIRE(::bind(fd_, reinterpret_cast<const sockaddr*>(&addr),
                   sizeof(addr)) == 0);
    socklen_t len = sizeof(addr);
    REQUIRE(::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) == 0);
    port_ = ntohs(addr.sin_port);
  }
  ~DeadPort() { ::close(fd_); }
  DeadPort(const DeadPort&) = delete;
  DeadPort& operator=(const DeadPort&) = delete;

  int port() const { return port_; }

 private:
  int fd_ = -1;
  int port_ = 0;
};

TEST_CASE("connection failure is retryable and then fatal") {
  const DeadPort dead;
  SleepRecorder recorder;
  ClientConfig config =
      base_config("http://127.0.0.1:" + std::to_string(dead.port()));
  config.max_retries = 1;
  config.connect_timeout_ms = 200;
  HttpGenerationClient client(config, recorder.sleeper());
  CHECK_THROWS_WITH_AS((void)client.generate({.prompt = "p"}),
                       doctest::Contains("connection failed"), TransportError);
  CHECK(recorder.delays.size() == 1);
}

TEST_CASE("401 and 403 fail immediately and name the key variable") {
  for (int status : {401, 403}) {
    CAPTURE(status);
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
      res.status = status;
    });
    SleepRecorder recorder;
    HttpGenerationClient client(base_config(server.url()), recorder.sleeper());
    CHECK_THROWS_WITH_AS((void)client.generate({.prompt = "p"}),
                         doctest::Contains("$MCQPIPE_TEST_ABSENT_KEY"),
                         CredentialError);
    CHECK(server.requests() == 1);
    CHECK(recorder.delays.empty());
  }
}

TEST_CASE("other 4xx fail immediately as protocol errors") {
  TestServer server([&](const httplib::Request&, httplib::Response& res) {
    res.status = 404;
  });
  HttpGenerationClient client(base_config(server.url()));
  CHECK_THROWS_WITH_AS((void)client.generate({.prompt = "p"}),
                       doctest::Contains("HTTP status 404"), ProtocolError);
  CHECK(server.requests() == 1);
}

TEST_CASE("malformed 200 bodies fail immediately as protocol errors") {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"not json", "not a JSON object"},
      {"[]", "not a JSON object"},
      {"{}", "missing choices"},
      {"{\"choices\": []}", "missing choices"},
      {"{\"choices\": [42]}", "choice is not an object"},
      {"{\"choices\": [{\"message\": {}}]}", "missing message content"},
  };
  for (const auto& [body, expected] : cases) {
    CAPTURE(body);
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
      res.set_content(body, "application/json");
    });
    SleepRecorder recorder;
    HttpGenerationClient client(base_config(server.url()), recorder.sleeper());
    CHECK_THROWS_WITH_AS((void)client.generate({.prompt = "p"}),
                         doctest::Contains(expected.c_str()), ProtocolError);
    CHECK(server.requests() == 1);
    CHECK(recorder.delays.empty());
  }
}

TEST_CASE("finish_reason and model fall back sensibly") {
  // Body without finish_reason or model: stop + configured model id.
  TestServer server([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(
        "{\"choices\": [{\"message\": {\"content\": \"t\"}}]}",
        "application/json");
  });
  HttpGenerationClient client(base_config(server.url()));
  const GenerationResponse response = client.generate({.prompt = "p"});
  CHECK(response.finish_reason == FinishReason::stop);
  CHECK(response.model_id == "test-model");
}

TEST_CASE("length finish reason passes through") {
  TestServer server([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion_body("cut off", "length"), "application/json");
  });
  HttpGenerationClient client(base_config(server.url()));
  CHECK(client.generate({.prompt = "p"}).finish_reason ==
        FinishReason::length);
}

TEST_CASE("unknown finish reason maps to error") {
  TestServer server([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion_body("t", "content_filter"),
                    "application/json");
  });
  HttpGenerationClient client(base_config(server.url()));
  CHECK(client.generate({.prompt = "p"}).finish_reason ==
        FinishReason::error);
}

TEST_CASE("rate limiter spaces request starts") {
  TestServer server([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion_body("ok"), "application/json");
  });
  SleepRecorder recorder;
  ClientConfig config = base_config(server.url());
  config.min_interval_ms = 50;
  HttpGenerationClient client(config, recorder.sleeper());
  for (int i = 0; i < 3; ++i) (void)client.generate({.prompt = "p"});
  // The first call goes straight through; later calls wait out the
  // remainder of the interval (requests are fast, so nearly all of it).
  REQUIRE(recorder.delays.size() >= 2);
  // With a recording (non-sleeping) sleeper the deficit accumulates by one
  // interval per call; just bound it loosely.
  for (const auto& d : recorder.delays) {
    CHECK(d.count() > 0);
    CHECK(d.count() <= 150);
  }
}

TEST_CASE("invalid configuration is rejected up front") {
  CHECK_THROWS_AS(HttpGenerationClient(ClientConfig{}),
                  std::invalid_argument);
  ClientConfig bad = base_config("http://127.0.0.1:1");
  bad.max_retries = -1;
  CHECK_THROWS_AS(HttpGenerationClient{bad}, std::invalid_argument);
  bad = base_config("http://127.0.0.1:1");
  bad.max_in_flight = 0;
  CHECK_THROWS_AS(HttpGenerationClient{bad}, std::invalid_argument);
}

TEST_CASE("generate_batch preserves order and captures per-item errors") {
  mcqpipe::testing::LambdaClient client(
      [](const GenerationRequest& request) -> GenerationResponse {
        if (request.prompt == "boom-transport") {
          throw TransportError("no route");
        }
        if (request.prompt == "boom-protocol") {
          throw ProtocolError("bad shape");
        }
        if (request.prompt == "boom-credential") {
          throw CredentialError("bad key");
        }
        GenerationResponse r;
        r.text = "echo:" + request.prompt;
        return r;
      });

  std::vector<GenerationRequest> requests;
  for (int i = 0; i < 20; ++i) {
    requests.push_back({.prompt = "p" + std::to_string(i)});
  }
  requests[3].prompt = "boom-transport";
  requests[7].prompt = "boom-protocol";
  requests[11].prompt = "boom-credential";

  const auto outcomes = client.generate_batch(requests, 4);
  REQUIRE(outcomes.size() == requests.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (i == 3 || i == 7 || i == 11) continue;
    REQUIRE(outcomes[i].ok());
    CHECK(outcomes[i].response->text == "echo:" + requests[i].prompt);
    CHECK(outcomes[i].error.empty());
  }
  CHECK_FALSE(outcomes[3].ok());
  CHECK(outcomes[3].error_kind == "transport");
  CHECK(outcomes[3].error == "no route");
  CHECK(outcomes[7].error_kind == "protocol");
  CHECK(outcomes[11].error_kind == "credential");
  CHECK(client.calls() == requests.size());
}

TEST_CASE("generate_batch clamps parallelism") {
  mcqpipe::testing::LambdaClient client(
      [](const GenerationRequest& request) {
        GenerationResponse r;
        r.text = request.prompt;
        return r;
      });
  std::vector<GenerationRequest> requests{{.prompt = "only"}};
  // More workers than work and a non-positive count both behave.
  CHECK(client.generate_batch(requests, 64)[0].response->text == "only");
  CHECK(client.generate_batch(requests, 0)[0].response->text == "only");
  CHECK(client.generate_batch({}, 8).empty());
}

}  // TEST_SUITE
