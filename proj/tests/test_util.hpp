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
#ifndef MCQPIPE_TESTS_TEST_UTIL_HPP_
#define MCQPIPE_TESTS_TEST_UTIL_HPP_

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mcqpipe/generation_client.hpp"
#include "mcqpipe/synthesizer.hpp"

namespace mcqpipe::testing {

// Self-cleaning unique directory under the system temp root.
class TempDir {
 public:
  TempDir() {
    const auto base = std::filesystem::temp_directory_path();
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    for (int i = 0; i < 64; ++i) {
      std::ostringstream name;
      name << "mcqpipe-test-" << rd() << "-" << counter.fetch_add(1);
      std::filesystem::path candidate = base / name.str();
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("could not create a temp directory");
  }

  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const {
    return path_ / leaf;
  }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read failed: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// GenerationClient whose replies come from a fixed script, in call order.
// The script repeats its last entry once exhausted. Thread-safe.
class SequenceClient : public GenerationClient {
 public:
  explicit SequenceClient(std::vector<GenerationResponse> script,
                          std::string model = "scripted")
      : script_(std::move(script)), model_(std::move(model)) {
    if (script_.empty()) {
      throw std::invalid_argument("SequenceClient needs at least one reply");
    }
  }

  static GenerationResponse text_reply(std::string text) {
    GenerationResponse r;
    r.text = std::move(text);
    r.finish_reason = FinishReason::stop;
    r.model_id = "scripted";
    return r;
  }

  GenerationResponse generate(const GenerationRequest& request) const override {
    std::lock_guard<std::mutex> lock(mutex_);
    requests_.push_back(request);
    const std::size_t idx =
        calls_ < script_.size() ? calls_ : script_.size() - 1;
    ++calls_;
    return script_[idx];
  }

  std::string model_id() const override { return model_; }

  std::size_t calls() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return calls_;
  }

  std::vector<GenerationRequest> requests() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return requests_;
  }

 private:
  std::vector<GenerationResponse> script_;
  std::string model_;
  mutable std::mutex mutex_;
  mutable std::size_t calls_ = 0;
  mutable std::vector<GenerationRequest> requests_;
};

// GenerationClient driven by an arbitrary callable; for error-injection
// tests. The callable may throw.
class LambdaClient : public GenerationClient {
 public:
  using Fn = std::function<GenerationResponse(const GenerationRequest&)>;

  explicit LambdaClient(Fn fn, std::string model = "lambda")
      : fn_(std::move(fn)), model_(std::move(model)) {}

  GenerationResponse generate(const GenerationRequest& request) const override {
    calls_.fetch_add(1);
    return fn_(request);
  }

  std::string model_id() const override { return model_; }

  std::size_t calls() const { return calls_.load(); }

 private:
  Fn fn_;
  std::string model_;
  mutable std::atomic<std::size_t> calls_{0};
};

inline SynthesisDraft make_draft(const std::string& source_id,
                                 Domain domain = Domain::math,
                                 std::size_t distractor_count = 8) {
  SynthesisDraft draft;
  draft.source_id = source_id;
  draft.domain = domain;
  draft.masked_text =
      "First we expand the product. [MASK] Therefore the result follows.";
  draft.ground_truth = "truth-" + source_id;
  for (std::size_t i = 0; i < distractor_count; ++i) {
    draft.distractors.push_back("alt-" + source_id + "-" + std::to_string(i));
  }
  return draft;
}

}  // namespace mcqpipe::testing

#endif  // MCQPIPE_TESTS_TEST_UTIL_HPP_
