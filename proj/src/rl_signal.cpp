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
#include "mcqpipe/rl_signal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcqpipe {

namespace {

constexpr double kDegenerateStdThreshold = 1e-12;

double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

}  // namespace

std::vector<std::vector<double>> group_center(
    const std::vector<RewardGroup>& groups) {
  std::vector<std::vector<double>> centered;
  centered.reserve(groups.size());
  for (const auto& group : groups) {
    if (group.rewards.empty()) {
      throw std::invalid_argument("group_center: empty reward group '" +
                                  group.prompt_id + "'");
    }
    double mu = mean_of(group.rewards);
    std::vector<double> out;
    out.reserve(group.rewards.size());
    for (double r : group.rewards) out.push_back(r - mu);
    centered.push_back(std::move(out));
  }
  return centered;
}

StandardizedValues batch_standardize(const std::vector<double>& centered) {
  if (centered.empty()) {
    throw std::invalid_argument("batch_standardize: empty batch");
  }
  StandardizedValues result;
  result.mean = mean_of(centered);
  double var = 0.0;
  for (double x : centered) {
    double d = x - result.mean;
    var += d * d;
  }
  // Population variance: the batch is the whole distribution here, it is
  // not a sample from a larger one.
  var /= static_cast<double>(centered.size());
  result.std_dev = std::sqrt(var);

  result.values.reserve(centered.size());
  if (result.std_dev < kDegenerateStdThreshold) {
    result.degenerate = true;
    result.values.assign(centered.size(), 0.0);
    return result;
  }
  for (double x : centered) {
    result.values.push_back((x - result.mean) / result.std_dev);
  }
  return result;
}

double clipped_term(double ratio, double advantage, double eps_low,
                    double eps_high) {
  if (!(ratio > 0.0)) {
    throw std::domain_error("clipped_term: ratio must be > 0");
  }
  if (!(eps_low > 0.0) || !(eps_high > 0.0)) {
    throw std::domain_error("clipped_term: eps_low and eps_high must be > 0");
  }
  double clipped = std::clamp(ratio, 1.0 - eps_low, 1.0 + eps_high);
  return std::min(ratio * advantage, clipped * advantage);
}

std::vector<RewardGroup> drop_degenerate_groups(
    const std::vector<RewardGroup>& groups) {
  std::vector<RewardGroup> retained;
  for (const auto& group : groups) {
    if (group.rewards.empty()) continue;
    auto [lo, hi] =
        std::minmax_element(group.rewards.begin(), group.rewards.end());
    if (*lo != *hi) retained.push_back(group);
  }
  return retained;
}

AdvantageBatch compute_advantages(const std::vector<RewardGroup>& groups) {
  auto centered = group_center(groups);

  std::vector<double> flat;
  for (const auto& g : centered) flat.insert(flat.end(), g.begin(), g.end());
  auto standardized = batch_standardize(flat);

  AdvantageBatch batch;
  batch.batch_mean = standardized.mean;
  batch.batch_std = standardized.std_dev;
  batch.degenerate = standardized.degenerate;
  batch.entries.reserve(flat.size());
  std::size_t cursor = 0;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    for (std::size_t ri = 0; ri < centered[gi].size(); ++ri) {
      batch.entries.push_back({groups[gi].prompt_id, static_cast<int>(ri),
                               standardized.values[cursor++]});
    }
  }
  return batch;
}

}  // namespace mcqpipe
