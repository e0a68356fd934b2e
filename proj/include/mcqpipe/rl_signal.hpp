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
#ifndef MCQPIPE_RL_SIGNAL_HPP_
#define MCQPIPE_RL_SIGNAL_HPP_

#include <string>
#include <vector>

namespace mcqpipe {

// All rollout rewards for one prompt.
struct RewardGroup {
  std::string prompt_id;
  std::vector<double> rewards;
};

struct AdvantageEntry {
  std::string prompt_id;
  int rollout_index = 0;
  double advantage = 0.0;
};

// Rewards after group-wise mean subtraction and batch-level standardization.
// batch_mean / batch_std are the statistics of the centered values that the
// standardization divided out, kept for traceability. A batch whose centered
// values have (near-)zero variance is degenerate: every advantage is 0.
struct AdvantageBatch {
  std::vector<AdvantageEntry> entries;
  double batch_mean = 0.0;
  double batch_std = 0.0;
  bool degenerate = false;
};

struct StandardizedValues {
  std::vector<double> values;
  double mean = 0.0;
  double std_dev = 0.0;  // population
  bool degenerate = false;
};

// Subtracts each group's own mean from its rewards. Output sums to zero
// within every group. Throws std::invalid_argument on an empty group.
std::vector<std::vector<double>> group_center(
    const std::vector<RewardGroup>& groups);

// Subtracts the batch mean and divides by the population standard deviation.
// If the standard deviation is below 1e-12 the batch is degenerate and all
// outputs are 0. Throws std::invalid_argument on empty input.
StandardizedValues batch_standardize(const std::vector<double>& centered);

// One term of the clipped surrogate objective:
//   min(ratio * advantage, clip(ratio, 1-eps_low, 1+eps_high) * advantage)
// Throws std::domain_error unless ratio > 0 and both eps are > 0.
double clipped_term(double ratio, double advantage, double eps_low,
                    double eps_high);

// Drops groups whose rewards are all equal: all-success and all-failure
// prompts contribute no gradient signal.
std::vector<RewardGroup> drop_degenerate_groups(
    const std::vector<RewardGroup>& groups);

// group_center followed by batch_standardize, with (prompt_id, rollout_index)
// carried through. This is the exact quantity a trainer consumes.
AdvantageBatch compute_advantages(const std::vector<RewardGroup>& groups);

}  // namespace mcqpipe

#endif  // MCQPIPE_RL_SIGNAL_HPP_
