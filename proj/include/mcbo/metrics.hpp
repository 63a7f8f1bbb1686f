// Copyright 2026 The mcbo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <vector>

#include "mcbo/engine.hpp"

namespace mcbo {

// All curves are indexed by round (entry t covers rounds 1..t+1) and are
// computed from the oracle-evaluated expected reward of each chosen
// intervention, not the noisy realized sample.

// R_t = sum_{s<=t} (optimum - expected_reward_s).
std::vector<double> cumulative_regret(const std::vector<RoundRecord>& records, double optimum);

// Running sum of expected rewards (unnormalized).
std::vector<double> reward_sum(const std::vector<RoundRecord>& records);

// Running sum divided by the number of rounds so far.
std::vector<double> average_reward(const std::vector<RoundRecord>& records);

// Running maximum of expected rewards.
std::vector<double> best_reward(const std::vector<RoundRecord>& records);

// Pointwise mean and standard error (sample stddev / sqrt(n)) across seeds.
// A single curve yields zero stderr.  Throws LengthMismatch if the curves
// disagree in length or the list is empty.
struct AggregateCurve {
  std::vector<double> mean;
  std::vector<double> stderr_;
};
AggregateCurve aggregate_seeds(const std::vector<std::vector<double>>& per_seed);

}  // namespace mcbo
