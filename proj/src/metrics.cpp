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

#include "mcbo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcbo {

std::vector<double> cumulative_regret(const std::vector<RoundRecord>& records, double optimum) {
  std::vector<double> out;
  out.reserve(records.size());
  double acc = 0.0;
  for (const auto& r : records) {
    acc += optimum - r.expected_reward;
    out.push_back(acc);
  }
  return out;
}

std::vector<double> reward_sum(const std::vector<RoundRecord>& records) {
  std::vector<double> out;
  out.reserve(records.size());
  double acc = 0.0;
  for (const auto& r : records) {
    acc += r.expected_reward;
    out.push_back(acc);
  }
  return out;
}

std::vector<double> average_reward(const std::vector<RoundRecord>& records) {
  std::vector<double> out = reward_sum(records);
  for (size_t t = 0; t < out.size(); ++t) out[t] /= static_cast<double>(t + 1);
  return out;
}

std::vector<double> best_reward(const std::vector<RoundRecord>& records) {
  std::vector<double> out;
  out.reserve(records.size());
  double acc = -std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    acc = std::max(acc, r.expected_reward);
    out.push_back(acc);
  }
  return out;
}

AggregateCurve aggregate_seeds(const std::vector<std::vector<double>>& per_seed) {
  if (per_seed.empty()) throw LengthMismatch("no curves to aggregate");
  const size_t len = per_seed[0].size();
  for (const auto& c : per_seed)
    if (c.size() != len) throw LengthMismatch("curves differ in length");

  AggregateCurve out;
  out.mean.resize(len);
  out.stderr_.resize(len);
  const double n = static_cast<double>(per_seed.size());
  for (size_t t = 0; t < len; ++t) {
    double sum = 0.0;
    for (const auto& c : per_seed) sum += c[t];
    const double mean = sum / n;
    out.mean[t] = mean;
    if (per_seed.size() < 2) {
      out.stderr_[t] = 0.0;
      continue;
    }
    double ss = 0.0;
    for (const auto& c : per_seed) ss += (c[t] - mean) * (c[t] - mean);
    out.stderr_[t] = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

}  // namespace mcbo
