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

#include <cstdint>
#include <vector>

#include "mcbo/acquisition.hpp"
#include "mcbo/gp.hpp"
#include "mcbo/scm.hpp"

namespace mcbo {

enum class Algo {
  Mcbo,         // model-based, soft interventions
  McboHard,     // model-based, hard interventions over minimal target sets
  UcbBaseline,  // single GP from the flat action vector to the reward
};

enum class EtaKind {
  Auto,      // Constant on noiseless systems, Net otherwise
  Constant,
  Net,
};

struct OracleConfig {
  int grid_per_dim = 25;
  int n_mc = 2000;
  long budget = 20'000'000;
};

struct RunConfig {
  Algo algo = Algo::Mcbo;
  double beta = 0.5;        // constant confidence multiplier for the whole run
  int rounds = 100;
  std::uint64_t seed = 0;
  Kernel kernel{};          // per-node model kernel (one shared spec)
  double model_noise_floor = 1e-6;  // model rho^2 for noiseless nodes
  EtaKind eta = EtaKind::Auto;
  AcqConfig acq{};
  OracleConfig oracle{};    // n_mc also drives the per-round reward evaluation

  // Initialization protocols.  Observe-or-clamp systems: `init_obs`
  // observational samples plus `init_per_target` uniform clamps per
  // non-empty minimal target set.  Function networks: 2*A + init_fn_extra
  // uniform random actions, A = flat action dimension.
  int init_obs = 10;
  int init_per_target = 2;
  int init_fn_extra = 1;
};

struct RoundRecord {
  int round = 0;  // 1-based
  Intervention intervention;
  double observed_reward = 0.0;  // realized sample
  double expected_reward = 0.0;  // oracle MC evaluation of the chosen intervention
  double acq_value = 0.0;        // optimizer's optimistic value
  double wall_ms = 0.0;          // measured; excluded from deterministic outputs
};

struct RunResult {
  std::vector<RoundRecord> records;
  // Predictive variance at each round's queried input, per model, recorded
  // before the update (zero rows for clamped nodes).  Model-based algorithms
  // have one entry per node; the baseline has a single model.
  std::vector<std::vector<Eigen::VectorXd>> var_trace;
  std::vector<double> info_gain;  // cumulative information gain per round, summed over models
  int init_env_calls = 0;
};

// Initial datasets produced by the protocol above (counted env calls).
struct InitData {
  std::vector<GpDataset> node_data;      // per node: ([z; a], x) rows
  GpDataset action_reward_data;          // (flat action, reward) rows, baseline
  int env_calls = 0;
};
InitData init_data(const Scm& scm, const RunConfig& cfg, Rng rng);

// One full run of the selected algorithm.  Every random choice derives from
// cfg.seed through keyed substreams, so runs are bit-reproducible.
RunResult run_algorithm(const Scm& scm, const RunConfig& cfg);

RunResult mcbo_run(const Scm& scm, const RunConfig& cfg);
RunResult mcbo_hard_run(const Scm& scm, const RunConfig& cfg);
RunResult ucb_baseline_run(const Scm& scm, const RunConfig& cfg);

}  // namespace mcbo
