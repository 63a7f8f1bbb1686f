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

#include <string>
#include <vector>

#include "mcbo/gp.hpp"
#include "mcbo/scm.hpp"

namespace mcbo {

// Benchmark catalog.  Exact mechanisms, boxes and noise levels are documented
// in TASKS.md; `noisy` switches on the per-task observation noise.
// Throws UnknownTask for names outside task_names().
Scm make_task(const std::string& name, bool noisy = false);

std::vector<std::string> task_names();

// Machine-readable definition of a catalog entry (diagram, boxes, formula
// strings, noise).  Used for manifests; hashing this pins the task version.
nlohmann::json task_definition_json(const std::string& name, bool noisy = false);

// Convenience diagram builders used by the synthetic tasks and tests.
// chain: X0 -> X1 -> ... -> X_{n-1}; every node gets obs_dim 1 and
// action_dims[i] action inputs (empty vector = no actions anywhere).
Dag chain_dag(int n_nodes, const std::vector<int>& action_dims = {});
// Complete binary tree with `leaves` leaf nodes (power of two), edges toward
// the root, which is the reward node.
Dag tree_dag(int leaves, const std::vector<int>& action_dims = {});

// A function with known norm in the reproducing space of `kernel`: a finite
// expansion f = sum_j alpha_j k(., c_j) with centers drawn uniformly from
// `domain` and alpha rescaled so the norm is exactly `norm_bound`.
struct RkhsFunction {
  Kernel kernel;
  std::vector<Eigen::VectorXd> centers;
  Eigen::VectorXd alpha;

  double eval(const Eigen::VectorXd& s) const;
  double norm() const;  // sqrt(alpha' K alpha)
};
RkhsFunction draw_rkhs_function(const Kernel& kernel, const Box& domain, int n_centers,
                                double norm_bound, Rng& rng);

// Random soft-intervention task whose mechanisms all lie in the reproducing
// space of `kernel` with norm exactly `norm_bound` -- the regularity the
// model-based algorithms assume, which makes these systems the right test
// bed for calibration and regret checks.  Mechanism outputs are bounded by
// norm_bound (since k <= 1), so observation boxes are set accordingly.
struct RkhsTaskParams {
  Kernel kernel;
  int n_centers = 20;
  double norm_bound = 1.0;
  double noise_std = 0.0;          // 0 = noiseless
  double action_halfwidth = 1.0;   // actions in [-w, w]
  double obs_margin = 0.5;         // obs_box halfwidth = norm_bound + 3*noise_std + margin
};
Scm make_rkhs_task(const Dag& dag, const RkhsTaskParams& params, std::uint64_t seed);

}  // namespace mcbo
