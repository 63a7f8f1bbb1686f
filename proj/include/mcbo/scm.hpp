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

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "mcbo/graph.hpp"
#include "mcbo/rng.hpp"

namespace mcbo {

// Axis-aligned box; lo/hi are per-dimension bounds.
struct Box {
  Eigen::VectorXd lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Eigen::VectorXd& v) const;
  Eigen::VectorXd clamp(const Eigen::VectorXd& v) const;
  Eigen::VectorXd sample(Rng& rng) const;
  static Box cube(int dim, double lo, double hi);
};

// Structural mechanism for one node: x_i = f_i(z_i, a_i) + noise, where z_i
// concatenates the parent observations (ascending parent id) and a_i is the
// node's own action input (possibly empty).
using MechanismFn =
    std::function<Eigen::VectorXd(const Eigen::VectorXd& z, const Eigen::VectorXd& a)>;

// Additive exogenous noise on one node.
struct NoiseSpec {
  enum class Kind { None, Gaussian };
  Kind kind = Kind::None;
  Eigen::VectorXd stddev;  // per output component (Gaussian only)

  static NoiseSpec none() { return {}; }
  static NoiseSpec gaussian(int dim, double stddev);
  bool is_none() const { return kind == Kind::None; }
};

// Maps each node's local action components to slots of one flat action
// vector.  Tasks where several nodes read the same physical control share
// slots; everything downstream (optimization, oracle search, logging)
// operates on the flat vector.
struct ActionLayout {
  int total_dim = 0;
  std::vector<std::vector<int>> slots;  // per node: global slot per local component

  // One private slot per local component, in node order.
  static ActionLayout disjoint(const std::vector<int>& action_dims);
};

enum class TaskMode {
  Cbo,              // reward node takes no action; hard interventions may exist
  FunctionNetwork,  // every node may take actions; soft interventions only
};

// Fully specified environment: known diagram, ground-truth mechanisms and
// noise, and the intervention space the agent is allowed to search.
struct Scm {
  Dag dag;
  std::vector<MechanismFn> mechanisms;
  std::vector<NoiseSpec> noise;
  ActionLayout layout;
  Box action_box;                  // over flat action slots
  std::vector<Box> obs_box;        // per node: range the observations live in
                                   // (used to normalize model inputs; not enforced)
  std::vector<Box> hard_box;       // per node: allowed clamp values (dim 0 = not clampable)
  std::vector<InterventionTargets> candidate_targets;  // hard mode; may include {}
  int cardinality_limit = -1;      // max nodes with nonzero action; -1 = unconstrained
  TaskMode mode = TaskMode::Cbo;

  std::string name;                        // catalog id, empty for ad-hoc systems
  std::vector<std::string> mechanism_doc;  // per node, human-readable formula

  bool noiseless() const;
  int num_nodes() const { return dag.num_nodes(); }
};

// One action choice presented to the environment.
struct Intervention {
  enum class Kind { Observational, Soft, Hard };
  Kind kind = Kind::Observational;

  // Soft: one action vector per node (size action_dim[i]; empty if 0).
  std::vector<Eigen::VectorXd> actions;

  // Hard: clamp obs of `targets[k]` to `values[k]`; everything else evolves
  // naturally (no action inputs, no noise on clamped nodes).
  InterventionTargets targets;
  std::vector<Eigen::VectorXd> values;

  static Intervention observational() { return {}; }
  static Intervention soft(std::vector<Eigen::VectorXd> per_node_actions);
  // Builds the per-node actions from a flat vector via the task's layout.
  static Intervention soft_flat(const Scm& scm, const Eigen::VectorXd& flat);
  static Intervention hard(InterventionTargets targets, std::vector<Eigen::VectorXd> values);

  // Compact, layout-independent JSON (used verbatim in CSV logs).
  nlohmann::json to_json() const;
};

// Flat action vector for a soft/observational intervention (checks that
// shared slots agree).  Observational maps to all zeros.
Eigen::VectorXd flat_actions(const Scm& scm, const Intervention& iv);

// Per-node action vectors from a flat vector, via the layout.
std::vector<Eigen::VectorXd> split_flat_actions(const ActionLayout& layout,
                                                const Eigen::VectorXd& flat);

struct Sample {
  std::vector<Eigen::VectorXd> obs;  // per node
  double reward = 0.0;               // obs of the reward node, component 0
};

// Throws on malformed interventions:
//   DimMismatch               - wrong number / size of action or value vectors,
//                               or shared slots with conflicting values
//   ActionOutOfBox            - action outside action_box, clamp outside hard_box,
//                               or clamp on a node with no hard_box
//   CardinalityViolated       - more nodes with nonzero actions than the limit
//   HardTargetIncludesReward  - reward node among hard targets
//   ParentIndexOutOfRange     - hard target id out of range
void validate_intervention(const Scm& scm, const Intervention& iv);

// One ancestral rollout.  Nodes are evaluated in stored (topological) order;
// noise is drawn in that same order, and only for non-clamped nodes, so the
// consumed random stream is a pure function of (intervention, node order).
Sample simulate(const Scm& scm, const Intervention& iv, Rng& rng);

// Monte-Carlo estimate of E[reward | intervention] over n_mc rollouts.
// Noiseless systems short-circuit to a single rollout (the estimate is exact).
double expected_reward(const Scm& scm, const Intervention& iv, int n_mc, Rng& rng);

// Gold-standard optimum by dense grid search + MC evaluation.
//
// Soft / function-network mode: grids the flat action box with grid_per_dim
// points per dimension (cardinality limits are honored by enumerating active
// supports and zeroing the rest).  Hard mode: grids the clamp box of every
// candidate target set.  All points are evaluated with common random numbers
// (one rng fork reused per point) so the argmax is not noise-dominated.
// Throws GridBudgetExceeded if the total number of grid points would exceed
// `budget`, and NoFeasibleCandidate if there is nothing to search.
struct OracleResult {
  Intervention best;
  double value = 0.0;
};
OracleResult oracle_best(const Scm& scm, int grid_per_dim, int n_mc, Rng& rng,
                         long budget = 20'000'000);

// --- custom tasks -----------------------------------------------------------

// Factory for one node's mechanism, dispatched by name from scm_from_json.
// Receives the mechanism's JSON parameter object and the node's shape and
// returns a MechanismFn producing out_dim components.
using MechanismFactory = std::function<MechanismFn(const nlohmann::json& params, int z_dim,
                                                   int a_dim, int out_dim)>;

// Registers (or replaces) a named mechanism family for scm_from_json.
// Built-in names: zero, constant, linear, tanh_linear, neg_quadratic,
// gauss_bump, sin_pi, and stack (per-component list of the scalar families).
// Not thread-safe; register before building tasks.
void register_mechanism(const std::string& name, MechanismFactory factory);
std::vector<std::string> mechanism_names();

// Builds a custom task from a JSON document (schema documented in README.md):
// the node-list diagram schema plus boxes, noise levels and named mechanisms.
// Throws UnknownTask for unregistered mechanism names, Error for malformed
// documents, and the usual diagram validation errors otherwise.
Scm scm_from_json(const nlohmann::json& j);

}  // namespace mcbo
