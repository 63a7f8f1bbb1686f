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

#include <nlohmann/json_fwd.hpp>

#include "mcbo/errors.hpp"

namespace mcbo {

using NodeId = int;

// A set of hard-intervention targets: node ids, sorted ascending, no
// duplicates, never containing the reward node.  The empty set denotes
// pure observation.
using InterventionTargets = std::vector<NodeId>;

// Known causal diagram over the observed system variables.  Nodes are stored
// in topological order; the last node is the reward variable.  Each node i
// carries an observation dimension d_i >= 1 and an exogenous action
// dimension q_i >= 0 (q_i = 0 means the node accepts no direct action input).
// Action inputs are modelled as extra root vertices feeding only their node,
// so they appear here as dimensions rather than as graph nodes.
struct Dag {
  std::vector<std::vector<NodeId>> parents;  // per node, ascending
  std::vector<int> obs_dim;
  std::vector<int> action_dim;

  int num_nodes() const { return static_cast<int>(parents.size()); }
  NodeId reward_node() const { return num_nodes() - 1; }

  // Child adjacency derived from `parents`.
  std::vector<std::vector<NodeId>> children() const;

  // Total dimension of the parent observation vector z_i.
  int parent_obs_dim(NodeId i) const;
};

// Checks structural validity.  Throws, in this order of precedence:
//   ParentIndexOutOfRange - some parent id is negative or >= num_nodes
//   CycleDetected         - the edge set contains a directed cycle
//   BadTopoOrder          - acyclic, but some node lists a parent with a
//                           larger or equal index (stored order is not
//                           topological)
// Also rejects non-positive obs_dim / negative action_dim (DimMismatch).
void validate_dag(const Dag& dag);

// Longest directed distance from any root to a sink, where action inputs
// count as root vertices one edge above their node.  Equivalently
//   max_i [ longest path starting at i  +  (1 if action_dim[i] > 0) ].
// A chain of three observation-only nodes has depth 2; attaching actions to
// the first node makes it 3.
int max_depth(const Dag& dag);

// Largest number of observed parents over all nodes (action inputs excluded).
int max_parents(const Dag& dag);

// Filters a list of candidate hard-intervention target sets down to the
// minimal ones: a set I is dropped when some member i has every directed
// path to the reward blocked by the remaining members I \ {i} (clamping i
// then has no effect on the reward, so a strictly smaller set does the same
// job).  Members with no path to the reward at all are redundant for the
// same reason.  The empty set is always kept if present.  Output is
// de-duplicated and sorted by size, then lexicographically.
// Throws HardTargetIncludesReward / ParentIndexOutOfRange on malformed sets.
std::vector<InterventionTargets> minimal_intervention_sets(
    const Dag& dag, const std::vector<InterventionTargets>& candidates);

// JSON round-trip.  Schema:
//   {"nodes": [{"obs_dim": int, "action_dim": int, "parents": [int, ...]}, ...]}
// Nodes are listed in stored (topological) order; the last one is the reward.
// from-JSON validates the result before returning it.
Dag dag_from_json(const nlohmann::json& j);
nlohmann::json dag_to_json(const Dag& dag);

}  // namespace mcbo
