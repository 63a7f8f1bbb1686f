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

#include "mcbo/graph.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

namespace mcbo {

std::vector<std::vector<NodeId>> Dag::children() const {
  std::vector<std::vector<NodeId>> ch(parents.size());
  for (NodeId i = 0; i < num_nodes(); ++i)
    for (NodeId p : parents[i]) ch[p].push_back(i);
  return ch;
}

int Dag::parent_obs_dim(NodeId i) const {
  int d = 0;
  for (NodeId p : parents[i]) d += obs_dim[p];
  return d;
}

void validate_dag(const Dag& dag) {
  const int m = dag.num_nodes();
  if (m == 0) throw DimMismatch("dag has no nodes");
  if (static_cast<int>(dag.obs_dim.size()) != m ||
      static_cast<int>(dag.action_dim.size()) != m)
    throw DimMismatch("obs_dim/action_dim length does not match node count");
  for (int i = 0; i < m; ++i) {
    if (dag.obs_dim[i] < 1)
      throw DimMismatch("obs_dim must be >= 1 at node " + std::to_string(i));
    if (dag.action_dim[i] < 0)
      throw DimMismatch("action_dim must be >= 0 at node " + std::to_string(i));
  }

  // 1. Parent ids in range.
  for (NodeId i = 0; i < m; ++i)
    for (NodeId p : dag.parents[i])
      if (p < 0 || p >= m)
        throw ParentIndexOutOfRange("node " + std::to_string(i) +
                                    " lists parent " + std::to_string(p));

  // 2. Acyclicity (Kahn), independent of the stored order.
  std::vector<int> indeg(m, 0);
  auto ch = dag.children();
  for (NodeId i = 0; i < m; ++i) indeg[i] = static_cast<int>(dag.parents[i].size());
  std::queue<NodeId> q;
  for (NodeId i = 0; i < m; ++i)
    if (indeg[i] == 0) q.push(i);
  int seen = 0;
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop();
    ++seen;
    for (NodeId v : ch[u])
      if (--indeg[v] == 0) q.push(v);
  }
  if (seen != m) throw CycleDetected("directed cycle among " + std::to_string(m - seen) + " node(s)");

  // 3. Stored order must itself be topological.
  for (NodeId i = 0; i < m; ++i)
    for (NodeId p : dag.parents[i])
      if (p >= i)
        throw BadTopoOrder("node " + std::to_string(i) + " precedes its parent " +
                           std::to_string(p) + " in stored order");
}

namespace {

// Longest path (in edges) starting at each node, over the observation graph.
std::vector<int> longest_path_from(const Dag& dag) {
  const int m = dag.num_nodes();
  auto ch = dag.children();
  std::vector<int> lp(m, 0);
  for (NodeId i = m - 1; i >= 0; --i)
    for (NodeId c : ch[i]) lp[i] = std::max(lp[i], 1 + lp[c]);
  return lp;
}

// True iff `from` reaches the reward node through directed edges without
// passing through any node in `blocked` (the start itself is exempt).
bool reaches_reward(const Dag& dag, NodeId from, const std::vector<char>& blocked) {
  const NodeId reward = dag.reward_node();
  if (from == reward) return true;
  auto ch = dag.children();
  std::vector<char> visited(dag.num_nodes(), 0);
  std::vector<NodeId> stack{from};
  visited[from] = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (NodeId v : ch[u]) {
      if (v == reward) return true;
      if (visited[v] || blocked[v]) continue;
      visited[v] = 1;
      stack.push_back(v);
    }
  }
  return false;
}

}  // namespace

int max_depth(const Dag& dag) {
  validate_dag(dag);
  auto lp = longest_path_from(dag);
  int depth = 0;
  for (NodeId i = 0; i < dag.num_nodes(); ++i)
    depth = std::max(depth, lp[i] + (dag.action_dim[i] > 0 ? 1 : 0));
  return depth;
}

int max_parents(const Dag& dag) {
  validate_dag(dag);
  int k = 0;
  for (const auto& ps : dag.parents) k = std::max(k, static_cast<int>(ps.size()));
  return k;
}

std::vector<InterventionTargets> minimal_intervention_sets(
    const Dag& dag, const std::vector<InterventionTargets>& candidates) {
  validate_dag(dag);
  const int m = dag.num_nodes();
  const NodeId reward = dag.reward_node();

  std::set<InterventionTargets> kept;
  for (const auto& raw : candidates) {
    InterventionTargets targets = raw;
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    for (NodeId t : targets) {
      if (t == reward)
        throw HardTargetIncludesReward("target set includes the reward node");
      if (t < 0 || t >= m)
        throw ParentIndexOutOfRange("target " + std::to_string(t) + " out of range");
    }

    bool minimal = true;
    for (NodeId t : targets) {
      std::vector<char> blocked(m, 0);
      for (NodeId o : targets)
        if (o != t) blocked[o] = 1;
      if (!reaches_reward(dag, t, blocked)) {
        // Clamping t cannot move the reward given the rest of the set.
        minimal = false;
        break;
      }
    }
    if (minimal) kept.insert(std::move(targets));
  }

  std::vector<InterventionTargets> out(kept.begin(), kept.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return out;
}

Dag dag_from_json(const nlohmann::json& j) {
  if (!j.contains("nodes") || !j["nodes"].is_array())
    throw DimMismatch("dag json: missing \"nodes\" array");
  Dag dag;
  for (const auto& node : j["nodes"]) {
    dag.obs_dim.push_back(node.value("obs_dim", 1));
    dag.action_dim.push_back(node.value("action_dim", 0));
    std::vector<NodeId> ps = node.value("parents", std::vector<NodeId>{});
    std::sort(ps.begin(), ps.end());
    dag.parents.push_back(std::move(ps));
  }
  validate_dag(dag);
  return dag;
}

nlohmann::json dag_to_json(const Dag& dag) {
  nlohmann::json nodes = nlohmann::json::array();
  for (NodeId i = 0; i < dag.num_nodes(); ++i) {
    nodes.push_back({{"obs_dim", dag.obs_dim[i]},
                     {"action_dim", dag.action_dim[i]},
                     {"parents", dag.parents[i]}});
  }
  return {{"nodes", nodes}};
}

}  // namespace mcbo
