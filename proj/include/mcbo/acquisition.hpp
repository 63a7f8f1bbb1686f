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
#include <vector>

#include <Eigen/Dense>

#include "mcbo/eta.hpp"
#include "mcbo/gp.hpp"
#include "mcbo/scm.hpp"

namespace mcbo {

// The agent-visible slice of a task: diagram, action/observation geometry and
// noise law -- everything except the ground-truth mechanisms.  Acquisition
// code only ever sees this type, which makes "the optimizer cannot peek at
// the true functions" a compile-time property rather than a convention.
struct InterventionSpace {
  Dag dag;
  ActionLayout layout;
  Box action_box;
  std::vector<Box> obs_box;
  std::vector<Box> hard_box;
  std::vector<InterventionTargets> candidate_targets;  // hard mode, minimal sets
  int cardinality_limit = -1;
  TaskMode mode = TaskMode::Cbo;
  std::vector<NoiseSpec> noise;

  static InterventionSpace from(const Scm& scm);
  bool noiseless() const;
  int num_nodes() const { return dag.num_nodes(); }
};

// One plausible system: per-node posteriors define the confidence bands,
// beta scales them, and the selectors pick a mechanism inside each band:
//   x_i = mu_i(s_i) + beta * sigma_i(s_i) . eta_i(u_i) + noise.
struct PlausibleModel {
  const std::vector<GpPosterior>* posteriors = nullptr;  // per node, non-owning
  double beta = 0.0;
  std::vector<EtaParam> etas;  // per node
};

// Model inputs are normalized to the unit box before entering a selector so
// selector weights are scale-free: z components via obs_box of the parents,
// action components via the node's action_box slots.
Eigen::VectorXd normalized_model_input(const InterventionSpace& space, NodeId i,
                                       const Eigen::VectorXd& z, const Eigen::VectorXd& a);

// Selector as a plain function of the raw node inputs; lets tests and
// diagnostics drive the rollout with selectors that are not EtaParam
// instances (e.g. band-inversion constructions).
using EtaFn = std::function<Eigen::VectorXd(NodeId, const Eigen::VectorXd& z,
                                            const Eigen::VectorXd& a)>;

// One fixed noise outcome: per node, an additive disturbance vector
// (zero for noiseless nodes).  Clamped nodes ignore theirs.
using NoiseDraw = std::vector<Eigen::VectorXd>;

// n_mc independent draws, consumed in node order within each draw.
std::vector<NoiseDraw> draw_noise_set(const InterventionSpace& space, int n_mc, Rng& rng);

// Rolls the intervention through the plausible system under one fixed noise
// outcome (same clamping semantics as simulate()).
Sample reparam_rollout(const std::vector<GpPosterior>& posteriors, double beta,
                       const EtaFn& eta_fn, const InterventionSpace& space,
                       const Intervention& iv, const NoiseDraw& noise_draw);
Sample reparam_rollout(const PlausibleModel& model, const InterventionSpace& space,
                       const Intervention& iv, const NoiseDraw& noise_draw);

// Monte-Carlo acquisition value: mean plausible reward over the draw set.
double acq_value(const PlausibleModel& model, const InterventionSpace& space,
                 const Intervention& iv, const std::vector<NoiseDraw>& draws);

// Value plus exact reverse-mode gradients through the rollout, averaged over
// the draw set.  d_flat is w.r.t. the flat action vector (soft) and d_values
// w.r.t. the concatenated clamp values (hard); d_eta[i] is w.r.t. the
// flattened parameters of selector i (empty for clamped nodes).
struct AcqEval {
  double value = 0.0;
  Eigen::VectorXd d_flat;
  Eigen::VectorXd d_values;
  std::vector<Eigen::VectorXd> d_eta;
};
AcqEval acq_value_grad(const PlausibleModel& model, const InterventionSpace& space,
                       const Intervention& iv, const std::vector<NoiseDraw>& draws);

struct AcqConfig {
  int n_mc = 32;            // noise draws (noiseless systems use 1: the mean is exact)
  int raw_candidates = 100; // random starts scored before refinement
  int restarts = 10;        // top starts refined by gradient ascent
  int grad_steps = 100;
  double step_size = 0.05;  // on unit-box-normalized variables
  int eta_hidden = 32;      // TwoLayerNet hidden width
  bool eta_net = false;     // false: Constant selectors (noiseless default)
  int support_enum_limit = 512;  // max enumerated supports under a cardinality cap
  std::uint64_t seed = 0;   // substream key; the engine varies this per round
};

struct AcqResult {
  Intervention best;
  std::vector<EtaParam> etas;
  double value = 0.0;  // optimistic model value at the chosen point
};

// Maximizes the acquisition over interventions and selectors.
//
// Soft / function-network mode: multi-restart projected gradient ascent over
// (flat action, selector parameters).  Cardinality caps are handled by
// enumerating active supports when their count fits support_enum_limit,
// otherwise greedily (support of the top-c nodes by single-node value).
// Hard mode: the same refinement runs once per candidate target set
// (clamp values + selectors of non-clamped nodes); the best set wins.
// Ties break toward the earlier candidate, so results are deterministic
// given (posteriors, beta, space, cfg, rng state).
// Throws NoFeasibleCandidate if the space offers nothing to optimize.
AcqResult optimize_acq(const std::vector<GpPosterior>& posteriors, double beta,
                       const InterventionSpace& space, const AcqConfig& cfg, Rng& rng);

// Plain UCB argmax for the single-model baseline: maximizes
// mean(a) + beta * sigma(a) of `gp` over the box by the same multi-restart
// ascent.  Returns the flat action vector.
Eigen::VectorXd ucb_argmax(const GpPosterior& gp, const Box& box, double beta,
                           const AcqConfig& cfg, Rng& rng);

}  // namespace mcbo
