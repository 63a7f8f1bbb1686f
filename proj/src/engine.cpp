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

#include "mcbo/engine.hpp"

#include <chrono>
#include <cmath>

#include "mcbo/graph.hpp"

namespace mcbo {

namespace {

// Substream keys; offsets keep per-round streams disjoint across purposes.
constexpr std::uint64_t kInitStream = 17;
constexpr std::uint64_t kAcqStream = 1'000'000;
constexpr std::uint64_t kEnvStream = 2'000'000;
constexpr std::uint64_t kEvalStream = 3'000'000;

double node_noise_var(const Scm& scm, NodeId i, double floor) {
  if (scm.noise[i].kind == NoiseSpec::Kind::Gaussian) {
    const double s = scm.noise[i].stddev(0);
    return std::max(s * s, floor);
  }
  return floor;
}

// Model input [z; a] for node i given the realized sample and intervention.
Eigen::VectorXd node_input(const Scm& scm, const Sample& sample, const Intervention& iv,
                           NodeId i) {
  Eigen::VectorXd z(scm.dag.parent_obs_dim(i));
  int at = 0;
  for (NodeId p : scm.dag.parents[i]) {
    z.segment(at, sample.obs[p].size()) = sample.obs[p];
    at += static_cast<int>(sample.obs[p].size());
  }
  Eigen::VectorXd a = (iv.kind == Intervention::Kind::Soft)
                          ? iv.actions[i]
                          : Eigen::VectorXd::Zero(scm.dag.action_dim[i]);
  Eigen::VectorXd s(z.size() + a.size());
  s << z, a;
  return s;
}

// Adds one environment sample to the per-node datasets (skipping clamped nodes).
void absorb_sample(const Scm& scm, const Sample& sample, const Intervention& iv,
                   std::vector<GpDataset>& data) {
  std::vector<char> clamped(scm.num_nodes(), 0);
  if (iv.kind == Intervention::Kind::Hard)
    for (NodeId t : iv.targets) clamped[t] = 1;
  for (NodeId i = 0; i < scm.num_nodes(); ++i) {
    if (clamped[i]) continue;
    data[i].add(node_input(scm, sample, iv, i), sample.obs[i]);
  }
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

InitData init_data(const Scm& scm, const RunConfig& cfg, Rng rng) {
  InitData out;
  const int m = scm.num_nodes();
  out.node_data.resize(m);
  for (NodeId i = 0; i < m; ++i) {
    out.node_data[i].noise_var = node_noise_var(scm, i, cfg.model_noise_floor);
    out.node_data[i].in_dim_hint = scm.dag.parent_obs_dim(i) + scm.dag.action_dim[i];
    out.node_data[i].out_dim_hint = scm.dag.obs_dim[i];
  }
  out.action_reward_data.noise_var =
      node_noise_var(scm, scm.dag.reward_node(), cfg.model_noise_floor);
  out.action_reward_data.in_dim_hint = scm.layout.total_dim;
  out.action_reward_data.out_dim_hint = 1;

  auto take = [&](const Intervention& iv) {
    Sample s = simulate(scm, iv, rng);
    absorb_sample(scm, s, iv, out.node_data);
    if (scm.layout.total_dim > 0 && iv.kind != Intervention::Kind::Hard) {
      Eigen::VectorXd y(1);
      y(0) = s.reward;
      out.action_reward_data.add(flat_actions(scm, iv), y);
    }
    ++out.env_calls;
  };

  if (scm.mode == TaskMode::Cbo) {
    for (int k = 0; k < cfg.init_obs; ++k) take(Intervention::observational());
    const auto sets = minimal_intervention_sets(scm.dag, scm.candidate_targets);
    for (const auto& targets : sets) {
      if (targets.empty()) continue;  // covered by the observational samples
      for (int k = 0; k < cfg.init_per_target; ++k) {
        std::vector<Eigen::VectorXd> values;
        for (NodeId t : targets) values.push_back(scm.hard_box[t].sample(rng));
        take(Intervention::hard(targets, std::move(values)));
      }
    }
  } else {
    const int n = 2 * scm.layout.total_dim + cfg.init_fn_extra;
    for (int k = 0; k < n; ++k)
      take(Intervention::soft_flat(scm, scm.action_box.sample(rng)));
  }
  return out;
}

namespace {

RunResult run_model_based(const Scm& scm, const RunConfig& cfg, bool hard) {
  const int m = scm.num_nodes();
  Rng root(cfg.seed);

  InterventionSpace space = InterventionSpace::from(scm);
  if (hard) {
    space.candidate_targets = minimal_intervention_sets(scm.dag, scm.candidate_targets);
    if (space.candidate_targets.empty())
      throw NoFeasibleCandidate("hard-intervention run on a task without candidate targets");
  } else {
    space.candidate_targets.clear();  // soft search only
    if (space.layout.total_dim == 0)
      throw NoFeasibleCandidate("soft-intervention run on a task without action inputs");
  }

  AcqConfig acq = cfg.acq;
  acq.eta_net = cfg.eta == EtaKind::Auto ? !scm.noiseless() : cfg.eta == EtaKind::Net;

  InitData init = init_data(scm, cfg, root.fork(kInitStream));
  std::vector<GpDataset> data = std::move(init.node_data);

  RunResult out;
  out.init_env_calls = init.env_calls;
  out.var_trace.resize(m);
  double ig_total = 0.0;

  for (int t = 1; t <= cfg.rounds; ++t) {
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<GpPosterior> posteriors;
    posteriors.reserve(m);
    for (NodeId i = 0; i < m; ++i) posteriors.emplace_back(cfg.kernel, data[i]);

    Rng acq_rng = root.fork(kAcqStream + t);
    AcqResult ar = optimize_acq(posteriors, cfg.beta, space, acq, acq_rng);

    Rng env_rng = root.fork(kEnvStream + t);
    const Sample sample = simulate(scm, ar.best, env_rng);

    Rng eval_rng = root.fork(kEvalStream + t);
    const double er = expected_reward(scm, ar.best, cfg.oracle.n_mc, eval_rng);

    // Record pre-update variances at the realized inputs, then absorb.
    std::vector<char> clamped(m, 0);
    if (ar.best.kind == Intervention::Kind::Hard)
      for (NodeId tt : ar.best.targets) clamped[tt] = 1;
    for (NodeId i = 0; i < m; ++i) {
      if (clamped[i]) {
        out.var_trace[i].push_back(Eigen::VectorXd::Zero(scm.dag.obs_dim[i]));
        continue;
      }
      const Eigen::VectorXd s_i = node_input(scm, sample, ar.best, i);
      const Eigen::VectorXd v = posteriors[i].var(s_i);
      out.var_trace[i].push_back(v);
      for (int l = 0; l < v.size(); ++l) ig_total += 0.5 * std::log1p(v(l) / data[i].noise_var);
      data[i].add(s_i, sample.obs[i]);
    }
    out.info_gain.push_back(ig_total);

    RoundRecord rec;
    rec.round = t;
    rec.intervention = ar.best;
    rec.observed_reward = sample.reward;
    rec.expected_reward = er;
    rec.acq_value = ar.value;
    rec.wall_ms = elapsed_ms(t0);
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

RunResult mcbo_run(const Scm& scm, const RunConfig& cfg) {
  return run_model_based(scm, cfg, /*hard=*/false);
}

RunResult mcbo_hard_run(const Scm& scm, const RunConfig& cfg) {
  return run_model_based(scm, cfg, /*hard=*/true);
}

RunResult ucb_baseline_run(const Scm& scm, const RunConfig& cfg) {
  if (scm.layout.total_dim == 0)
    throw NoFeasibleCandidate("the single-model baseline needs action inputs");
  Rng root(cfg.seed);

  InitData init = init_data(scm, cfg, root.fork(kInitStream));
  GpDataset data = std::move(init.action_reward_data);

  RunResult out;
  out.init_env_calls = init.env_calls;
  out.var_trace.resize(1);

  for (int t = 1; t <= cfg.rounds; ++t) {
    const auto t0 = std::chrono::steady_clock::now();

    GpPosterior gp(cfg.kernel, data);

    Rng acq_rng = root.fork(kAcqStream + t);
    const Eigen::VectorXd a = ucb_argmax(gp, scm.action_box, cfg.beta, cfg.acq, acq_rng);
    const Intervention iv = Intervention::soft_flat(scm, a);
    const double ucb = gp.mean(a)(0) + cfg.beta * std::sqrt(gp.var(a)(0));

    Rng env_rng = root.fork(kEnvStream + t);
    const Sample sample = simulate(scm, iv, env_rng);

    Rng eval_rng = root.fork(kEvalStream + t);
    const double er = expected_reward(scm, iv, cfg.oracle.n_mc, eval_rng);

    out.var_trace[0].push_back(gp.var(a));
    Eigen::VectorXd y(1);
    y(0) = sample.reward;
    data.add(a, y);
    out.info_gain.push_back((out.info_gain.empty() ? 0.0 : out.info_gain.back()) +
                            0.5 * std::log1p(out.var_trace[0].back()(0) / data.noise_var));

    RoundRecord rec;
    rec.round = t;
    rec.intervention = iv;
    rec.observed_reward = sample.reward;
    rec.expected_reward = er;
    rec.acq_value = ucb;
    rec.wall_ms = elapsed_ms(t0);
    out.records.push_back(std::move(rec));
  }
  return out;
}

RunResult run_algorithm(const Scm& scm, const RunConfig& cfg) {
  switch (cfg.algo) {
    case Algo::Mcbo:
      return mcbo_run(scm, cfg);
    case Algo::McboHard:
      return mcbo_hard_run(scm, cfg);
    case Algo::UcbBaseline:
      return ucb_baseline_run(scm, cfg);
  }
  throw Error("unknown algorithm");
}

}  // namespace mcbo
