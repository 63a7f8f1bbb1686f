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

#include "mcbo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace mcbo {

InterventionSpace InterventionSpace::from(const Scm& scm) {
  InterventionSpace sp;
  sp.dag = scm.dag;
  sp.layout = scm.layout;
  sp.action_box = scm.action_box;
  sp.obs_box = scm.obs_box;
  sp.hard_box = scm.hard_box;
  sp.candidate_targets = scm.candidate_targets;
  sp.cardinality_limit = scm.cardinality_limit;
  sp.mode = scm.mode;
  sp.noise = scm.noise;
  return sp;
}

bool InterventionSpace::noiseless() const {
  for (const auto& n : noise)
    if (!n.is_none()) return false;
  return true;
}

namespace {

// Per-node normalization bounds for the selector input [z; a].
void input_bounds(const InterventionSpace& space, NodeId i, Eigen::VectorXd& lo,
                  Eigen::VectorXd& hi) {
  const int zd = space.dag.parent_obs_dim(i);
  const int ad = space.dag.action_dim[i];
  lo.resize(zd + ad);
  hi.resize(zd + ad);
  int at = 0;
  for (NodeId p : space.dag.parents[i]) {
    lo.segment(at, space.obs_box[p].dim()) = space.obs_box[p].lo;
    hi.segment(at, space.obs_box[p].dim()) = space.obs_box[p].hi;
    at += space.obs_box[p].dim();
  }
  for (int j = 0; j < ad; ++j) {
    const int g = space.layout.slots[i][j];
    lo(at) = space.action_box.lo(g);
    hi(at) = space.action_box.hi(g);
    ++at;
  }
}

}  // namespace

Eigen::VectorXd normalized_model_input(const InterventionSpace& space, NodeId i,
                                       const Eigen::VectorXd& z, const Eigen::VectorXd& a) {
  Eigen::VectorXd lo, hi, s(z.size() + a.size());
  s << z, a;
  input_bounds(space, i, lo, hi);
  if (lo.size() != s.size()) throw DimMismatch("selector input dim mismatch");
  Eigen::VectorXd u(s.size());
  for (int k = 0; k < s.size(); ++k) {
    const double w = hi(k) - lo(k);
    u(k) = w > 0.0 ? (s(k) - lo(k)) / w : 0.5;
  }
  return u;
}

std::vector<NoiseDraw> draw_noise_set(const InterventionSpace& space, int n_mc, Rng& rng) {
  std::vector<NoiseDraw> draws(n_mc);
  for (int t = 0; t < n_mc; ++t) {
    NoiseDraw d(space.num_nodes());
    for (NodeId i = 0; i < space.num_nodes(); ++i) {
      d[i] = Eigen::VectorXd::Zero(space.dag.obs_dim[i]);
      if (space.noise[i].kind == NoiseSpec::Kind::Gaussian)
        for (int l = 0; l < d[i].size(); ++l)
          d[i](l) = rng.normal(0.0, space.noise[i].stddev(l));
    }
    draws[t] = std::move(d);
  }
  return draws;
}

namespace {

// Node-local action for a rollout: the node's slice of a soft intervention,
// or an empty/zero vector otherwise.
Eigen::VectorXd node_action(const InterventionSpace& space, const Intervention& iv, NodeId i) {
  if (iv.kind == Intervention::Kind::Soft) return iv.actions[i];
  return Eigen::VectorXd::Zero(space.dag.action_dim[i]);
}

std::vector<const Eigen::VectorXd*> clamp_map(const InterventionSpace& space,
                                              const Intervention& iv) {
  std::vector<const Eigen::VectorXd*> clamp(space.num_nodes(), nullptr);
  if (iv.kind == Intervention::Kind::Hard)
    for (size_t k = 0; k < iv.targets.size(); ++k) clamp[iv.targets[k]] = &iv.values[k];
  return clamp;
}

}  // namespace

Sample reparam_rollout(const std::vector<GpPosterior>& posteriors, double beta,
                       const EtaFn& eta_fn, const InterventionSpace& space,
                       const Intervention& iv, const NoiseDraw& noise_draw) {
  const int m = space.num_nodes();
  if (static_cast<int>(posteriors.size()) != m)
    throw LengthMismatch("one posterior per node required");
  if (static_cast<int>(noise_draw.size()) != m)
    throw LengthMismatch("one noise vector per node required");
  auto clamp = clamp_map(space, iv);

  Sample out;
  out.obs.resize(m);
  for (NodeId i = 0; i < m; ++i) {
    if (clamp[i]) {
      out.obs[i] = *clamp[i];
      continue;
    }
    Eigen::VectorXd z(space.dag.parent_obs_dim(i));
    int at = 0;
    for (NodeId p : space.dag.parents[i]) {
      z.segment(at, out.obs[p].size()) = out.obs[p];
      at += static_cast<int>(out.obs[p].size());
    }
    const Eigen::VectorXd a = node_action(space, iv, i);
    Eigen::VectorXd s(z.size() + a.size());
    s << z, a;
    const Eigen::VectorXd mu = posteriors[i].mean(s);
    const Eigen::VectorXd sigma = posteriors[i].var(s).cwiseSqrt();
    const Eigen::VectorXd e = eta_fn(i, z, a);
    if (e.size() != mu.size()) throw DimMismatch("selector output dim mismatch");
    out.obs[i] = mu + beta * sigma.cwiseProduct(e) + noise_draw[i];
  }
  out.reward = out.obs[m - 1](0);
  return out;
}

Sample reparam_rollout(const PlausibleModel& model, const InterventionSpace& space,
                       const Intervention& iv, const NoiseDraw& noise_draw) {
  EtaFn fn = [&](NodeId i, const Eigen::VectorXd& z, const Eigen::VectorXd& a) {
    return eta_eval(model.etas[i], normalized_model_input(space, i, z, a));
  };
  return reparam_rollout(*model.posteriors, model.beta, fn, space, iv, noise_draw);
}

double acq_value(const PlausibleModel& model, const InterventionSpace& space,
                 const Intervention& iv, const std::vector<NoiseDraw>& draws) {
  if (draws.empty()) throw LengthMismatch("acq_value needs at least one noise draw");
  double sum = 0.0;
  for (const auto& d : draws) sum += reparam_rollout(model, space, iv, d).reward;
  return sum / static_cast<double>(draws.size());
}

AcqEval acq_value_grad(const PlausibleModel& model, const InterventionSpace& space,
                       const Intervention& iv, const std::vector<NoiseDraw>& draws) {
  const int m = space.num_nodes();
  const auto& posteriors = *model.posteriors;
  if (static_cast<int>(posteriors.size()) != m)
    throw LengthMismatch("one posterior per node required");
  if (draws.empty()) throw LengthMismatch("acq_value_grad needs at least one noise draw");
  auto clamp = clamp_map(space, iv);

  // Clamp-value slices (hard mode).
  std::vector<int> value_offset(iv.targets.size(), 0);
  int value_dim = 0;
  for (size_t k = 0; k < iv.targets.size(); ++k) {
    value_offset[k] = value_dim;
    value_dim += static_cast<int>(iv.values[k].size());
  }

  AcqEval out;
  out.d_flat = Eigen::VectorXd::Zero(space.layout.total_dim);
  out.d_values = Eigen::VectorXd::Zero(value_dim);
  out.d_eta.resize(m);
  for (NodeId i = 0; i < m; ++i)
    if (!clamp[i]) out.d_eta[i] = Eigen::VectorXd::Zero(model.etas[i].num_params());

  // Normalization widths (inverse) for each node's selector input.
  std::vector<Eigen::VectorXd> inv_width(m);
  for (NodeId i = 0; i < m; ++i) {
    if (clamp[i]) continue;
    Eigen::VectorXd lo, hi;
    input_bounds(space, i, lo, hi);
    inv_width[i].resize(lo.size());
    for (int k = 0; k < lo.size(); ++k) {
      const double w = hi(k) - lo(k);
      inv_width[i](k) = w > 0.0 ? 1.0 / w : 0.0;
    }
  }

  for (const auto& noise_draw : draws) {
    // Forward pass, caching everything the backward pass needs.
    std::vector<Eigen::VectorXd> x(m), u(m), e(m);
    std::vector<GpPosterior::QueryGrad> qg(m);
    for (NodeId i = 0; i < m; ++i) {
      if (clamp[i]) {
        x[i] = *clamp[i];
        continue;
      }
      Eigen::VectorXd z(space.dag.parent_obs_dim(i));
      int at = 0;
      for (NodeId p : space.dag.parents[i]) {
        z.segment(at, x[p].size()) = x[p];
        at += static_cast<int>(x[p].size());
      }
      const Eigen::VectorXd a = node_action(space, iv, i);
      Eigen::VectorXd s(z.size() + a.size());
      s << z, a;
      qg[i] = posteriors[i].query_grad(s);
      u[i] = normalized_model_input(space, i, z, a);
      e[i] = eta_eval(model.etas[i], u[i]);
      x[i] = qg[i].mu + model.beta * qg[i].sigma.cwiseProduct(e[i]) + noise_draw[i];
    }
    out.value += x[m - 1](0);

    // Backward pass: adjoint of the reward w.r.t. each node's observation.
    std::vector<Eigen::VectorXd> adj(m);
    for (NodeId i = 0; i < m; ++i) adj[i] = Eigen::VectorXd::Zero(x[i].size());
    adj[m - 1](0) = 1.0;

    for (NodeId i = m - 1; i >= 0; --i) {
      if (adj[i].isZero(0.0)) continue;
      if (clamp[i]) {
        // x_i is the clamp value itself.
        for (size_t k = 0; k < iv.targets.size(); ++k)
          if (iv.targets[k] == i)
            out.d_values.segment(value_offset[k], adj[i].size()) += adj[i];
        continue;
      }
      const Eigen::VectorXd scaled = model.beta * qg[i].sigma.cwiseProduct(adj[i]);

      // Selector parameters.
      const Eigen::MatrixXd gp = eta_grad_params(model.etas[i], u[i]);
      out.d_eta[i] += gp.transpose() * scaled;

      // Raw input s = [z; a]: mean term, band-width term, selector-input term.
      Eigen::VectorXd sgrad = qg[i].dmu.transpose() * adj[i] +
                              qg[i].dsigma.transpose() * (model.beta * e[i].cwiseProduct(adj[i]));
      const Eigen::MatrixXd gi = eta_grad_input(model.etas[i], u[i]);
      sgrad += (gi.transpose() * scaled).cwiseProduct(inv_width[i]);

      int at = 0;
      for (NodeId p : space.dag.parents[i]) {
        adj[p] += sgrad.segment(at, x[p].size());
        at += static_cast<int>(x[p].size());
      }
      for (int j = 0; j < space.dag.action_dim[i]; ++j)
        out.d_flat(space.layout.slots[i][j]) += sgrad(at + j);
    }
  }

  const double inv_n = 1.0 / static_cast<double>(draws.size());
  out.value *= inv_n;
  out.d_flat *= inv_n;
  out.d_values *= inv_n;
  for (auto& g : out.d_eta)
    if (g.size() > 0) g *= inv_n;
  return out;
}

namespace {

// ----- optimize_acq internals ---------------------------------------------

struct Candidate {
  Intervention iv;
  std::vector<EtaParam> etas;
  double value = -std::numeric_limits<double>::infinity();
};

std::vector<EtaParam> random_etas(const InterventionSpace& space, const AcqConfig& cfg,
                                  const std::vector<char>& clamped, Rng& rng) {
  std::vector<EtaParam> etas(space.num_nodes());
  for (NodeId i = 0; i < space.num_nodes(); ++i) {
    const int d = space.dag.obs_dim[i];
    if (clamped[i]) {
      etas[i] = EtaParam::constant(Eigen::VectorXd::Zero(d));  // unused
      continue;
    }
    if (cfg.eta_net) {
      const int in = space.dag.parent_obs_dim(i) + space.dag.action_dim[i];
      etas[i] = EtaParam::net(in, d, cfg.eta_hidden, rng);
    } else {
      Eigen::VectorXd v(d);
      for (int l = 0; l < d; ++l) v(l) = rng.uniform(-1.0, 1.0);
      etas[i] = EtaParam::constant(v);
    }
  }
  return etas;
}

void step_etas(const InterventionSpace& space, const AcqConfig& cfg,
               const std::vector<char>& clamped, const std::vector<Eigen::VectorXd>& d_eta,
               std::vector<EtaParam>& etas) {
  for (NodeId i = 0; i < space.num_nodes(); ++i) {
    if (clamped[i] || d_eta[i].size() == 0) continue;
    if (etas[i].kind == EtaParam::Kind::Constant) {
      // Work in [0,1] coordinates of the [-1,1] box (width 2).
      Eigen::VectorXd v = etas[i].value;
      for (int l = 0; l < v.size(); ++l) {
        double n = (v(l) + 1.0) / 2.0 + cfg.step_size * d_eta[i](l) * 2.0;
        n = std::min(1.0, std::max(0.0, n));
        v(l) = 2.0 * n - 1.0;
      }
      etas[i].value = v;
    } else {
      etas[i].set_params(etas[i].params() + cfg.step_size * d_eta[i]);
    }
  }
}

// All k-subsets of {0..n-1}, lexicographic.
std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i <= n - (k - static_cast<int>(cur.size())); ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

std::vector<int> support_slots(const InterventionSpace& space, const std::vector<int>& nodes) {
  std::vector<char> active(space.layout.total_dim, 0);
  for (int i : nodes)
    for (int g : space.layout.slots[i]) active[g] = 1;
  std::vector<int> slots;
  for (int g = 0; g < space.layout.total_dim; ++g)
    if (active[g]) slots.push_back(g);
  return slots;
}

Eigen::VectorXd random_flat(const InterventionSpace& space, const std::vector<int>& slots,
                            Rng& rng) {
  Eigen::VectorXd flat = Eigen::VectorXd::Zero(space.layout.total_dim);
  for (int g : slots) flat(g) = rng.uniform(space.action_box.lo(g), space.action_box.hi(g));
  return flat;
}

// Projected gradient ascent over (variables of `cand`), keeping the best
// visited point.  `apply_step` mutates the candidate from an AcqEval.
void refine(const std::vector<GpPosterior>& posteriors, double beta,
            const InterventionSpace& space, const AcqConfig& cfg,
            const std::vector<NoiseDraw>& draws, Candidate& cand,
            const std::function<void(const AcqEval&, Candidate&)>& apply_step) {
  Candidate best = cand;
  PlausibleModel model{&posteriors, beta, cand.etas};
  for (int step = 0; step < cfg.grad_steps; ++step) {
    model.etas = cand.etas;
    AcqEval ev = acq_value_grad(model, space, cand.iv, draws);
    if (ev.value > best.value) {
      best = cand;
      best.value = ev.value;
    }
    apply_step(ev, cand);
  }
  model.etas = cand.etas;
  cand.value = acq_value(model, space, cand.iv, draws);
  if (cand.value <= best.value) cand = best;
}

}  // namespace

AcqResult optimize_acq(const std::vector<GpPosterior>& posteriors, double beta,
                       const InterventionSpace& space, const AcqConfig& cfg, Rng& rng) {
  const int m = space.num_nodes();
  if (static_cast<int>(posteriors.size()) != m)
    throw LengthMismatch("one posterior per node required");

  Rng noise_rng = rng.fork(1);
  Rng cand_rng = rng.fork(2);
  Rng greedy_rng = rng.fork(3);

  // One draw set for the whole optimization: every candidate, restart and
  // gradient step sees the same noise outcomes, so values are comparable.
  const int n_mc = space.noiseless() ? 1 : cfg.n_mc;
  const std::vector<NoiseDraw> draws = draw_noise_set(space, n_mc, noise_rng);

  const bool hard = !space.candidate_targets.empty();
  std::vector<char> no_clamp(m, 0);

  auto run_restarts = [&](const std::function<Candidate(Rng&)>& sample_candidate,
                          const std::function<void(const AcqEval&, Candidate&)>& apply_step)
      -> Candidate {
    // Raw scoring phase.
    std::vector<Candidate> raw;
    raw.reserve(cfg.raw_candidates);
    for (int c = 0; c < cfg.raw_candidates; ++c) {
      Candidate cand = sample_candidate(cand_rng);
      PlausibleModel model{&posteriors, beta, cand.etas};
      cand.value = acq_value(model, space, cand.iv, draws);
      raw.push_back(std::move(cand));
    }
    std::vector<int> order(raw.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return raw[a].value > raw[b].value; });

    Candidate best;
    const int keep = std::min<int>(cfg.restarts, static_cast<int>(order.size()));
    for (int r = 0; r < keep; ++r) {
      Candidate cand = raw[order[r]];
      refine(posteriors, beta, space, cfg, draws, cand, apply_step);
      if (cand.value > best.value) best = std::move(cand);
    }
    return best;
  };

  if (hard) {
    // One refinement per candidate target set; ties favor earlier (smaller) sets.
    Candidate best;
    for (const auto& targets : space.candidate_targets) {
      std::vector<char> clamped(m, 0);
      for (NodeId t : targets) clamped[t] = 1;

      auto sample_candidate = [&](Rng& r) {
        Candidate c;
        std::vector<Eigen::VectorXd> values;
        for (NodeId t : targets) values.push_back(space.hard_box[t].sample(r));
        c.iv = targets.empty() ? Intervention::observational()
                               : Intervention::hard(targets, std::move(values));
        c.etas = random_etas(space, cfg, clamped, r);
        return c;
      };
      auto apply_step = [&](const AcqEval& ev, Candidate& c) {
        int at = 0;
        for (size_t k = 0; k < c.iv.targets.size(); ++k) {
          const Box& box = space.hard_box[c.iv.targets[k]];
          for (int l = 0; l < box.dim(); ++l) {
            const double w = box.hi(l) - box.lo(l);
            if (w <= 0.0) {
              ++at;
              continue;
            }
            double n = (c.iv.values[k](l) - box.lo(l)) / w + cfg.step_size * ev.d_values(at) * w;
            n = std::min(1.0, std::max(0.0, n));
            c.iv.values[k](l) = box.lo(l) + w * n;
            ++at;
          }
        }
        step_etas(space, cfg, clamped, ev.d_eta, c.etas);
      };

      Candidate cand = run_restarts(sample_candidate, apply_step);
      if (cand.value > best.value) best = std::move(cand);
    }
    if (best.etas.empty()) throw NoFeasibleCandidate("no candidate target sets");
    return {best.iv, best.etas, best.value};
  }

  // Soft / function-network mode: enumerate (or greedily pick) supports.
  std::vector<int> action_nodes;
  for (NodeId i = 0; i < m; ++i)
    if (space.dag.action_dim[i] > 0) action_nodes.push_back(i);

  std::vector<std::vector<int>> supports;
  const int n_act = static_cast<int>(action_nodes.size());
  if (space.cardinality_limit < 0 || space.cardinality_limit >= n_act) {
    supports.push_back(action_nodes);
  } else {
    const int c = space.cardinality_limit;
    double count = 0.0;
    for (int k = 0; k <= c; ++k) count += binom(n_act, k);
    if (count <= static_cast<double>(cfg.support_enum_limit)) {
      for (int k = 0; k <= c; ++k)
        for (auto& comb : combinations(n_act, k)) {
          std::vector<int> nodes;
          for (int idx : comb) nodes.push_back(action_nodes[idx]);
          supports.push_back(std::move(nodes));
        }
    } else {
      // Greedy: score each action node by the best single-node random
      // candidate, then take the top c as one support.
      std::vector<std::pair<double, int>> scored;
      for (int j : action_nodes) {
        const std::vector<int> slots = support_slots(space, {j});
        double sc = -std::numeric_limits<double>::infinity();
        for (int c2 = 0; c2 < 16; ++c2) {
          Candidate cand;
          cand.iv = Intervention::soft(split_flat_actions(space.layout,
                                                          random_flat(space, slots, greedy_rng)));
          cand.etas = random_etas(space, cfg, no_clamp, greedy_rng);
          PlausibleModel model{&posteriors, beta, cand.etas};
          sc = std::max(sc, acq_value(model, space, cand.iv, draws));
        }
        scored.push_back({sc, j});
      }
      std::stable_sort(scored.begin(), scored.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      std::vector<int> nodes;
      for (int k = 0; k < c && k < static_cast<int>(scored.size()); ++k)
        nodes.push_back(scored[k].second);
      std::sort(nodes.begin(), nodes.end());
      supports.push_back(std::move(nodes));
    }
  }

  Candidate best;
  for (const auto& sup : supports) {
    const std::vector<int> slots = support_slots(space, sup);

    auto sample_candidate = [&](Rng& r) {
      Candidate c;
      c.iv = Intervention::soft(split_flat_actions(space.layout, random_flat(space, slots, r)));
      c.etas = random_etas(space, cfg, no_clamp, r);
      return c;
    };
    auto apply_step = [&](const AcqEval& ev, Candidate& c) {
      Eigen::VectorXd flat = Eigen::VectorXd::Zero(space.layout.total_dim);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < space.dag.action_dim[i]; ++j)
          flat(space.layout.slots[i][j]) = c.iv.actions[i](j);
      for (int g : slots) {
        const double w = space.action_box.hi(g) - space.action_box.lo(g);
        if (w <= 0.0) continue;
        double n = (flat(g) - space.action_box.lo(g)) / w + cfg.step_size * ev.d_flat(g) * w;
        n = std::min(1.0, std::max(0.0, n));
        flat(g) = space.action_box.lo(g) + w * n;
      }
      c.iv.actions = split_flat_actions(space.layout, flat);
      step_etas(space, cfg, no_clamp, ev.d_eta, c.etas);
    };

    Candidate cand = run_restarts(sample_candidate, apply_step);
    if (cand.value > best.value) best = std::move(cand);
  }
  if (best.etas.empty()) throw NoFeasibleCandidate("no supports to search");
  return {best.iv, best.etas, best.value};
}

Eigen::VectorXd ucb_argmax(const GpPosterior& gp, const Box& box, double beta,
                           const AcqConfig& cfg, Rng& rng) {
  if (box.dim() == 0) throw NoFeasibleCandidate("empty action box");
  Rng cand_rng = rng.fork(2);

  auto score = [&](const Eigen::VectorXd& a) {
    const Eigen::VectorXd mu = gp.mean(a);
    const Eigen::VectorXd sd = gp.var(a).cwiseSqrt();
    return mu(0) + beta * sd(0);
  };

  std::vector<std::pair<double, Eigen::VectorXd>> raw;
  for (int c = 0; c < cfg.raw_candidates; ++c) {
    Eigen::VectorXd a = box.sample(cand_rng);
    raw.push_back({score(a), std::move(a)});
  }
  std::vector<int> order(raw.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return raw[i].first > raw[j].first; });

  double best_v = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_a;
  const int keep = std::min<int>(cfg.restarts, static_cast<int>(order.size()));
  for (int r = 0; r < keep; ++r) {
    Eigen::VectorXd a = raw[order[r]].second;
    double local_best_v = raw[order[r]].first;
    Eigen::VectorXd local_best_a = a;
    for (int step = 0; step < cfg.grad_steps; ++step) {
      const auto qg = gp.query_grad(a);
      const double v = qg.mu(0) + beta * qg.sigma(0);
      if (v > local_best_v) {
        local_best_v = v;
        local_best_a = a;
      }
      const Eigen::VectorXd g = qg.dmu.row(0).transpose() + beta * qg.dsigma.row(0).transpose();
      for (int k = 0; k < box.dim(); ++k) {
        const double w = box.hi(k) - box.lo(k);
        if (w <= 0.0) continue;
        double n = (a(k) - box.lo(k)) / w + cfg.step_size * g(k) * w;
        n = std::min(1.0, std::max(0.0, n));
        a(k) = box.lo(k) + w * n;
      }
    }
    const double v = score(a);
    if (v > local_best_v) {
      local_best_v = v;
      local_best_a = a;
    }
    if (local_best_v > best_v) {
      best_v = local_best_v;
      best_a = local_best_a;
    }
  }
  return best_a;
}

}  // namespace mcbo
