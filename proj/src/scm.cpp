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

#include "mcbo/scm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace mcbo {

bool Box::contains(const Eigen::VectorXd& v) const {
  if (v.size() != lo.size()) throw DimMismatch("box dim mismatch");
  for (int i = 0; i < v.size(); ++i)
    if (v(i) < lo(i) || v(i) > hi(i)) return false;
  return true;
}

Eigen::VectorXd Box::clamp(const Eigen::VectorXd& v) const {
  if (v.size() != lo.size()) throw DimMismatch("box dim mismatch");
  return v.cwiseMax(lo).cwiseMin(hi);
}

Eigen::VectorXd Box::sample(Rng& rng) const {
  Eigen::VectorXd v(lo.size());
  for (int i = 0; i < v.size(); ++i) v(i) = rng.uniform(lo(i), hi(i));
  return v;
}

Box Box::cube(int dim, double lo, double hi) {
  return {Eigen::VectorXd::Constant(dim, lo), Eigen::VectorXd::Constant(dim, hi)};
}

NoiseSpec NoiseSpec::gaussian(int dim, double stddev) {
  NoiseSpec n;
  n.kind = Kind::Gaussian;
  n.stddev = Eigen::VectorXd::Constant(dim, stddev);
  return n;
}

ActionLayout ActionLayout::disjoint(const std::vector<int>& action_dims) {
  ActionLayout layout;
  for (int d : action_dims) {
    std::vector<int> s(d);
    for (int j = 0; j < d; ++j) s[j] = layout.total_dim + j;
    layout.total_dim += d;
    layout.slots.push_back(std::move(s));
  }
  return layout;
}

bool Scm::noiseless() const {
  for (const auto& n : noise)
    if (!n.is_none()) return false;
  return true;
}

Intervention Intervention::soft(std::vector<Eigen::VectorXd> per_node_actions) {
  Intervention iv;
  iv.kind = Kind::Soft;
  iv.actions = std::move(per_node_actions);
  return iv;
}

std::vector<Eigen::VectorXd> split_flat_actions(const ActionLayout& layout,
                                                const Eigen::VectorXd& flat) {
  if (flat.size() != layout.total_dim)
    throw DimMismatch("flat action vector has dim " + std::to_string(flat.size()) +
                      ", layout expects " + std::to_string(layout.total_dim));
  std::vector<Eigen::VectorXd> per_node(layout.slots.size());
  for (size_t i = 0; i < layout.slots.size(); ++i) {
    const auto& slots = layout.slots[i];
    Eigen::VectorXd a(slots.size());
    for (size_t j = 0; j < slots.size(); ++j) a(j) = flat(slots[j]);
    per_node[i] = std::move(a);
  }
  return per_node;
}

Intervention Intervention::soft_flat(const Scm& scm, const Eigen::VectorXd& flat) {
  return soft(split_flat_actions(scm.layout, flat));
}

Intervention Intervention::hard(InterventionTargets targets, std::vector<Eigen::VectorXd> values) {
  Intervention iv;
  iv.kind = Kind::Hard;
  iv.targets = std::move(targets);
  iv.values = std::move(values);
  return iv;
}

nlohmann::json Intervention::to_json() const {
  nlohmann::json j;
  switch (kind) {
    case Kind::Observational:
      j["kind"] = "obs";
      break;
    case Kind::Soft: {
      j["kind"] = "soft";
      nlohmann::json a = nlohmann::json::array();
      for (const auto& v : actions) {
        nlohmann::json row = nlohmann::json::array();
        for (int i = 0; i < v.size(); ++i) row.push_back(v(i));
        a.push_back(row);
      }
      j["a"] = a;
      break;
    }
    case Kind::Hard: {
      j["kind"] = "hard";
      j["t"] = targets;
      nlohmann::json vals = nlohmann::json::array();
      for (const auto& v : values) {
        nlohmann::json row = nlohmann::json::array();
        for (int i = 0; i < v.size(); ++i) row.push_back(v(i));
        vals.push_back(row);
      }
      j["v"] = vals;
      break;
    }
  }
  return j;
}

Eigen::VectorXd flat_actions(const Scm& scm, const Intervention& iv) {
  Eigen::VectorXd flat = Eigen::VectorXd::Zero(scm.layout.total_dim);
  if (iv.kind != Intervention::Kind::Soft) return flat;
  std::vector<char> set(scm.layout.total_dim, 0);
  for (int i = 0; i < scm.num_nodes(); ++i) {
    const auto& slots = scm.layout.slots[i];
    const auto& a = iv.actions[i];
    for (size_t j = 0; j < slots.size(); ++j) {
      const int g = slots[j];
      if (set[g] && flat(g) != a(j))
        throw DimMismatch("shared action slot " + std::to_string(g) +
                          " has conflicting values");
      flat(g) = a(j);
      set[g] = 1;
    }
  }
  return flat;
}

void validate_intervention(const Scm& scm, const Intervention& iv) {
  const int m = scm.num_nodes();
  switch (iv.kind) {
    case Intervention::Kind::Observational:
      return;

    case Intervention::Kind::Soft: {
      if (static_cast<int>(iv.actions.size()) != m)
        throw DimMismatch("soft intervention has " + std::to_string(iv.actions.size()) +
                          " action vectors for " + std::to_string(m) + " nodes");
      for (int i = 0; i < m; ++i)
        if (iv.actions[i].size() != scm.dag.action_dim[i])
          throw DimMismatch("action vector at node " + std::to_string(i) +
                            " has dim " + std::to_string(iv.actions[i].size()) +
                            ", expected " + std::to_string(scm.dag.action_dim[i]));
      // Box check on the flat vector (this also verifies shared slots agree).
      // An exact zero is always admissible: it encodes "no action on this
      // slot", which cardinality-capped searches rely on even when the box
      // itself does not cover 0.
      Eigen::VectorXd flat = flat_actions(scm, iv);
      for (int g = 0; g < flat.size(); ++g)
        if (flat(g) != 0.0 &&
            (flat(g) < scm.action_box.lo(g) || flat(g) > scm.action_box.hi(g)))
          throw ActionOutOfBox("action slot " + std::to_string(g) + " = " +
                               std::to_string(flat(g)) + " outside box");
      if (scm.cardinality_limit >= 0) {
        int active = 0;
        for (int i = 0; i < m; ++i)
          if (iv.actions[i].size() > 0 && iv.actions[i].cwiseAbs().maxCoeff() > 0.0) ++active;
        if (active > scm.cardinality_limit)
          throw CardinalityViolated(std::to_string(active) + " active nodes exceed limit " +
                                    std::to_string(scm.cardinality_limit));
      }
      return;
    }

    case Intervention::Kind::Hard: {
      if (iv.targets.size() != iv.values.size())
        throw LengthMismatch("hard intervention: targets/values length differ");
      if (!std::is_sorted(iv.targets.begin(), iv.targets.end()) ||
          std::adjacent_find(iv.targets.begin(), iv.targets.end()) != iv.targets.end())
        throw DimMismatch("hard targets must be sorted and unique");
      for (size_t k = 0; k < iv.targets.size(); ++k) {
        const NodeId t = iv.targets[k];
        if (t < 0 || t >= m)
          throw ParentIndexOutOfRange("hard target " + std::to_string(t) + " out of range");
        if (t == scm.dag.reward_node())
          throw HardTargetIncludesReward("cannot clamp the reward node");
        if (iv.values[k].size() != scm.dag.obs_dim[t])
          throw DimMismatch("clamp value at node " + std::to_string(t) + " has dim " +
                            std::to_string(iv.values[k].size()) + ", expected " +
                            std::to_string(scm.dag.obs_dim[t]));
        if (scm.hard_box[t].dim() == 0)
          throw ActionOutOfBox("node " + std::to_string(t) + " is not hard-intervenable");
        if (!scm.hard_box[t].contains(iv.values[k]))
          throw ActionOutOfBox("clamp value at node " + std::to_string(t) + " outside box");
      }
      return;
    }
  }
}

Sample simulate(const Scm& scm, const Intervention& iv, Rng& rng) {
  validate_intervention(scm, iv);
  const int m = scm.num_nodes();

  std::vector<const Eigen::VectorXd*> clamp(m, nullptr);
  if (iv.kind == Intervention::Kind::Hard)
    for (size_t k = 0; k < iv.targets.size(); ++k) clamp[iv.targets[k]] = &iv.values[k];

  Sample out;
  out.obs.resize(m);
  for (int i = 0; i < m; ++i) {
    if (clamp[i]) {
      out.obs[i] = *clamp[i];  // clamped: no mechanism, no noise
      continue;
    }
    Eigen::VectorXd z(scm.dag.parent_obs_dim(i));
    int at = 0;
    for (NodeId p : scm.dag.parents[i]) {
      z.segment(at, out.obs[p].size()) = out.obs[p];
      at += static_cast<int>(out.obs[p].size());
    }
    Eigen::VectorXd a = (iv.kind == Intervention::Kind::Soft)
                            ? iv.actions[i]
                            : Eigen::VectorXd::Zero(scm.dag.action_dim[i]);
    Eigen::VectorXd x = scm.mechanisms[i](z, a);
    if (x.size() != scm.dag.obs_dim[i])
      throw DimMismatch("mechanism at node " + std::to_string(i) + " returned dim " +
                        std::to_string(x.size()) + ", expected " +
                        std::to_string(scm.dag.obs_dim[i]));
    if (scm.noise[i].kind == NoiseSpec::Kind::Gaussian)
      for (int l = 0; l < x.size(); ++l) x(l) += rng.normal(0.0, scm.noise[i].stddev(l));
    out.obs[i] = std::move(x);
  }
  out.reward = out.obs[m - 1](0);
  return out;
}

double expected_reward(const Scm& scm, const Intervention& iv, int n_mc, Rng& rng) {
  if (n_mc < 1) throw Error("expected_reward: n_mc must be >= 1");
  if (scm.noiseless()) return simulate(scm, iv, rng).reward;  // exact
  double sum = 0.0;
  for (int i = 0; i < n_mc; ++i) sum += simulate(scm, iv, rng).reward;
  return sum / n_mc;
}

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  if (n == 1) return {0.5 * (lo + hi)};
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

// All k-subsets of {0, ..., n-1} in lexicographic order.
std::vector<std::vector<int>> index_combinations(int n, int k) {
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

// Odometer over per-dimension value lists; invokes fn with each combination.
void for_each_grid_point(const std::vector<std::vector<double>>& axes,
                         const std::function<void(const Eigen::VectorXd&)>& fn) {
  const int d = static_cast<int>(axes.size());
  Eigen::VectorXd pt(d);
  std::vector<int> idx(d, 0);
  while (true) {
    for (int i = 0; i < d; ++i) pt(i) = axes[i][idx[i]];
    fn(pt);
    int i = d - 1;
    for (; i >= 0; --i) {
      if (++idx[i] < static_cast<int>(axes[i].size())) break;
      idx[i] = 0;
    }
    if (i < 0) break;
  }
}

}  // namespace

OracleResult oracle_best(const Scm& scm, int grid_per_dim, int n_mc, Rng& rng, long budget) {
  if (grid_per_dim < 1) throw Error("oracle_best: grid_per_dim must be >= 1");
  const Rng eval_base = rng.fork(0x0acce55);  // common random numbers across points

  // Enumerate the candidate pool and count grid points up front.
  double total_points = 0.0;

  const bool hard_search = !scm.candidate_targets.empty();
  std::vector<std::vector<int>> supports;  // soft mode: active node sets
  std::vector<int> action_nodes;
  if (!hard_search) {
    for (int i = 0; i < scm.num_nodes(); ++i)
      if (scm.dag.action_dim[i] > 0) action_nodes.push_back(i);
    if (action_nodes.empty())
      total_points = 1.0;  // observational only
    else if (scm.cardinality_limit < 0 ||
             scm.cardinality_limit >= static_cast<int>(action_nodes.size())) {
      supports.push_back(action_nodes);
    } else {
      // Shared slots make per-node support zeroing ambiguous; no task needs both.
      for (int i = 0; i < scm.num_nodes(); ++i)
        for (int g : scm.layout.slots[i])
          for (int ii = i + 1; ii < scm.num_nodes(); ++ii)
            for (int gg : scm.layout.slots[ii])
              if (g == gg)
                throw Error("cardinality limit with shared action slots is not supported");
      for (int k = 0; k <= scm.cardinality_limit; ++k)
        for (auto& c : index_combinations(static_cast<int>(action_nodes.size()), k)) {
          std::vector<int> nodes;
          for (int idx : c) nodes.push_back(action_nodes[idx]);
          supports.push_back(std::move(nodes));
        }
    }
    for (const auto& sup : supports) {
      std::vector<char> active(scm.layout.total_dim, 0);
      for (int i : sup)
        for (int g : scm.layout.slots[i]) active[g] = 1;
      int dims = static_cast<int>(std::count(active.begin(), active.end(), 1));
      total_points += std::pow(static_cast<double>(grid_per_dim), dims);
    }
  } else {
    for (const auto& targets : scm.candidate_targets) {
      int dims = 0;
      for (NodeId t : targets) dims += scm.hard_box[t].dim();
      total_points += std::pow(static_cast<double>(grid_per_dim), dims);
    }
  }
  if (total_points > static_cast<double>(budget))
    throw GridBudgetExceeded("grid would need " + std::to_string(total_points) +
                             " points, budget is " + std::to_string(budget));
  if (total_points == 0.0) throw NoFeasibleCandidate("nothing to search");

  OracleResult best;
  bool have = false;
  auto consider = [&](const Intervention& iv) {
    Rng r = eval_base;
    const double v = expected_reward(scm, iv, n_mc, r);
    if (!have || v > best.value) {
      best.best = iv;
      best.value = v;
      have = true;
    }
  };

  if (hard_search) {
    for (const auto& targets : scm.candidate_targets) {
      if (targets.empty()) {
        consider(Intervention::observational());
        continue;
      }
      std::vector<std::vector<double>> axes;
      for (NodeId t : targets)
        for (int dd = 0; dd < scm.hard_box[t].dim(); ++dd)
          axes.push_back(linspace(scm.hard_box[t].lo(dd), scm.hard_box[t].hi(dd), grid_per_dim));
      for_each_grid_point(axes, [&](const Eigen::VectorXd& pt) {
        std::vector<Eigen::VectorXd> values;
        int at = 0;
        for (NodeId t : targets) {
          values.push_back(pt.segment(at, scm.hard_box[t].dim()));
          at += scm.hard_box[t].dim();
        }
        consider(Intervention::hard(targets, std::move(values)));
      });
    }
  } else if (action_nodes.empty()) {
    consider(Intervention::observational());
  } else {
    for (const auto& sup : supports) {
      std::vector<int> slots;
      {
        std::vector<char> active(scm.layout.total_dim, 0);
        for (int i : sup)
          for (int g : scm.layout.slots[i]) active[g] = 1;
        for (int g = 0; g < scm.layout.total_dim; ++g)
          if (active[g]) slots.push_back(g);
      }
      std::vector<std::vector<double>> axes;
      for (int g : slots)
        axes.push_back(linspace(scm.action_box.lo(g), scm.action_box.hi(g), grid_per_dim));
      if (axes.empty()) {
        consider(Intervention::observational());
        continue;
      }
      for_each_grid_point(axes, [&](const Eigen::VectorXd& pt) {
        Eigen::VectorXd flat = Eigen::VectorXd::Zero(scm.layout.total_dim);
        for (size_t k = 0; k < slots.size(); ++k) flat(slots[k]) = pt(k);
        consider(Intervention::soft_flat(scm, flat));
      });
    }
  }
  return best;
}

// --- custom tasks -----------------------------------------------------------

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXd vec_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw Error(what + ": expected an array of numbers");
  Eigen::VectorXd v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) {
    if (!j[i].is_number()) throw Error(what + ": expected an array of numbers");
    v(i) = j[i].get<double>();
  }
  return v;
}

// Reads an optional weight vector; absent means zeros.
Eigen::VectorXd weight_or_zero(const nlohmann::json& params, const char* key, int dim,
                               const std::string& what) {
  if (!params.contains(key)) return Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd w = vec_from_json(params.at(key), what + "." + key);
  if (w.size() != dim)
    throw DimMismatch(what + "." + key + ": expected " + std::to_string(dim) + " entries, got " +
                      std::to_string(w.size()));
  return w;
}

// Parses an array of [lo, hi] pairs into a Box.
Box box_from_pairs(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw Error(what + ": expected an array of [lo, hi] pairs");
  Box b;
  b.lo.resize(static_cast<int>(j.size()));
  b.hi.resize(static_cast<int>(j.size()));
  for (int i = 0; i < b.lo.size(); ++i) {
    const auto& p = j[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw Error(what + ": expected an array of [lo, hi] pairs");
    b.lo(i) = p[0].get<double>();
    b.hi(i) = p[1].get<double>();
    if (b.lo(i) > b.hi(i)) throw Error(what + ": lo exceeds hi at component " + std::to_string(i));
  }
  return b;
}

// All scalar families reduce their inputs through one affine form
//   q = wz . z + wa . a + bias
// so a single helper builds the closure.  Weights default to zero, which
// makes "no parents used" the natural default rather than an error.
std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> affine_from_json(
    const nlohmann::json& params, int z_dim, int a_dim, const std::string& what) {
  Eigen::VectorXd wz = weight_or_zero(params, "wz", z_dim, what);
  Eigen::VectorXd wa = weight_or_zero(params, "wa", a_dim, what);
  double bias = params.value("bias", 0.0);
  return [wz, wa, bias](const Eigen::VectorXd& z, const Eigen::VectorXd& a) {
    return wz.dot(z) + wa.dot(a) + bias;
  };
}

void require_scalar_output(int out_dim, const std::string& kind) {
  if (out_dim != 1)
    throw Error("mechanism '" + kind +
                "' produces one component; wrap it in 'stack' for multi-component nodes");
}

std::map<std::string, MechanismFactory>& mechanism_registry() {
  static std::map<std::string, MechanismFactory> reg = [] {
    std::map<std::string, MechanismFactory> r;
    r["zero"] = [](const nlohmann::json&, int, int, int out_dim) -> MechanismFn {
      return [out_dim](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Zero(out_dim).eval();
      };
    };
    r["constant"] = [](const nlohmann::json& params, int, int, int out_dim) -> MechanismFn {
      Eigen::VectorXd c;
      if (!params.contains("value")) {
        c = Eigen::VectorXd::Zero(out_dim);
      } else if (params.at("value").is_number()) {
        c = Eigen::VectorXd::Constant(out_dim, params.at("value").get<double>());
      } else {
        c = vec_from_json(params.at("value"), "constant.value");
        if (c.size() != out_dim) throw DimMismatch("constant.value: wrong number of components");
      }
      return [c](const Eigen::VectorXd&, const Eigen::VectorXd&) { return c; };
    };
    r["linear"] = [](const nlohmann::json& params, int z_dim, int a_dim,
                     int out_dim) -> MechanismFn {
      require_scalar_output(out_dim, "linear");
      auto q = affine_from_json(params, z_dim, a_dim, "linear");
      return [q](const Eigen::VectorXd& z, const Eigen::VectorXd& a) {
        return Eigen::VectorXd::Constant(1, q(z, a)).eval();
      };
    };
    r["tanh_linear"] = [](const nlohmann::json& params, int z_dim, int a_dim,
                          int out_dim) -> MechanismFn {
      require_scalar_output(out_dim, "tanh_linear");
      auto q = affine_from_json(params, z_dim, a_dim, "tanh_linear");
      return [q](const Eigen::VectorXd& z, const Eigen::VectorXd& a) {
        return Eigen::VectorXd::Constant(1, std::tanh(q(z, a))).eval();
      };
    };
    r["neg_quadratic"] = [](const nlohmann::json& params, int z_dim, int a_dim,
                            int out_dim) -> MechanismFn {
      require_scalar_output(out_dim, "neg_quadratic");
      auto q = affine_from_json(params, z_dim, a_dim, "neg_quadratic");
      double center = params.value("center", 0.0);
      return [q, center](const Eigen::VectorXd& z, const Eigen::VectorXd& a) {
        double d = q(z, a) - center;
        return Eigen::VectorXd::Constant(1, -d * d).eval();
      };
    };
    r["gauss_bump"] = [](const nlohmann::json& params, int z_dim, int a_dim,
                         int out_dim) -> MechanismFn {
      require_scalar_output(out_dim, "gauss_bump");
      auto q = affine_from_json(params, z_dim, a_dim, "gauss_bump");
      double center = params.value("center", 0.0);
      return [q, center](const Eigen::VectorXd& z, const Eigen::VectorXd& a) {
        double d = q(z, a) - center;
        return Eigen::VectorXd::Constant(1, std::exp(-d * d)).eval();
      };
    };
    r["sin_pi"] = [](const nlohmann::json& params, int z_dim, int a_dim,
                     int out_dim) -> MechanismFn {
      require_scalar_output(out_dim, "sin_pi");
      auto q = affine_from_json(params, z_dim, a_dim, "sin_pi");
      return [q](const Eigen::VectorXd& z, const Eigen::VectorXd& a) {
        return Eigen::VectorXd::Constant(1, std::sin(kPi * q(z, a))).eval();
      };
    };
    return r;
  }();
  return reg;
}

MechanismFn mechanism_from_json(const nlohmann::json& spec, int z_dim, int a_dim, int out_dim);

// One scalar sub-mechanism per output component, concatenated.
MechanismFn stacked_mechanism(const nlohmann::json& params, int z_dim, int a_dim, int out_dim) {
  if (!params.contains("components") || !params.at("components").is_array())
    throw Error("stack: expected a 'components' array");
  const auto& comps = params.at("components");
  if (static_cast<int>(comps.size()) != out_dim)
    throw DimMismatch("stack: expected " + std::to_string(out_dim) + " components, got " +
                      std::to_string(comps.size()));
  std::vector<MechanismFn> parts;
  for (const auto& c : comps) parts.push_back(mechanism_from_json(c, z_dim, a_dim, 1));
  return [parts, out_dim](const Eigen::VectorXd& z, const Eigen::VectorXd& a) {
    Eigen::VectorXd out(out_dim);
    for (int i = 0; i < out_dim; ++i) out(i) = parts[i](z, a)(0);
    return out;
  };
}

MechanismFn mechanism_from_json(const nlohmann::json& spec, int z_dim, int a_dim, int out_dim) {
  if (!spec.is_object() || !spec.contains("kind") || !spec.at("kind").is_string())
    throw Error("mechanism: expected an object with a 'kind' string");
  std::string kind = spec.at("kind").get<std::string>();
  if (kind == "stack") return stacked_mechanism(spec, z_dim, a_dim, out_dim);
  auto& reg = mechanism_registry();
  auto it = reg.find(kind);
  if (it == reg.end()) throw UnknownTask("unknown mechanism kind '" + kind + "'");
  return it->second(spec, z_dim, a_dim, out_dim);
}

}  // namespace

void register_mechanism(const std::string& name, MechanismFactory factory) {
  mechanism_registry()[name] = std::move(factory);
}

std::vector<std::string> mechanism_names() {
  std::vector<std::string> names;
  for (const auto& [name, factory] : mechanism_registry()) names.push_back(name);
  names.push_back("stack");
  std::sort(names.begin(), names.end());
  return names;
}

Scm scm_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("task document: expected a JSON object");
  Scm scm;
  scm.name = j.value("name", std::string("custom"));

  if (!j.contains("mode")) throw Error("task document: missing 'mode'");
  std::string mode = j.at("mode").get<std::string>();
  if (mode == "cbo") {
    scm.mode = TaskMode::Cbo;
  } else if (mode == "function_network") {
    scm.mode = TaskMode::FunctionNetwork;
  } else {
    throw Error("task document: mode must be 'cbo' or 'function_network'");
  }

  if (!j.contains("dag")) throw Error("task document: missing 'dag'");
  scm.dag = dag_from_json(j.at("dag"));
  const int n = scm.dag.num_nodes();
  if (scm.mode == TaskMode::Cbo && scm.dag.action_dim[n - 1] != 0)
    throw Error("task document: reward node takes actions, which this mode forbids");

  // Flat action space.  Slots default to one private slot per component.
  if (j.contains("action_slots")) {
    const auto& js = j.at("action_slots");
    if (!js.is_array() || static_cast<int>(js.size()) != n)
      throw Error("task document: action_slots needs one entry per node");
    scm.layout.slots.resize(n);
    int max_slot = -1;
    for (int i = 0; i < n; ++i) {
      if (!js[i].is_array() || static_cast<int>(js[i].size()) != scm.dag.action_dim[i])
        throw DimMismatch("task document: action_slots[" + std::to_string(i) +
                          "] must list action_dim slot ids");
      for (const auto& s : js[i]) {
        int g = s.get<int>();
        if (g < 0) throw Error("task document: negative action slot");
        scm.layout.slots[i].push_back(g);
        max_slot = std::max(max_slot, g);
      }
    }
    scm.layout.total_dim = max_slot + 1;
  } else {
    scm.layout = ActionLayout::disjoint(scm.dag.action_dim);
  }
  if (!j.contains("action_box")) throw Error("task document: missing 'action_box'");
  scm.action_box = box_from_pairs(j.at("action_box"), "action_box");
  if (scm.action_box.dim() != scm.layout.total_dim)
    throw DimMismatch("task document: action_box covers " + std::to_string(scm.action_box.dim()) +
                      " slots but the layout uses " + std::to_string(scm.layout.total_dim));

  if (!j.contains("obs_box")) throw Error("task document: missing 'obs_box'");
  const auto& jobs = j.at("obs_box");
  if (!jobs.is_array() || static_cast<int>(jobs.size()) != n)
    throw Error("task document: obs_box needs one entry per node");
  for (int i = 0; i < n; ++i) {
    Box b = box_from_pairs(jobs[i], "obs_box[" + std::to_string(i) + "]");
    if (b.dim() != scm.dag.obs_dim[i])
      throw DimMismatch("task document: obs_box[" + std::to_string(i) + "] has wrong dimension");
    scm.obs_box.push_back(std::move(b));
  }

  // Hard-intervention ranges; a missing or empty entry means "not clampable".
  scm.hard_box.assign(n, Box{});
  if (j.contains("hard_box")) {
    const auto& jh = j.at("hard_box");
    if (!jh.is_array() || static_cast<int>(jh.size()) != n)
      throw Error("task document: hard_box needs one entry per node");
    for (int i = 0; i < n; ++i) {
      Box b = box_from_pairs(jh[i], "hard_box[" + std::to_string(i) + "]");
      if (b.dim() != 0 && b.dim() != scm.dag.obs_dim[i])
        throw DimMismatch("task document: hard_box[" + std::to_string(i) + "] has wrong dimension");
      scm.hard_box[i] = std::move(b);
    }
  }

  // Candidate clamp sets.  Explicit lists are minimized like the built-in
  // catalog's; the default offers every clampable singleton plus "do nothing".
  if (j.contains("candidate_targets")) {
    std::vector<InterventionTargets> sets;
    for (const auto& js : j.at("candidate_targets")) {
      InterventionTargets t;
      for (const auto& v : js) t.push_back(v.get<NodeId>());
      sets.push_back(std::move(t));
    }
    scm.candidate_targets = minimal_intervention_sets(scm.dag, sets);
  } else if (scm.mode == TaskMode::Cbo) {
    std::vector<InterventionTargets> sets{{}};
    for (int i = 0; i < n; ++i)
      if (scm.hard_box[i].dim() > 0) sets.push_back({i});
    scm.candidate_targets = minimal_intervention_sets(scm.dag, sets);
  }
  for (const auto& t : scm.candidate_targets)
    for (NodeId i : t)
      if (scm.hard_box[i].dim() == 0)
        throw Error("task document: candidate target " + std::to_string(i) + " has no hard_box");

  scm.cardinality_limit = j.value("cardinality_limit", -1);

  scm.noise.assign(n, NoiseSpec::none());
  if (j.contains("noise_stddev")) {
    Eigen::VectorXd s = vec_from_json(j.at("noise_stddev"), "noise_stddev");
    if (s.size() != n) throw Error("task document: noise_stddev needs one entry per node");
    for (int i = 0; i < n; ++i) {
      if (s(i) < 0) throw Error("task document: negative noise_stddev");
      if (s(i) > 0) scm.noise[i] = NoiseSpec::gaussian(scm.dag.obs_dim[i], s(i));
    }
  }

  if (!j.contains("mechanisms")) throw Error("task document: missing 'mechanisms'");
  const auto& jm = j.at("mechanisms");
  if (!jm.is_array() || static_cast<int>(jm.size()) != n)
    throw Error("task document: mechanisms needs one entry per node");
  for (int i = 0; i < n; ++i) {
    scm.mechanisms.push_back(mechanism_from_json(jm[i], scm.dag.parent_obs_dim(i),
                                                 scm.dag.action_dim[i], scm.dag.obs_dim[i]));
    scm.mechanism_doc.push_back(jm[i].dump());
  }

  // A slot nobody reads would make the optimizer search a dead dimension.
  {
    std::vector<char> used(scm.layout.total_dim, 0);
    for (const auto& node_slots : scm.layout.slots)
      for (int g : node_slots) used[g] = 1;
    for (int g = 0; g < scm.layout.total_dim; ++g)
      if (!used[g]) throw Error("task document: action slot " + std::to_string(g) + " is unused");
  }
  return scm;
}

}  // namespace mcbo
