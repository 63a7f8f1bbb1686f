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

#include "mcbo/tasks.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace mcbo {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kE = 2.71828182845904523536;

Eigen::VectorXd scalar(double v) {
  Eigen::VectorXd x(1);
  x(0) = v;
  return x;
}

// Fills the generic per-node containers of an Scm after dag/mode are set.
void init_containers(Scm& scm) {
  const int m = scm.num_nodes();
  scm.mechanisms.resize(m);
  scm.noise.assign(m, NoiseSpec::none());
  scm.obs_box.assign(m, Box{});
  scm.hard_box.assign(m, Box{});
  scm.mechanism_doc.assign(m, "");
  scm.layout = ActionLayout::disjoint(scm.dag.action_dim);
  scm.action_box = Box{Eigen::VectorXd(0), Eigen::VectorXd(0)};
}

void set_gaussian_noise(Scm& scm, double stddev, double reward_stddev = -1.0) {
  const int m = scm.num_nodes();
  for (int i = 0; i < m; ++i) {
    const double s = (i == m - 1 && reward_stddev >= 0.0) ? reward_stddev : stddev;
    scm.noise[i] = NoiseSpec::gaussian(scm.dag.obs_dim[i], s);
  }
}

// --- hard-intervention (observe-or-clamp) tasks ----------------------------

Scm make_toygraph(bool noisy) {
  Scm scm;
  scm.name = "toygraph";
  scm.mode = TaskMode::Cbo;
  scm.dag.parents = {{}, {0}, {1}};
  scm.dag.obs_dim = {1, 1, 1};
  scm.dag.action_dim = {0, 0, 0};
  init_containers(scm);

  scm.mechanisms[0] = [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return scalar(0.0); };
  scm.mechanisms[1] = [](const Eigen::VectorXd& z, const Eigen::VectorXd&) {
    return scalar(std::tanh(z(0)));
  };
  scm.mechanisms[2] = [](const Eigen::VectorXd& z, const Eigen::VectorXd&) {
    return scalar(-(z(0) - 1.0) * (z(0) - 1.0));
  };
  scm.mechanism_doc = {"x0 = 0", "x1 = tanh(x0)", "y = -(x1 - 1)^2"};

  scm.hard_box[0] = Box::cube(1, -2.0, 2.0);
  scm.hard_box[1] = Box::cube(1, -2.0, 2.0);
  scm.obs_box[0] = Box::cube(1, -5.0, 5.0);
  scm.obs_box[1] = Box::cube(1, -5.0, 5.0);
  scm.obs_box[2] = Box::cube(1, -40.0, 4.0);
  scm.candidate_targets = minimal_intervention_sets(scm.dag, {{}, {0}, {1}, {0, 1}});
  if (noisy) set_gaussian_noise(scm, 1.0);
  return scm;
}

Scm make_psagraph(bool noisy) {
  Scm scm;
  scm.name = "psagraph";
  scm.mode = TaskMode::Cbo;
  // X0 age-like root; X1 body state; X2, X3 treatments; X4 marker; Y outcome.
  scm.dag.parents = {{}, {0}, {0, 1}, {0, 1}, {0, 1, 2, 3}, {0, 1, 2, 3, 4}};
  scm.dag.obs_dim = {1, 1, 1, 1, 1, 1};
  scm.dag.action_dim = {0, 0, 0, 0, 0, 0};
  init_containers(scm);

  scm.mechanisms[0] = [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return scalar(0.0); };
  scm.mechanisms[1] = [](const Eigen::VectorXd& z, const Eigen::VectorXd&) {
    return scalar(std::tanh(0.5 * z(0)));
  };
  scm.mechanisms[2] = [](const Eigen::VectorXd& z, const Eigen::VectorXd&) {
    return scalar(std::tanh(z(0) - z(1)));
  };
  scm.mechanisms[3] = [](const Eigen::VectorXd& z, const Eigen::VectorXd&) {
    return scalar(std::tanh(0.5 * z(0) + 0.5 * z(1)));
  };
  scm.mechanisms[4] = [](const Eigen::VectorXd& z, const Eigen::VectorXd&) {
    return scalar(std::tanh(0.5 * z(0) + 0.5 * z(1) + z(2) - z(3)));
  };
  scm.mechanisms[5] = [](const Eigen::VectorXd& z, const Eigen::VectorXd&) {
    const double dy = z(4) - 1.0;
    return scalar(std::exp(-dy * dy) + 0.3 * z(2) - 0.3 * z(3) - 0.1 * z(0) + 0.1 * z(1));
  };
  scm.mechanism_doc = {"x0 = 0",
                       "x1 = tanh(0.5 x0)",
                       "x2 = tanh(x0 - x1)",
                       "x3 = tanh(0.5 x0 + 0.5 x1)",
                       "x4 = tanh(0.5 x0 + 0.5 x1 + x2 - x3)",
                       "y = exp(-(x4 - 1)^2) + 0.3 x2 - 0.3 x3 - 0.1 x0 + 0.1 x1"};

  scm.hard_box[2] = Box::cube(1, -1.0, 1.0);
  scm.hard_box[3] = Box::cube(1, -1.0, 1.0);
  for (int i = 0; i < 5; ++i) scm.obs_box[i] = Box::cube(1, -5.0, 5.0);
  scm.obs_box[5] = Box::cube(1, -6.0, 6.0);
  scm.candidate_targets = minimal_intervention_sets(scm.dag, {{}, {2}, {3}, {2, 3}});
  if (noisy) set_gaussian_noise(scm, 1.0);
  return scm;
}

// --- function-network (soft action) tasks ----------------------------------

Scm make_dropwave(bool noisy) {
  Scm scm;
  scm.name = "dropwave";
  scm.mode = TaskMode::FunctionNetwork;
  scm.dag.parents = {{}, {0}};
  scm.dag.obs_dim = {1, 1};
  scm.dag.action_dim = {2, 0};
  init_containers(scm);
  scm.action_box = Box::cube(2, -5.12, 5.12);

  scm.mechanisms[0] = [](const Eigen::VectorXd&, const Eigen::VectorXd& a) {
    return scalar(a.norm());
  };
  scm.mechanisms[1] = [](const Eigen::VectorXd& z, const Eigen::VectorXd&) {
    return scalar((1.0 + std::cos(12.0 * z(0))) / (2.0 + 0.5 * z(0) * z(0)));
  };
  scm.mechanism_doc = {"x0 = ||a||_2", "y = (1 + cos(12 x0)) / (2 + 0.5 x0^2)"};

  scm.obs_box[0] = Box::cube(1, -1.0, 8.0);
  scm.obs_box[1] = Box::cube(1, -1.0, 2.0);
  if (noisy) set_gaussian_noise(scm, 0.1);
  return scm;
}

Scm make_alpine2(bool noisy) {
  Scm scm;
  scm.name = "alpine2";
  scm.mode = TaskMode::FunctionNetwork;
  const int n = 6;
  scm.dag = chain_dag(n, std::vector<int>(n, 1));
  init_containers(scm);
  scm.action_box = Box::cube(n, 0.0, 10.0);

  auto factor = [](double a) { return std::sqrt(a) * std::sin(a); };
  scm.mechanisms[0] = [factor](const Eigen::VectorXd&, const Eigen::VectorXd& a) {
    return scalar(factor(a(0)));
  };
  for (int i = 1; i < n; ++i)
    scm.mechanisms[i] = [factor](const Eigen::VectorXd& z, const Eigen::VectorXd& a) {
      return scalar(factor(a(0)) * z(0));
    };
  scm.mechanism_doc[0] = "x0 = sqrt(a0) sin(a0)";
  for (int i = 1; i < n; ++i)
    scm.mechanism_doc[i] = "x" + std::to_string(i) + " = sqrt(a" + std::to_string(i) +
                           ") sin(a" + std::to_string(i) + ") * x" + std::to_string(i - 1);
  for (int i = 0; i < n; ++i) {
    const double h = std::pow(3.2, i + 1) + 4.0;
    scm.obs_box[i] = Box::cube(1, -h, h);
  }
  if (noisy) set_gaussian_noise(scm, 1.0);
  return scm;
}

Scm make_rosenbrock(bool noisy) {
  Scm scm;
  scm.name = "rosenbrock";
  scm.mode = TaskMode::FunctionNetwork;
  scm.dag.parents = {{}, {0}, {1}, {2}};
  scm.dag.obs_dim = {1, 1, 1, 1};
  scm.dag.action_dim = {2, 2, 2, 2};
  init_containers(scm);
  // Node j reads controls (a_j, a_{j+1}): adjacent nodes share one slot.
  scm.layout.total_dim = 5;
  scm.layout.slots = {{0, 1}, {1, 2}, {2, 3}, {3, 4}};
  scm.action_box = Box::cube(5, -2.0, 2.0);

  auto increment = [](double u, double v) {
    const double q = v - u * u;
    const double r = 1.0 - u;
    return -(q * q + 0.01 * r * r);
  };
  scm.mechanisms[0] = [increment](const Eigen::VectorXd&, const Eigen::VectorXd& a) {
    return scalar(increment(a(0), a(1)));
  };
  for (int i = 1; i < 4; ++i)
    scm.mechanisms[i] = [increment](const Eigen::VectorXd& z, const Eigen::VectorXd& a) {
      return scalar(z(0) + increment(a(0), a(1)));
    };
  scm.mechanism_doc = {"x0 = -((a1 - a0^2)^2 + 0.01 (1 - a0)^2)",
                       "x1 = x0 - ((a2 - a1^2)^2 + 0.01 (1 - a1)^2)",
                       "x2 = x1 - ((a3 - a2^2)^2 + 0.01 (1 - a2)^2)",
                       "y = x2 - ((a4 - a3^2)^2 + 0.01 (1 - a3)^2)"};
  for (int i = 0; i < 4; ++i) scm.obs_box[i] = Box::cube(1, -41.0 * (i + 1), 4.0);
  if (noisy) set_gaussian_noise(scm, 1.0);
  return scm;
}

Scm make_ackley(bool noisy) {
  // The exp(x1) output stage amplifies additive noise on x1 so badly that no
  // noise level is representative; this task is served noiseless only.
  if (noisy) throw UnknownTask("ackley has no noisy variant");
  Scm scm;
  scm.name = "ackley";
  scm.mode = TaskMode::FunctionNetwork;
  scm.dag.parents = {{}, {}, {0, 1}};
  scm.dag.obs_dim = {1, 1, 1};
  scm.dag.action_dim = {6, 6, 0};
  init_containers(scm);
  // Both intermediate nodes read the same six controls.
  scm.layout.total_dim = 6;
  scm.layout.slots = {{0, 1, 2, 3, 4, 5}, {0, 1, 2, 3, 4, 5}, {}};
  scm.action_box = Box::cube(6, -32.768, 32.768);

  scm.mechanisms[0] = [](const Eigen::VectorXd&, const Eigen::VectorXd& a) {
    return scalar(std::sqrt(a.squaredNorm() / a.size()));
  };
  scm.mechanisms[1] = [](const Eigen::VectorXd&, const Eigen::VectorXd& a) {
    double s = 0.0;
    for (int i = 0; i < a.size(); ++i) s += std::cos(2.0 * kPi * a(i));
    return scalar(s / a.size());
  };
  scm.mechanisms[2] = [](const Eigen::VectorXd& z, const Eigen::VectorXd&) {
    return scalar(20.0 * std::exp(-0.2 * z(0)) + std::exp(z(1)) - 20.0 - kE);
  };
  scm.mechanism_doc = {"x0 = rms(a) = sqrt(mean(a^2))", "x1 = mean(cos(2 pi a))",
                       "y = 20 exp(-0.2 x0) + exp(x1) - 20 - e"};
  scm.obs_box[0] = Box::cube(1, -1.0, 34.0);
  scm.obs_box[1] = Box::cube(1, -5.0, 5.0);
  scm.obs_box[2] = Box::cube(1, -27.0, 1.0);
  return scm;
}

Scm make_chain_synthetic(bool noisy) {
  Scm scm;
  scm.name = "chain_synthetic";
  scm.mode = TaskMode::FunctionNetwork;
  scm.dag = chain_dag(3, {1, 1, 0});
  init_containers(scm);
  scm.action_box = Box::cube(2, -1.0, 1.0);

  scm.mechanisms[0] = [](const Eigen::VectorXd&, const Eigen::VectorXd& a) {
    return scalar(std::tanh(a(0)));
  };
  scm.mechanisms[1] = [](const Eigen::VectorXd& z, const Eigen::VectorXd& a) {
    return scalar(std::tanh(z(0) + a(0)));
  };
  scm.mechanisms[2] = [](const Eigen::VectorXd& z, const Eigen::VectorXd&) {
    const double dz = z(0) - 0.6;
    return scalar(std::exp(-dz * dz));
  };
  scm.mechanism_doc = {"x0 = tanh(a0)", "x1 = tanh(x0 + a1)", "y = exp(-(x1 - 0.6)^2)"};
  scm.obs_box[0] = Box::cube(1, -5.0, 5.0);
  scm.obs_box[1] = Box::cube(1, -5.0, 5.0);
  scm.obs_box[2] = Box::cube(1, -4.0, 5.0);
  if (noisy) set_gaussian_noise(scm, 1.0);
  return scm;
}

Scm make_tree_synthetic(bool noisy) {
  Scm scm;
  scm.name = "tree_synthetic";
  scm.mode = TaskMode::FunctionNetwork;
  scm.dag = tree_dag(4, {1, 1, 1, 1, 1, 1, 0});
  init_containers(scm);
  scm.action_box = Box::cube(6, -1.0, 1.0);

  for (int i = 0; i < 4; ++i)
    scm.mechanisms[i] = [](const Eigen::VectorXd&, const Eigen::VectorXd& a) {
      return scalar(std::sin(kPi * a(0)));
    };
  scm.mechanisms[4] = [](const Eigen::VectorXd& z, const Eigen::VectorXd& a) {
    return scalar(std::tanh(z(0) + z(1) + a(0)));
  };
  scm.mechanisms[5] = [](const Eigen::VectorXd& z, const Eigen::VectorXd& a) {
    return scalar(std::tanh(z(0) + z(1) + a(0)));
  };
  scm.mechanisms[6] = [](const Eigen::VectorXd& z, const Eigen::VectorXd&) {
    const double d4 = z(0) - 0.7;
    const double d5 = z(1) + 0.7;
    return scalar(std::exp(-d4 * d4 - d5 * d5));
  };
  scm.mechanism_doc = {"x0 = sin(pi a0)",
                       "x1 = sin(pi a1)",
                       "x2 = sin(pi a2)",
                       "x3 = sin(pi a3)",
                       "x4 = tanh(x0 + x1 + a4)",
                       "x5 = tanh(x2 + x3 + a5)",
                       "y = exp(-(x4 - 0.7)^2 - (x5 + 0.7)^2)"};
  for (int i = 0; i < 6; ++i) scm.obs_box[i] = Box::cube(1, -5.0, 5.0);
  scm.obs_box[6] = Box::cube(1, -4.0, 5.0);
  if (noisy) set_gaussian_noise(scm, 1.0);
  return scm;
}

}  // namespace

Scm make_task(const std::string& name, bool noisy) {
  if (name == "toygraph") return make_toygraph(noisy);
  if (name == "psagraph") return make_psagraph(noisy);
  if (name == "dropwave") return make_dropwave(noisy);
  if (name == "alpine2") return make_alpine2(noisy);
  if (name == "rosenbrock") return make_rosenbrock(noisy);
  if (name == "ackley") return make_ackley(noisy);
  if (name == "chain_synthetic") return make_chain_synthetic(noisy);
  if (name == "tree_synthetic") return make_tree_synthetic(noisy);
  std::string known;
  for (const auto& n : task_names()) known += (known.empty() ? "" : ", ") + n;
  throw UnknownTask("no task named \"" + name + "\" (known: " + known + ")");
}

std::vector<std::string> task_names() {
  return {"toygraph",  "psagraph", "dropwave",        "alpine2",
          "rosenbrock", "ackley",   "chain_synthetic", "tree_synthetic"};
}

nlohmann::json task_definition_json(const std::string& name, bool noisy) {
  const Scm scm = make_task(name, noisy);
  nlohmann::json j;
  j["name"] = scm.name;
  j["noisy"] = noisy;
  j["mode"] = scm.mode == TaskMode::Cbo ? "cbo" : "function_network";
  j["dag"] = dag_to_json(scm.dag);
  j["mechanisms"] = scm.mechanism_doc;
  j["action_slots"] = scm.layout.slots;
  nlohmann::json boxes = nlohmann::json::array();
  for (int g = 0; g < scm.action_box.dim(); ++g)
    boxes.push_back({scm.action_box.lo(g), scm.action_box.hi(g)});
  j["action_box"] = boxes;
  nlohmann::json hard = nlohmann::json::array();
  for (int i = 0; i < scm.num_nodes(); ++i) {
    nlohmann::json hb = nlohmann::json::array();
    for (int d = 0; d < scm.hard_box[i].dim(); ++d)
      hb.push_back({scm.hard_box[i].lo(d), scm.hard_box[i].hi(d)});
    hard.push_back(hb);
  }
  j["hard_box"] = hard;
  j["candidate_targets"] = scm.candidate_targets;
  nlohmann::json noise = nlohmann::json::array();
  for (const auto& n : scm.noise)
    noise.push_back(n.is_none() ? 0.0 : n.stddev(0));
  j["noise_stddev"] = noise;
  return j;
}

Dag chain_dag(int n_nodes, const std::vector<int>& action_dims) {
  if (n_nodes < 1) throw DimMismatch("chain needs at least one node");
  if (!action_dims.empty() && static_cast<int>(action_dims.size()) != n_nodes)
    throw LengthMismatch("action_dims must have one entry per node");
  Dag dag;
  for (int i = 0; i < n_nodes; ++i) {
    dag.parents.push_back(i == 0 ? std::vector<NodeId>{} : std::vector<NodeId>{i - 1});
    dag.obs_dim.push_back(1);
    dag.action_dim.push_back(action_dims.empty() ? 0 : action_dims[i]);
  }
  validate_dag(dag);
  return dag;
}

Dag tree_dag(int leaves, const std::vector<int>& action_dims) {
  if (leaves < 2 || (leaves & (leaves - 1)) != 0)
    throw DimMismatch("tree leaves must be a power of two >= 2");
  // Nodes: leaves first, then each internal level, root (reward) last.
  Dag dag;
  int level_size = leaves;
  int level_start = 0;
  int total = 0;
  for (int s = leaves; s >= 1; s /= 2) total += s;
  for (int i = 0; i < leaves; ++i) {
    dag.parents.push_back({});
    dag.obs_dim.push_back(1);
  }
  while (level_size > 1) {
    for (int i = 0; i < level_size / 2; ++i) {
      dag.parents.push_back({level_start + 2 * i, level_start + 2 * i + 1});
      dag.obs_dim.push_back(1);
    }
    level_start += level_size;
    level_size /= 2;
  }
  dag.action_dim.assign(total, 0);
  if (!action_dims.empty()) {
    if (static_cast<int>(action_dims.size()) != total)
      throw LengthMismatch("action_dims must have one entry per node");
    dag.action_dim = action_dims;
  }
  validate_dag(dag);
  return dag;
}

double RkhsFunction::eval(const Eigen::VectorXd& s) const {
  double v = 0.0;
  for (size_t j = 0; j < centers.size(); ++j) v += alpha(j) * kernel_eval(kernel, s, centers[j]);
  return v;
}

double RkhsFunction::norm() const {
  const int n = static_cast<int>(centers.size());
  Eigen::MatrixXd gram(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gram(i, j) = kernel_eval(kernel, centers[i], centers[j]);
  return std::sqrt(alpha.dot(gram * alpha));
}

RkhsFunction draw_rkhs_function(const Kernel& kernel, const Box& domain, int n_centers,
                                double norm_bound, Rng& rng) {
  if (n_centers < 1) throw Error("need at least one center");
  if (!(norm_bound > 0.0)) throw Error("norm_bound must be positive");
  RkhsFunction f;
  f.kernel = kernel;
  for (int j = 0; j < n_centers; ++j) f.centers.push_back(domain.sample(rng));
  f.alpha.resize(n_centers);
  for (int j = 0; j < n_centers; ++j) f.alpha(j) = rng.normal();
  const double n0 = f.norm();
  if (n0 > 0.0) f.alpha *= norm_bound / n0;  // exact norm by construction
  return f;
}

Scm make_rkhs_task(const Dag& dag, const RkhsTaskParams& params, std::uint64_t seed) {
  validate_dag(dag);
  Scm scm;
  scm.name = "rkhs";
  scm.mode = TaskMode::FunctionNetwork;
  scm.dag = dag;
  init_containers(scm);
  scm.action_box =
      Box::cube(scm.layout.total_dim, -params.action_halfwidth, params.action_halfwidth);

  const double obs_half = params.norm_bound + 3.0 * params.noise_std + params.obs_margin;
  for (int i = 0; i < scm.num_nodes(); ++i)
    scm.obs_box[i] = Box::cube(dag.obs_dim[i], -obs_half, obs_half);

  Rng rng(seed);
  for (int i = 0; i < scm.num_nodes(); ++i) {
    // Input domain for node i's mechanism: parent boxes then action slots.
    const int zd = dag.parent_obs_dim(i);
    const int ad = dag.action_dim[i];
    Box domain;
    domain.lo.resize(zd + ad);
    domain.hi.resize(zd + ad);
    int at = 0;
    for (NodeId p : dag.parents[i]) {
      domain.lo.segment(at, dag.obs_dim[p]) = scm.obs_box[p].lo;
      domain.hi.segment(at, dag.obs_dim[p]) = scm.obs_box[p].hi;
      at += dag.obs_dim[p];
    }
    for (int j = 0; j < ad; ++j) {
      const int g = scm.layout.slots[i][j];
      domain.lo(at) = scm.action_box.lo(g);
      domain.hi(at) = scm.action_box.hi(g);
      ++at;
    }

    Rng node_rng = rng.fork(i);
    std::vector<RkhsFunction> comps;
    for (int l = 0; l < dag.obs_dim[i]; ++l)
      comps.push_back(draw_rkhs_function(params.kernel, domain, params.n_centers,
                                         params.norm_bound, node_rng));
    scm.mechanisms[i] = [comps](const Eigen::VectorXd& z, const Eigen::VectorXd& a) {
      Eigen::VectorXd s(z.size() + a.size());
      s << z, a;
      Eigen::VectorXd x(comps.size());
      for (size_t l = 0; l < comps.size(); ++l) x(l) = comps[l].eval(s);
      return x;
    };
    scm.mechanism_doc[i] = "finite kernel expansion, " + std::to_string(params.n_centers) +
                           " centers, norm " + std::to_string(params.norm_bound);
    if (params.noise_std > 0.0)
      scm.noise[i] = NoiseSpec::gaussian(dag.obs_dim[i], params.noise_std);
  }
  return scm;
}

}  // namespace mcbo
