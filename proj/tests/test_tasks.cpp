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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "mcbo/tasks.hpp"

using namespace mcbo;

namespace {

Eigen::VectorXd scalar(double v) {
  Eigen::VectorXd x(1);
  x(0) = v;
  return x;
}

double reward_at_flat(const Scm& scm, const Eigen::VectorXd& flat) {
  Rng rng(0);
  return expected_reward(scm, Intervention::soft_flat(scm, flat), 1, rng);
}

double reward_at_hard(const Scm& scm, InterventionTargets t, std::vector<Eigen::VectorXd> v) {
  Rng rng(0);
  return expected_reward(scm, Intervention::hard(std::move(t), std::move(v)), 1, rng);
}

}  // namespace

TEST_CASE("catalog lists eight tasks and rejects unknown names") {
  const auto names = task_names();
  REQUIRE(names.size() == 8);
  const std::vector<std::string> expected = {"toygraph",   "psagraph", "dropwave",
                                             "alpine2",    "rosenbrock", "ackley",
                                             "chain_synthetic", "tree_synthetic"};
  CHECK(names == expected);
  CHECK_THROWS_AS(make_task("nope"), UnknownTask);
  CHECK_THROWS_AS(task_definition_json("nope"), UnknownTask);
}

TEST_CASE("every catalog entry is internally consistent") {
  for (const auto& name : task_names()) {
    for (bool noisy : {false, true}) {
      CAPTURE(name);
      CAPTURE(noisy);
      if (name == "ackley" && noisy) {
        // The exp output stage has no representative noise level.
        CHECK_THROWS_AS(make_task(name, true), UnknownTask);
        continue;
      }
      const Scm scm = make_task(name, noisy);
      CHECK_NOTHROW(validate_dag(scm.dag));
      const int m = scm.num_nodes();
      REQUIRE(static_cast<int>(scm.mechanisms.size()) == m);
      REQUIRE(static_cast<int>(scm.mechanism_doc.size()) == m);
      REQUIRE(static_cast<int>(scm.obs_box.size()) == m);
      REQUIRE(static_cast<int>(scm.hard_box.size()) == m);
      REQUIRE(static_cast<int>(scm.noise.size()) == m);
      REQUIRE(static_cast<int>(scm.layout.slots.size()) == m);
      CHECK(scm.action_box.dim() == scm.layout.total_dim);
      for (int i = 0; i < m; ++i) {
        CHECK(scm.obs_box[i].dim() == scm.dag.obs_dim[i]);
        REQUIRE(static_cast<int>(scm.layout.slots[i].size()) == scm.dag.action_dim[i]);
        for (int g : scm.layout.slots[i]) {
          CHECK(g >= 0);
          CHECK(g < scm.layout.total_dim);
        }
        CHECK(scm.noise[i].is_none() == !noisy);
      }
      if (scm.mode == TaskMode::Cbo) {
        CHECK(scm.layout.total_dim == 0);
        CHECK(!scm.candidate_targets.empty());
        for (const auto& t : scm.candidate_targets)
          for (NodeId n : t) CHECK(scm.hard_box[n].dim() == scm.dag.obs_dim[n]);
      } else {
        CHECK(scm.layout.total_dim > 0);
      }

      // The observational sample of the noiseless system stays in-box.
      if (!noisy) {
        Rng rng(1);
        const Sample s = simulate(make_task(name, false), Intervention::observational(), rng);
        for (int i = 0; i < m; ++i) {
          CAPTURE(i);
          CHECK(scm.obs_box[i].contains(s.obs[i]));
        }
      }
    }
  }
}

TEST_CASE("clamp-style tasks expose the expected minimal target sets") {
  const Scm toy = make_task("toygraph");
  REQUIRE(toy.candidate_targets.size() == 3);
  CHECK(toy.candidate_targets[0] == InterventionTargets{});
  CHECK(toy.candidate_targets[1] == InterventionTargets{0});
  CHECK(toy.candidate_targets[2] == InterventionTargets{1});

  const Scm psa = make_task("psagraph");
  REQUIRE(psa.candidate_targets.size() == 4);
  CHECK(psa.candidate_targets[1] == InterventionTargets{2});
  CHECK(psa.candidate_targets[2] == InterventionTargets{3});
  CHECK(psa.candidate_targets[3] == (InterventionTargets{2, 3}));
  CHECK(max_parents(psa.dag) == 5);
}

TEST_CASE("function-network shapes: chains, trees and shared slots") {
  const Scm chain = make_task("chain_synthetic");
  CHECK(max_depth(chain.dag) == 3);  // action -> x0 -> x1 -> y
  CHECK(chain.layout.total_dim == 2);

  const Scm tree = make_task("tree_synthetic");
  REQUIRE(tree.num_nodes() == 7);
  CHECK(tree.dag.parents[4] == (std::vector<NodeId>{0, 1}));
  CHECK(tree.dag.parents[5] == (std::vector<NodeId>{2, 3}));
  CHECK(tree.dag.parents[6] == (std::vector<NodeId>{4, 5}));
  CHECK(tree.layout.total_dim == 6);

  const Scm rosen = make_task("rosenbrock");
  CHECK(rosen.layout.total_dim == 5);
  CHECK(rosen.layout.slots[0] == (std::vector<int>{0, 1}));
  CHECK(rosen.layout.slots[3] == (std::vector<int>{3, 4}));

  const Scm ack = make_task("ackley");
  CHECK(ack.layout.total_dim == 6);
  CHECK(ack.layout.slots[0] == ack.layout.slots[1]);
  CHECK(ack.layout.slots[2].empty());
}

TEST_CASE("known optima of the closed-form tasks") {
  // dropwave: y = (1 + cos(12 x0)) / (2 + x0^2 / 2) peaks at x0 = ||a|| = 0.
  CHECK(reward_at_flat(make_task("dropwave"), Eigen::VectorXd::Zero(2)) ==
        doctest::Approx(1.0).epsilon(1e-15));

  // rosenbrock chain: every increment vanishes at a = (1, ..., 1).
  CHECK(reward_at_flat(make_task("rosenbrock"), Eigen::VectorXd::Ones(5)) ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  // ackley: rms = 0 and mean-cos = 1 at the origin, so y = 0 there.
  CHECK(reward_at_flat(make_task("ackley"), Eigen::VectorXd::Zero(6)) ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  // chain_synthetic: x1 = tanh(tanh(0) + log 2) = 0.6 exactly, so y = 1.
  Eigen::VectorXd chain_a(2);
  chain_a << 0.0, std::log(2.0);
  CHECK(reward_at_flat(make_task("chain_synthetic"), chain_a) ==
        doctest::Approx(1.0).epsilon(1e-14));

  // tree_synthetic: zero the leaves, steer the two mid nodes to +-0.7.
  Eigen::VectorXd tree_a(6);
  tree_a << 0.0, 0.0, 0.0, 0.0, std::atanh(0.7), -std::atanh(0.7);
  CHECK(reward_at_flat(make_task("tree_synthetic"), tree_a) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // alpine2: all six factors near their max sqrt(a) sin(a) on [0, 10].
  CHECK(reward_at_flat(make_task("alpine2"), Eigen::VectorXd::Constant(6, 7.917)) > 400.0);
}

TEST_CASE("clamp-task rewards match hand-evaluated compositions") {
  const Scm toy = make_task("toygraph");
  Rng rng(0);
  // Observational: x1 = tanh(0) = 0, y = -(0 - 1)^2 = -1.
  CHECK(expected_reward(toy, Intervention::observational(), 1, rng) == -1.0);
  // Clamping the direct parent of the reward to 1 achieves the maximum 0.
  CHECK(reward_at_hard(toy, {1}, {scalar(1.0)}) == 0.0);
  // Clamping the root can only reach y = -(tanh(2) - 1)^2 < 0.
  const double via_root = -(std::tanh(2.0) - 1.0) * (std::tanh(2.0) - 1.0);
  CHECK(reward_at_hard(toy, {0}, {scalar(2.0)}) == doctest::Approx(via_root).epsilon(1e-15));
  CHECK(via_root < 0.0);

  const Scm psa = make_task("psagraph");
  CHECK(expected_reward(psa, Intervention::observational(), 1, rng) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  // do(x2 = 1, x3 = -1): x4 = tanh(2), y = exp(-(tanh 2 - 1)^2) + 0.6.
  const double t2 = std::tanh(2.0);
  const double best = std::exp(-(t2 - 1.0) * (t2 - 1.0)) + 0.6;
  CHECK(reward_at_hard(psa, {2, 3}, {scalar(1.0), scalar(-1.0)}) ==
        doctest::Approx(best).epsilon(1e-15));
  CHECK(best > std::exp(-1.0));  // joint clamp beats observing
}

TEST_CASE("diagram builders validate their inputs") {
  const Dag c1 = chain_dag(1);
  CHECK(c1.num_nodes() == 1);
  CHECK(max_depth(c1) == 0);

  const Dag c3 = chain_dag(3);
  CHECK(c3.parents[2] == std::vector<NodeId>{1});
  CHECK(max_depth(c3) == 2);
  CHECK(chain_dag(3, {1, 1, 0}).action_dim == (std::vector<int>{1, 1, 0}));
  CHECK_THROWS_AS(chain_dag(0), DimMismatch);
  CHECK_THROWS_AS(chain_dag(3, {1, 1}), LengthMismatch);

  const Dag t2 = tree_dag(2);
  CHECK(t2.num_nodes() == 3);
  CHECK(t2.parents[2] == (std::vector<NodeId>{0, 1}));
  const Dag t4 = tree_dag(4);
  CHECK(t4.num_nodes() == 7);
  CHECK(t4.parents[6] == (std::vector<NodeId>{4, 5}));
  CHECK_THROWS_AS(tree_dag(3), DimMismatch);
  CHECK_THROWS_AS(tree_dag(0), DimMismatch);
  CHECK_THROWS_AS(tree_dag(4, {1, 1}), LengthMismatch);
}

TEST_CASE("finite kernel expansions have exact norm and stay bounded") {
  Kernel k;  // default squared-exponential, unit variance
  const Box domain = Box::cube(2, -1.0, 1.0);
  Rng rng(42);
  const RkhsFunction f = draw_rkhs_function(k, domain, 15, 2.0, rng);
  CHECK(f.norm() == doctest::Approx(2.0).epsilon(1e-12));

  // |f(s)| = |<f, k(., s)>| <= ||f|| sqrt(k(s, s)) = 2 everywhere.
  Rng probe(7);
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd s(2);
    s << probe.uniform(-3.0, 3.0), probe.uniform(-3.0, 3.0);
    CHECK(std::abs(f.eval(s)) <= 2.0 + 1e-9);
  }

  Rng r1(9), r2(9);
  const RkhsFunction a = draw_rkhs_function(k, domain, 5, 1.0, r1);
  const RkhsFunction b = draw_rkhs_function(k, domain, 5, 1.0, r2);
  CHECK(a.alpha == b.alpha);
  for (int j = 0; j < 5; ++j) CHECK(a.centers[j] == b.centers[j]);

  CHECK_THROWS_AS(draw_rkhs_function(k, domain, 0, 1.0, rng), Error);
  CHECK_THROWS_AS(draw_rkhs_function(k, domain, 3, 0.0, rng), Error);
}

TEST_CASE("random regular tasks: geometry, noise wiring and determinism") {
  const Dag dag = chain_dag(3, {1, 1, 1});
  RkhsTaskParams params;
  params.norm_bound = 1.0;
  params.noise_std = 0.1;
  params.obs_margin = 0.5;

  const Scm scm = make_rkhs_task(dag, params, 7);
  CHECK(scm.mode == TaskMode::FunctionNetwork);
  CHECK(scm.action_box.dim() == 3);
  for (int i = 0; i < 3; ++i) {
    // Half-width = norm bound + 3 sigma + margin.
    CHECK(scm.obs_box[i].hi(0) == doctest::Approx(1.8));
    CHECK(scm.obs_box[i].lo(0) == doctest::Approx(-1.8));
    REQUIRE(!scm.noise[i].is_none());
    CHECK(scm.noise[i].stddev(0) == 0.1);
  }

  params.noise_std = 0.0;
  const Scm quiet = make_rkhs_task(dag, params, 7);
  for (int i = 0; i < 3; ++i) CHECK(quiet.noise[i].is_none());
  CHECK(quiet.obs_box[0].hi(0) == doctest::Approx(1.5));

  // Mechanism outputs respect the norm bound, so rollouts stay in-box.
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd flat(3);
    for (int g = 0; g < 3; ++g) flat(g) = rng.uniform(-1.0, 1.0);
    const Sample s = simulate(quiet, Intervention::soft_flat(quiet, flat), rng);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(s.obs[i](0)) <= 1.0 + 1e-9);
  }

  // Same seed, same system; different seed, different system.
  const Scm twin = make_rkhs_task(dag, params, 7);
  const Scm other = make_rkhs_task(dag, params, 8);
  Eigen::VectorXd probe_flat(3);
  probe_flat << 0.3, -0.2, 0.9;
  const double r0 = reward_at_flat(quiet, probe_flat);
  CHECK(reward_at_flat(twin, probe_flat) == r0);
  CHECK(reward_at_flat(other, probe_flat) != r0);
}

TEST_CASE("task definition documents are stable and complete") {
  for (const auto& name : task_names()) {
    CAPTURE(name);
    const auto j = task_definition_json(name);
    CHECK(j.at("name") == name);
    CHECK(j.contains("dag"));
    CHECK(j.contains("mechanisms"));
    CHECK(j.contains("action_box"));
    CHECK(j.contains("noise_stddev"));
    CHECK(task_definition_json(name) == j);  // deterministic
    if (name == "ackley")
      CHECK_THROWS_AS(task_definition_json(name, true), UnknownTask);
    else
      CHECK(task_definition_json(name, true) != j);
    for (const auto& s : j.at("noise_stddev")) CHECK(s.get<double>() == 0.0);
  }
  CHECK(task_definition_json("toygraph").at("mode") == "cbo");
  CHECK(task_definition_json("ackley").at("mode") == "function_network");
  CHECK(task_definition_json("psagraph").at("candidate_targets").size() == 4);
}
