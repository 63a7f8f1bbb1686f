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

#include "mcbo/gp.hpp"
#include "mcbo/rng.hpp"

using namespace mcbo;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<int>(v.size()));
  int i = 0;
  for (double e : v) x(i++) = e;
  return x;
}

Eigen::VectorXd random_vec(int n, Rng& rng, double lo = -2.0, double hi = 2.0) {
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = rng.uniform(lo, hi);
  return x;
}

GpDataset random_dataset(int t, int in_dim, int out_dim, double noise_var, Rng& rng) {
  GpDataset data;
  data.noise_var = noise_var;
  data.in_dim_hint = in_dim;
  data.out_dim_hint = out_dim;
  for (int i = 0; i < t; ++i) data.add(random_vec(in_dim, rng), random_vec(out_dim, rng));
  return data;
}

// Textbook posterior by dense inversion of the full augmented Gram matrix:
//   mu(s)  = k_*' (K + rho^2 I)^{-1} y
//   var(s) = k(s, s) - k_*' (K + rho^2 I)^{-1} k_*
// Slow and allocation-happy on purpose; the production path must agree.
void dense_posterior(const Kernel& k, const GpDataset& data, double rho2,
                     const Eigen::VectorXd& s, Eigen::VectorXd& mu, Eigen::VectorXd& var) {
  const int t = data.size();
  const int d = data.output_dim();
  const int n = t * d;
  Eigen::MatrixXd gram(n, n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < t; ++i)
    for (int l = 0; l < d; ++l) {
      y(i * d + l) = data.outputs[i](l);
      for (int j = 0; j < t; ++j)
        for (int ll = 0; ll < d; ++ll)
          gram(i * d + l, j * d + ll) = kernel_eval(k, data.inputs[i], l, data.inputs[j], ll);
    }
  gram.diagonal().array() += rho2;
  const Eigen::MatrixXd inv = gram.inverse();

  mu.resize(d);
  var.resize(d);
  for (int l = 0; l < d; ++l) {
    Eigen::VectorXd kq(n);
    for (int i = 0; i < t; ++i)
      for (int ll = 0; ll < d; ++ll)
        kq(i * d + ll) = kernel_eval(k, data.inputs[i], ll, s, l);
    mu(l) = kq.dot(inv * y);
    var(l) = kernel_eval(k, s, l, s, l) - kq.dot(inv * kq);
  }
}

}  // namespace

TEST_CASE("kernel_eval matches closed forms") {
  Kernel rbf;  // unit variance, unit lengthscale
  // Distance 1 under the rbf kernel: exp(-1/2).
  CHECK(kernel_eval(rbf, vec({0.0}), vec({1.0})) ==
        doctest::Approx(0.60653065971263342).epsilon(1e-15));
  CHECK(kernel_eval(rbf, vec({0.3, -0.7}), vec({0.3, -0.7})) == doctest::Approx(1.0));

  Kernel wide{Kernel::Kind::Rbf, 2.0, 0.5};
  CHECK(kernel_eval(wide, vec({0.0}), vec({2.0})) ==
        doctest::Approx(0.5 * std::exp(-0.5)).epsilon(1e-15));

  Kernel lin{Kernel::Kind::Linear, 1.0, 0.25};
  CHECK(kernel_eval(lin, vec({1.0, 2.0}), vec({3.0, -1.0})) == doctest::Approx(0.25));

  // Output components are independent: cross-component covariance is zero.
  CHECK(kernel_eval(rbf, vec({0.0}), 0, vec({0.0}), 1) == 0.0);
  CHECK(kernel_eval(rbf, vec({0.0}), 1, vec({0.0}), 1) == doctest::Approx(1.0));

  CHECK_THROWS_AS(kernel_eval(rbf, vec({0.0}), vec({0.0, 1.0})), DimMismatch);
}

TEST_CASE("kernel validation rejects out-of-range hyperparameters") {
  GpDataset data = []() {
    GpDataset d;
    d.add(vec({0.0}), vec({1.0}));
    return d;
  }();
  CHECK_THROWS_AS(GpPosterior(Kernel{Kernel::Kind::Rbf, 1.0, 1.5}, data), Error);
  CHECK_THROWS_AS(GpPosterior(Kernel{Kernel::Kind::Rbf, 1.0, 0.0}, data), Error);
  CHECK_THROWS_AS(GpPosterior(Kernel{Kernel::Kind::Rbf, -1.0, 1.0}, data), Error);
  CHECK_NOTHROW(GpPosterior(Kernel{Kernel::Kind::Linear, 1.0, 1.0}, data));
}

TEST_CASE("single observation posterior has the textbook closed form") {
  // One point at the query itself: mu = y / (1 + rho^2), var = 1 - 1/(1 + rho^2).
  GpDataset data;
  data.noise_var = 0.1;
  data.add(vec({0.0}), vec({1.0}));
  GpPosterior gp(Kernel{}, data);
  CHECK(gp.mean(vec({0.0}))(0) == doctest::Approx(1.0 / 1.1).epsilon(1e-14));
  CHECK(gp.var(vec({0.0}))(0) == doctest::Approx(1.0 - 1.0 / 1.1).epsilon(1e-12));

  const auto [lo, hi] = gp.bounds(vec({0.0}), 2.0);
  const double sigma = std::sqrt(gp.var(vec({0.0}))(0));
  CHECK(lo(0) == doctest::Approx(1.0 / 1.1 - 2.0 * sigma));
  CHECK(hi(0) == doctest::Approx(1.0 / 1.1 + 2.0 * sigma));
}

TEST_CASE("empty dataset falls back to the prior") {
  GpDataset data;
  data.in_dim_hint = 2;
  data.out_dim_hint = 3;
  GpPosterior gp(Kernel{Kernel::Kind::Rbf, 1.0, 0.7}, data);
  const Eigen::VectorXd s = vec({0.4, -1.0});
  CHECK(gp.mean(s).isZero(0.0));
  CHECK(gp.var(s)(0) == doctest::Approx(0.7));
  CHECK(gp.var(s)(2) == doctest::Approx(0.7));
  CHECK(gp.num_points() == 0);
  CHECK_THROWS_AS(gp.mean(vec({0.0})), DimMismatch);  // hint enforces the dim
}

TEST_CASE("posterior matches the dense-inversion reference") {
  Rng rng(42);
  for (int trial = 0; trial < 25; ++trial) {
    const int t = 1 + static_cast<int>(rng.next_u64() % 12);
    const int in_dim = 1 + static_cast<int>(rng.next_u64() % 3);
    const int out_dim = 1 + static_cast<int>(rng.next_u64() % 2);
    Kernel k;
    if (rng.uniform01() < 0.3) {
      k.kind = Kernel::Kind::Linear;
      k.variance = rng.uniform(0.2, 1.0);
    } else {
      k.lengthscale = rng.uniform(0.5, 2.0);
      k.variance = rng.uniform(0.2, 1.0);
    }
    const double noise = rng.uniform(1e-3, 0.3);
    GpDataset data = random_dataset(t, in_dim, out_dim, noise, rng);
    GpPosterior gp(k, data);

    for (int q = 0; q < 4; ++q) {
      const Eigen::VectorXd s = random_vec(in_dim, rng);
      Eigen::VectorXd mu_ref, var_ref;
      dense_posterior(k, data, gp.effective_noise_var(), s, mu_ref, var_ref);
      const Eigen::VectorXd mu = gp.mean(s);
      const Eigen::VectorXd var = gp.var(s);
      for (int l = 0; l < out_dim; ++l) {
        CHECK(mu(l) == doctest::Approx(mu_ref(l)).epsilon(1e-9));
        CHECK(var(l) == doctest::Approx(std::max(0.0, var_ref(l))).epsilon(1e-9).scale(1.0));
      }
    }
  }
}

TEST_CASE("vector outputs decouple into independent scalar models") {
  Rng rng(7);
  GpDataset both = random_dataset(8, 2, 2, 0.05, rng);
  GpDataset first, second;
  first.noise_var = second.noise_var = 0.05;
  for (int i = 0; i < both.size(); ++i) {
    first.add(both.inputs[i], both.outputs[i].head(1));
    second.add(both.inputs[i], both.outputs[i].tail(1));
  }
  Kernel k{Kernel::Kind::Rbf, 1.3, 0.9};
  GpPosterior gp(k, both), gp0(k, first), gp1(k, second);
  for (int q = 0; q < 5; ++q) {
    const Eigen::VectorXd s = random_vec(2, rng);
    CHECK(gp.mean(s)(0) == doctest::Approx(gp0.mean(s)(0)).epsilon(1e-12));
    CHECK(gp.mean(s)(1) == doctest::Approx(gp1.mean(s)(0)).epsilon(1e-12));
    CHECK(gp.var(s)(0) == doctest::Approx(gp0.var(s)(0)).epsilon(1e-12));
    CHECK(gp.var(s)(1) == doctest::Approx(gp1.var(s)(0)).epsilon(1e-12));
  }
}

TEST_CASE("noiseless duplicate inputs are rescued by jitter escalation") {
  GpDataset data;
  data.noise_var = 0.0;
  for (int i = 0; i < 5; ++i) data.add(vec({1.0, 1.0}), vec({2.0}));
  GpPosterior gp(Kernel{}, data);
  CHECK(gp.effective_noise_var() >= 1e-6);
  CHECK(gp.effective_noise_var() <= 1e-4);
  // The posterior at the duplicated point should essentially interpolate.
  CHECK(gp.mean(vec({1.0, 1.0}))(0) == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(gp.var(vec({1.0, 1.0}))(0) >= 0.0);
  CHECK(std::isfinite(gp.var(vec({-3.0, 0.5}))(0)));
}

TEST_CASE("variance is floored at zero and the diagnostic counter stays clean") {
  gp_reset_negative_variance_count();
  Rng rng(11);
  // Tight clusters of nearly identical points push the raw variance slightly
  // negative through round-off; the floor must absorb that silently.
  GpDataset data;
  data.noise_var = 0.0;
  for (int i = 0; i < 12; ++i) data.add(vec({0.5 + 1e-13 * i}), vec({1.0}));
  GpPosterior gp(Kernel{}, data);
  for (int q = 0; q < 20; ++q) {
    const Eigen::VectorXd s = random_vec(1, rng);
    CHECK(gp.var(s)(0) >= 0.0);
  }
  CHECK(gp.var(vec({0.5}))(0) >= 0.0);
  CHECK(gp_negative_variance_count() == 0);
  gp_reset_negative_variance_count();
}

TEST_CASE("query_grad agrees with central finite differences") {
  Rng rng(123);
  const double h = 1e-6;
  for (int trial = 0; trial < 8; ++trial) {
    Kernel k;
    if (trial % 3 == 0) {
      k.kind = Kernel::Kind::Linear;
      k.variance = 0.8;
    } else {
      k.lengthscale = rng.uniform(0.6, 1.8);
      k.variance = rng.uniform(0.4, 1.0);
    }
    const int in_dim = 1 + static_cast<int>(rng.next_u64() % 3);
    const int out_dim = 1 + static_cast<int>(rng.next_u64() % 2);
    GpDataset data = random_dataset(6, in_dim, out_dim, 0.05, rng);
    GpPosterior gp(k, data);

    const Eigen::VectorXd s = random_vec(in_dim, rng, 0.2, 1.8);
    const auto qg = gp.query_grad(s);
    CHECK(qg.mu.isApprox(gp.mean(s), 1e-12));
    CHECK(qg.sigma.isApprox(gp.var(s).cwiseSqrt(), 1e-12));

    for (int kdim = 0; kdim < in_dim; ++kdim) {
      Eigen::VectorXd sp = s, sm = s;
      sp(kdim) += h;
      sm(kdim) -= h;
      const Eigen::VectorXd mu_p = gp.mean(sp), mu_m = gp.mean(sm);
      const Eigen::VectorXd sd_p = gp.var(sp).cwiseSqrt(), sd_m = gp.var(sm).cwiseSqrt();
      for (int l = 0; l < out_dim; ++l) {
        const double dmu_fd = (mu_p(l) - mu_m(l)) / (2.0 * h);
        const double dsd_fd = (sd_p(l) - sd_m(l)) / (2.0 * h);
        CHECK(qg.dmu(l, kdim) == doctest::Approx(dmu_fd).epsilon(1e-5).scale(1.0));
        CHECK(qg.dsigma(l, kdim) == doctest::Approx(dsd_fd).epsilon(1e-5).scale(1.0));
      }
    }
  }
}

TEST_CASE("query_grad on the prior handles the linear kernel's moving variance") {
  GpDataset data;
  data.in_dim_hint = 2;
  GpPosterior gp(Kernel{Kernel::Kind::Linear, 1.0, 0.5}, data);
  const Eigen::VectorXd s = vec({1.0, -2.0});
  const auto qg = gp.query_grad(s);
  // var = 0.5 * s's = 2.5, sigma = sqrt(2.5), dsigma = 0.5 * s / sigma.
  CHECK(qg.sigma(0) == doctest::Approx(std::sqrt(2.5)));
  CHECK(qg.dsigma(0, 0) == doctest::Approx(0.5 * 1.0 / std::sqrt(2.5)));
  CHECK(qg.dsigma(0, 1) == doctest::Approx(0.5 * -2.0 / std::sqrt(2.5)));
  CHECK(qg.dmu.isZero(0.0));
}

TEST_CASE("dataset add() enforces consistent shapes") {
  GpDataset data;
  data.in_dim_hint = 2;
  CHECK_THROWS_AS(data.add(vec({1.0}), vec({0.0})), DimMismatch);
  data.add(vec({1.0, 2.0}), vec({0.0}));
  CHECK_THROWS_AS(data.add(vec({1.0, 2.0, 3.0}), vec({0.0})), DimMismatch);
  CHECK_THROWS_AS(data.add(vec({0.0, 0.0}), vec({0.0, 1.0})), DimMismatch);
  CHECK(data.size() == 1);
}

TEST_CASE("info_gain follows the log-variance formula") {
  // One unit-variance query against unit noise: 1/2 * ln(2).
  std::vector<Eigen::VectorXd> trace{vec({1.0})};
  CHECK(info_gain(trace, 1.0) == doctest::Approx(0.34657359027997264).epsilon(1e-15));

  trace.push_back(vec({0.0}));     // an exactly-known point adds nothing
  trace.push_back(vec({3.0, 1.0}));  // multi-component queries sum per component
  const double expect =
      0.5 * std::log(2.0) + 0.0 + 0.5 * std::log(4.0) + 0.5 * std::log(2.0);
  CHECK(info_gain(trace, 1.0) == doctest::Approx(expect).epsilon(1e-14));

  const auto curve = info_gain_curve(trace, 1.0);
  REQUIRE(curve.size() == 3);
  CHECK(curve[0] == doctest::Approx(0.5 * std::log(2.0)));
  CHECK(curve[1] == doctest::Approx(curve[0]));  // flat where variance is zero
  CHECK(curve[2] == doctest::Approx(expect));
  for (size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] >= curve[i - 1]);

  CHECK_THROWS_AS(info_gain(trace, 0.0), Error);
}

TEST_CASE("fits are deterministic") {
  Rng rng(99);
  GpDataset data = random_dataset(10, 2, 1, 0.01, rng);
  GpPosterior a(Kernel{}, data), b(Kernel{}, data);
  const Eigen::VectorXd s = vec({0.123, -0.456});
  CHECK(a.mean(s)(0) == b.mean(s)(0));  // bitwise
  CHECK(a.var(s)(0) == b.var(s)(0));
}
