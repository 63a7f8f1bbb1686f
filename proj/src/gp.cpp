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

#include "mcbo/gp.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

namespace mcbo {

namespace {

std::atomic<std::int64_t> g_negative_variance_count{0};

void check_kernel(const Kernel& k) {
  if (!(k.variance > 0.0) || k.variance > 1.0)
    throw Error("kernel variance must be in (0, 1], got " + std::to_string(k.variance));
  if (k.kind == Kernel::Kind::Rbf && !(k.lengthscale > 0.0))
    throw Error("rbf lengthscale must be positive");
}

}  // namespace

double kernel_eval(const Kernel& k, const Eigen::VectorXd& s1, const Eigen::VectorXd& s2) {
  if (s1.size() != s2.size()) throw DimMismatch("kernel inputs differ in dimension");
  switch (k.kind) {
    case Kernel::Kind::Rbf: {
      const double d2 = (s1 - s2).squaredNorm();
      return k.variance * std::exp(-0.5 * d2 / (k.lengthscale * k.lengthscale));
    }
    case Kernel::Kind::Linear:
      return k.variance * s1.dot(s2);
  }
  return 0.0;  // unreachable
}

double kernel_eval(const Kernel& k, const Eigen::VectorXd& s1, int l1,
                   const Eigen::VectorXd& s2, int l2) {
  if (l1 != l2) return 0.0;  // independent output coupling
  return kernel_eval(k, s1, s2);
}

Eigen::VectorXd kernel_grad_s1(const Kernel& k, const Eigen::VectorXd& s,
                               const Eigen::VectorXd& s2) {
  switch (k.kind) {
    case Kernel::Kind::Rbf: {
      const double kv = kernel_eval(k, s, s2);
      return kv / (k.lengthscale * k.lengthscale) * (s2 - s);
    }
    case Kernel::Kind::Linear:
      return k.variance * s2;
  }
  return Eigen::VectorXd::Zero(s.size());
}

Eigen::VectorXd kernel_grad_self(const Kernel& k, const Eigen::VectorXd& s) {
  if (k.kind == Kernel::Kind::Linear) return 2.0 * k.variance * s;
  return Eigen::VectorXd::Zero(s.size());
}

void GpDataset::add(const Eigen::VectorXd& s, const Eigen::VectorXd& x) {
  if (!inputs.empty() && s.size() != inputs[0].size())
    throw DimMismatch("dataset input dim " + std::to_string(inputs[0].size()) +
                      " vs new row " + std::to_string(s.size()));
  if (!outputs.empty() && x.size() != outputs[0].size())
    throw DimMismatch("dataset output dim " + std::to_string(outputs[0].size()) +
                      " vs new row " + std::to_string(x.size()));
  if (inputs.empty()) {
    if (in_dim_hint >= 0 && s.size() != in_dim_hint)
      throw DimMismatch("dataset input dim hint mismatch");
    if (x.size() != out_dim_hint && out_dim_hint > 0 && !outputs.empty())
      throw DimMismatch("dataset output dim hint mismatch");
  }
  inputs.push_back(s);
  outputs.push_back(x);
}

GpPosterior::GpPosterior(Kernel kernel, GpDataset data)
    : kernel_(kernel), data_(std::move(data)) {
  check_kernel(kernel_);
  if (data_.inputs.size() != data_.outputs.size())
    throw LengthMismatch("dataset has " + std::to_string(data_.inputs.size()) +
                         " inputs but " + std::to_string(data_.outputs.size()) + " outputs");
  if (!(data_.noise_var >= 0.0)) throw Error("noise_var must be >= 0");

  const int t = data_.size();
  const int d = data_.output_dim();
  effective_noise_var_ = data_.noise_var;
  if (t == 0) return;  // prior only

  const int n = t * d;  // vectorized index: row (i, l) -> i * d + l
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j <= i; ++j) {
      const double kv = kernel_eval(kernel_, data_.inputs[i], data_.inputs[j]);
      for (int l = 0; l < d; ++l) {
        gram(i * d + l, j * d + l) = kv;
        gram(j * d + l, i * d + l) = kv;
      }
    }

  Eigen::VectorXd y(n);
  for (int i = 0; i < t; ++i)
    for (int l = 0; l < d; ++l) y(i * d + l) = data_.outputs[i](l);

  // Factorize with jitter escalation.
  const double jitters[] = {0.0, 1e-6, 1e-5, 1e-4};
  bool ok = false;
  for (double jitter : jitters) {
    // A noiseless set always needs at least the first jitter rung: duplicate
    // or near-duplicate inputs make the raw Gram matrix singular.
    if (jitter == 0.0 && data_.noise_var < 1e-12) continue;
    Eigen::MatrixXd sys = gram;
    sys.diagonal().array() += data_.noise_var + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(sys);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      effective_noise_var_ = data_.noise_var + jitter;
      ok = true;
      break;
    }
  }
  if (!ok)
    throw NotPositiveDefinite("gram matrix not positive definite after jitter escalation (" +
                              std::to_string(n) + " rows)");

  // alpha = (K + rho^2 I)^{-1} y via the stored factor.
  alpha_ = chol_.triangularView<Eigen::Lower>().solve(y);
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
}

void GpPosterior::check_query(const Eigen::VectorXd& s) const {
  const int expect = input_dim();
  if (expect >= 0 && s.size() != expect)
    throw DimMismatch("query dim " + std::to_string(s.size()) + " vs model dim " +
                      std::to_string(expect));
}

Eigen::MatrixXd GpPosterior::query_columns(const Eigen::VectorXd& s) const {
  const int t = data_.size();
  const int d = output_dim();
  Eigen::MatrixXd kq = Eigen::MatrixXd::Zero(t * d, d);
  for (int i = 0; i < t; ++i) {
    const double kv = kernel_eval(kernel_, data_.inputs[i], s);
    for (int l = 0; l < d; ++l) kq(i * d + l, l) = kv;
  }
  return kq;
}

Eigen::VectorXd GpPosterior::mean(const Eigen::VectorXd& s) const {
  check_query(s);
  const int d = output_dim();
  if (data_.size() == 0) return Eigen::VectorXd::Zero(d);
  return query_columns(s).transpose() * alpha_;
}

Eigen::VectorXd GpPosterior::var(const Eigen::VectorXd& s) const {
  check_query(s);
  const int d = output_dim();
  const double k_self = kernel_eval(kernel_, s, s);
  if (data_.size() == 0) return Eigen::VectorXd::Constant(d, k_self);

  Eigen::MatrixXd kq = query_columns(s);
  Eigen::MatrixXd v = chol_.triangularView<Eigen::Lower>().solve(kq);
  Eigen::VectorXd out(d);
  for (int l = 0; l < d; ++l) {
    double raw = k_self - v.col(l).squaredNorm();
    if (raw < -1e-9) g_negative_variance_count.fetch_add(1, std::memory_order_relaxed);
    out(l) = raw < 0.0 ? 0.0 : raw;
  }
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> GpPosterior::bounds(const Eigen::VectorXd& s,
                                                                double beta) const {
  Eigen::VectorXd mu = mean(s);
  Eigen::VectorXd sigma = var(s).cwiseSqrt();
  return {mu - beta * sigma, mu + beta * sigma};
}

GpPosterior::QueryGrad GpPosterior::query_grad(const Eigen::VectorXd& s) const {
  check_query(s);
  const int t = data_.size();
  const int d = output_dim();
  const int in = static_cast<int>(s.size());

  QueryGrad out;
  out.mu = Eigen::VectorXd::Zero(d);
  out.sigma = Eigen::VectorXd::Zero(d);
  out.dmu = Eigen::MatrixXd::Zero(d, in);
  out.dsigma = Eigen::MatrixXd::Zero(d, in);

  const double k_self = kernel_eval(kernel_, s, s);
  const Eigen::VectorXd dk_self = kernel_grad_self(kernel_, s);

  if (t == 0) {
    const double var0 = k_self < 0.0 ? 0.0 : k_self;
    for (int l = 0; l < d; ++l) {
      out.sigma(l) = std::sqrt(var0);
      if (out.sigma(l) > 1e-9) out.dsigma.row(l) = dk_self.transpose() / (2.0 * out.sigma(l));
    }
    return out;
  }

  Eigen::MatrixXd kq = query_columns(s);
  // w = (K + rho^2 I)^{-1} kq, needed for both the variance and its gradient.
  Eigen::MatrixXd w = chol_.triangularView<Eigen::Lower>().solve(kq);
  Eigen::MatrixXd half = w;  // L^{-1} kq, for the variance quadratic form
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(w);

  out.mu = kq.transpose() * alpha_;

  // Per-row kernel gradients d k(s_i, s)/d s enter mean and variance alike.
  // Accumulate per output component using the vectorized index layout.
  Eigen::MatrixXd dk(t, in);
  for (int i = 0; i < t; ++i)
    dk.row(i) = kernel_grad_s1(kernel_, s, data_.inputs[i]).transpose();

  for (int l = 0; l < d; ++l) {
    double raw = k_self - half.col(l).squaredNorm();
    if (raw < -1e-9) g_negative_variance_count.fetch_add(1, std::memory_order_relaxed);
    const double var_l = raw < 0.0 ? 0.0 : raw;
    out.sigma(l) = std::sqrt(var_l);

    Eigen::VectorXd dmu_l = Eigen::VectorXd::Zero(in);
    Eigen::VectorXd dvar_l = dk_self;
    for (int i = 0; i < t; ++i) {
      const int row = i * d + l;
      dmu_l += alpha_(row) * dk.row(i).transpose();
      dvar_l -= 2.0 * w(row, l) * dk.row(i).transpose();
    }
    out.dmu.row(l) = dmu_l.transpose();
    if (out.sigma(l) > 1e-9) out.dsigma.row(l) = dvar_l.transpose() / (2.0 * out.sigma(l));
  }
  return out;
}

nlohmann::json GpPosterior::to_debug_json() const {
  nlohmann::json j;
  j["kernel"] = {{"kind", kernel_.kind == Kernel::Kind::Rbf ? "rbf" : "linear"},
                 {"lengthscale", kernel_.lengthscale},
                 {"variance", kernel_.variance}};
  j["num_points"] = num_points();
  j["input_dim"] = input_dim();
  j["output_dim"] = output_dim();
  j["noise_var"] = data_.noise_var;
  j["effective_noise_var"] = effective_noise_var_;
  return j;
}

GpPosterior fit(const Kernel& kernel, GpDataset data) {
  return GpPosterior(kernel, std::move(data));
}

double info_gain(const std::vector<Eigen::VectorXd>& var_trace, double noise_var) {
  if (!(noise_var > 0.0)) throw Error("info_gain requires noise_var > 0");
  double total = 0.0;
  for (const auto& v : var_trace)
    for (int l = 0; l < v.size(); ++l) total += 0.5 * std::log1p(v(l) / noise_var);
  return total;
}

std::vector<double> info_gain_curve(const std::vector<Eigen::VectorXd>& var_trace,
                                    double noise_var) {
  if (!(noise_var > 0.0)) throw Error("info_gain requires noise_var > 0");
  std::vector<double> curve;
  curve.reserve(var_trace.size());
  double total = 0.0;
  for (const auto& v : var_trace) {
    for (int l = 0; l < v.size(); ++l) total += 0.5 * std::log1p(v(l) / noise_var);
    curve.push_back(total);
  }
  return curve;
}

std::int64_t gp_negative_variance_count() {
  return g_negative_variance_count.load(std::memory_order_relaxed);
}

void gp_reset_negative_variance_count() {
  g_negative_variance_count.store(0, std::memory_order_relaxed);
}

}  // namespace mcbo
