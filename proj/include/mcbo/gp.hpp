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

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "mcbo/errors.hpp"

namespace mcbo {

// Base kernel over inputs s = [z; a].  Variance is capped at 1 so that
// beta * sigma confidence bounds stay on the scale the algorithms assume.
struct Kernel {
  enum class Kind { Rbf, Linear };
  Kind kind = Kind::Rbf;
  double lengthscale = 1.0;  // Rbf only
  double variance = 1.0;     // must be in (0, 1]
};

// Base kernel value k(s1, s2).
double kernel_eval(const Kernel& k, const Eigen::VectorXd& s1, const Eigen::VectorXd& s2);

// Vector-valued kernel with independent output coupling:
//   k((s1,l1), (s2,l2)) = [l1 == l2] * k(s1, s2).
double kernel_eval(const Kernel& k, const Eigen::VectorXd& s1, int l1,
                   const Eigen::VectorXd& s2, int l2);

// d k(s, s2) / d s  (gradient in the first argument).
Eigen::VectorXd kernel_grad_s1(const Kernel& k, const Eigen::VectorXd& s,
                               const Eigen::VectorXd& s2);

// d k(s, s) / d s  (zero for Rbf, 2 * variance * s for Linear).
Eigen::VectorXd kernel_grad_self(const Kernel& k, const Eigen::VectorXd& s);

// Training set for one node model: rows (s_t, x_t) with s_t = [z_t; a_t] and
// x_t the observed node value (dimension d).  noise_var is the homoscedastic
// observation noise variance rho^2 shared across output components.
struct GpDataset {
  std::vector<Eigen::VectorXd> inputs;
  std::vector<Eigen::VectorXd> outputs;
  double noise_var = 1e-6;

  // Dimension hints used when the set is empty (prior-only posterior).
  int in_dim_hint = -1;
  int out_dim_hint = 1;

  int size() const { return static_cast<int>(inputs.size()); }
  int input_dim() const { return inputs.empty() ? in_dim_hint : static_cast<int>(inputs[0].size()); }
  int output_dim() const { return outputs.empty() ? out_dim_hint : static_cast<int>(outputs[0].size()); }

  // Appends a row; throws DimMismatch on inconsistent shapes.
  void add(const Eigen::VectorXd& s, const Eigen::VectorXd& x);
};

// Immutable posterior snapshot for one node model.
//
// The d-dimensional output is handled by augmenting inputs with an output
// index and stacking observations in the vectorized order
// (t=1,l=1), (t=1,l=2), ..., (t=1,l=d), (t=2,l=1), ...  The Gram matrix over
// that index set (plus rho^2 I) is factorized once (Cholesky); predictions
// are two triangular solves per query.
//
// If the factorization fails, jitter is added to the diagonal, escalating
// 1e-6 -> 1e-5 -> 1e-4; beyond that NotPositiveDefinite is thrown.  Predicted
// variances are floored at zero; values below -1e-9 before flooring increment
// a global counter (see gp_negative_variance_count) since they indicate a
// conditioning problem rather than round-off.
class GpPosterior {
 public:
  GpPosterior(Kernel kernel, GpDataset data);

  int input_dim() const { return data_.input_dim(); }
  int output_dim() const { return data_.output_dim(); }
  int num_points() const { return data_.size(); }
  const Kernel& kernel() const { return kernel_; }
  const GpDataset& data() const { return data_; }

  // Observation noise variance actually used in the factorization
  // (rho^2 plus any jitter that the escalation added).
  double effective_noise_var() const { return effective_noise_var_; }

  // Lower Cholesky factor of (K + effective_noise_var * I), size (t*d)^2.
  const Eigen::MatrixXd& chol() const { return chol_; }

  // Posterior mean / variance per output component at s (prior: 0 / k(s,s)).
  Eigen::VectorXd mean(const Eigen::VectorXd& s) const;
  Eigen::VectorXd var(const Eigen::VectorXd& s) const;

  // (mean - beta * sigma, mean + beta * sigma).
  std::pair<Eigen::VectorXd, Eigen::VectorXd> bounds(const Eigen::VectorXd& s,
                                                     double beta) const;

  // Mean, standard deviation and their input gradients in one pass.
  // dmu / dsigma have one row per output component, one column per input dim.
  // Where sigma is (numerically) zero the corresponding dsigma row is zero.
  struct QueryGrad {
    Eigen::VectorXd mu, sigma;
    Eigen::MatrixXd dmu, dsigma;
  };
  QueryGrad query_grad(const Eigen::VectorXd& s) const;

  nlohmann::json to_debug_json() const;

 private:
  void check_query(const Eigen::VectorXd& s) const;
  // Cross-covariance columns between training rows and query (s, l), all l.
  Eigen::MatrixXd query_columns(const Eigen::VectorXd& s) const;

  Kernel kernel_;
  GpDataset data_;
  double effective_noise_var_ = 0.0;
  Eigen::MatrixXd chol_;    // lower factor L
  Eigen::VectorXd alpha_;   // (K + rho^2 I)^{-1} vec(x)
};

// Convenience: fit a posterior (validates kernel and shapes).
GpPosterior fit(const Kernel& kernel, GpDataset data);

// Information gained about one node model by a sequence of queries, from the
// predictive variances realized at the chosen points:
//   1/2 * sum_t sum_l ln(1 + var_{t,l} / noise_var).
double info_gain(const std::vector<Eigen::VectorXd>& var_trace, double noise_var);

// Cumulative version: entry t is the info gain of the first t+1 queries.
std::vector<double> info_gain_curve(const std::vector<Eigen::VectorXd>& var_trace,
                                    double noise_var);

// Diagnostics for the variance floor (see GpPosterior).  Process-wide.
std::int64_t gp_negative_variance_count();
void gp_reset_negative_variance_count();

}  // namespace mcbo
