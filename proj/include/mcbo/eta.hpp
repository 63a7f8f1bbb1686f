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

#include <Eigen/Dense>

#include "mcbo/rng.hpp"

namespace mcbo {

// Parametric selector for one node: maps the node's (normalized) model input
// to a point of [-1, 1]^d, selecting where inside the confidence band the
// plausible mechanism sits.  Two families:
//
//   Constant     - input-independent value, clamped to [-1, 1]^d.  Sufficient
//                  on noiseless systems, where the optimal selector need not
//                  react to upstream values.
//   TwoLayerNet  - out = 2 * sigmoid(W2 relu(W1 u + b1) + b2) - 1.  Used on
//                  noisy systems where the selector must respond to the
//                  realized noise entering through u.
struct EtaParam {
  enum class Kind { Constant, TwoLayerNet };
  Kind kind = Kind::Constant;

  Eigen::VectorXd value;  // Constant: size d

  Eigen::MatrixXd w1;  // hidden x in
  Eigen::VectorXd b1;  // hidden
  Eigen::MatrixXd w2;  // d x hidden
  Eigen::VectorXd b2;  // d

  static EtaParam constant(Eigen::VectorXd v);
  // Random network: He-scaled Gaussian weights, zero biases.
  static EtaParam net(int in_dim, int out_dim, int hidden, Rng& rng);

  int output_dim() const;
  int num_params() const;
  Eigen::VectorXd params() const;            // flattened view (see eta.cpp for layout)
  void set_params(const Eigen::VectorXd& p);
};

// Selector output at (normalized) input u; always inside [-1, 1]^d.
Eigen::VectorXd eta_eval(const EtaParam& eta, const Eigen::VectorXd& u);

// Jacobian w.r.t. the flattened parameters, one row per output component.
Eigen::MatrixXd eta_grad_params(const EtaParam& eta, const Eigen::VectorXd& u);

// Jacobian w.r.t. the input u, one row per output component.
Eigen::MatrixXd eta_grad_input(const EtaParam& eta, const Eigen::VectorXd& u);

}  // namespace mcbo
