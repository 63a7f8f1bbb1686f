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

#include "mcbo/eta.hpp"

#include <cmath>

#include "mcbo/errors.hpp"

namespace mcbo {

// Parameter layout for TwoLayerNet: [vec(w1) row-major, b1, vec(w2) row-major, b2].
// Constant: [value].

EtaParam EtaParam::constant(Eigen::VectorXd v) {
  EtaParam e;
  e.kind = Kind::Constant;
  e.value = std::move(v);
  return e;
}

EtaParam EtaParam::net(int in_dim, int out_dim, int hidden, Rng& rng) {
  EtaParam e;
  e.kind = Kind::TwoLayerNet;
  e.w1.resize(hidden, in_dim);
  e.b1 = Eigen::VectorXd::Zero(hidden);
  e.w2.resize(out_dim, hidden);
  e.b2 = Eigen::VectorXd::Zero(out_dim);
  const double s1 = std::sqrt(2.0 / std::max(in_dim, 1));
  const double s2 = std::sqrt(2.0 / std::max(hidden, 1));
  for (int i = 0; i < hidden; ++i)
    for (int j = 0; j < in_dim; ++j) e.w1(i, j) = rng.normal(0.0, s1);
  for (int i = 0; i < out_dim; ++i)
    for (int j = 0; j < hidden; ++j) e.w2(i, j) = rng.normal(0.0, s2);
  return e;
}

int EtaParam::output_dim() const {
  return kind == Kind::Constant ? static_cast<int>(value.size())
                                : static_cast<int>(w2.rows());
}

int EtaParam::num_params() const {
  if (kind == Kind::Constant) return static_cast<int>(value.size());
  return static_cast<int>(w1.size() + b1.size() + w2.size() + b2.size());
}

Eigen::VectorXd EtaParam::params() const {
  if (kind == Kind::Constant) return value;
  Eigen::VectorXd p(num_params());
  int at = 0;
  for (int i = 0; i < w1.rows(); ++i)
    for (int j = 0; j < w1.cols(); ++j) p(at++) = w1(i, j);
  for (int i = 0; i < b1.size(); ++i) p(at++) = b1(i);
  for (int i = 0; i < w2.rows(); ++i)
    for (int j = 0; j < w2.cols(); ++j) p(at++) = w2(i, j);
  for (int i = 0; i < b2.size(); ++i) p(at++) = b2(i);
  return p;
}

void EtaParam::set_params(const Eigen::VectorXd& p) {
  if (p.size() != num_params()) throw DimMismatch("eta parameter vector size mismatch");
  if (kind == Kind::Constant) {
    value = p;
    return;
  }
  int at = 0;
  for (int i = 0; i < w1.rows(); ++i)
    for (int j = 0; j < w1.cols(); ++j) w1(i, j) = p(at++);
  for (int i = 0; i < b1.size(); ++i) b1(i) = p(at++);
  for (int i = 0; i < w2.rows(); ++i)
    for (int j = 0; j < w2.cols(); ++j) w2(i, j) = p(at++);
  for (int i = 0; i < b2.size(); ++i) b2(i) = p(at++);
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct NetForward {
  Eigen::VectorXd pre_hidden, hidden, pre_out, out;
};

NetForward net_forward(const EtaParam& e, const Eigen::VectorXd& u) {
  NetForward f;
  f.pre_hidden = e.w1 * u + e.b1;
  f.hidden = f.pre_hidden.cwiseMax(0.0);  // relu
  f.pre_out = e.w2 * f.hidden + e.b2;
  f.out.resize(f.pre_out.size());
  for (int i = 0; i < f.pre_out.size(); ++i) f.out(i) = 2.0 * sigmoid(f.pre_out(i)) - 1.0;
  return f;
}

}  // namespace

Eigen::VectorXd eta_eval(const EtaParam& eta, const Eigen::VectorXd& u) {
  if (eta.kind == EtaParam::Kind::Constant)
    return eta.value.cwiseMax(-1.0).cwiseMin(1.0);
  if (u.size() != eta.w1.cols()) throw DimMismatch("eta input dim mismatch");
  return net_forward(eta, u).out;
}

Eigen::MatrixXd eta_grad_params(const EtaParam& eta, const Eigen::VectorXd& u) {
  const int d = eta.output_dim();
  if (eta.kind == EtaParam::Kind::Constant) {
    // The clamp is handled by projection during optimization, so the
    // parameter Jacobian is the identity.
    return Eigen::MatrixXd::Identity(d, d);
  }
  if (u.size() != eta.w1.cols()) throw DimMismatch("eta input dim mismatch");
  const NetForward f = net_forward(eta, u);
  const int h = static_cast<int>(eta.b1.size());
  const int in = static_cast<int>(eta.w1.cols());
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(d, eta.num_params());

  Eigen::VectorXd dout(d);  // d out_k / d pre_out_k = 2 s (1 - s)
  for (int k = 0; k < d; ++k) {
    const double s = sigmoid(f.pre_out(k));
    dout(k) = 2.0 * s * (1.0 - s);
  }
  Eigen::VectorXd relu_mask(h);
  for (int j = 0; j < h; ++j) relu_mask(j) = f.pre_hidden(j) > 0.0 ? 1.0 : 0.0;

  const int off_w1 = 0, off_b1 = h * in, off_w2 = off_b1 + h, off_b2 = off_w2 + d * h;
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < h; ++j) {
      const double back = dout(k) * eta.w2(k, j) * relu_mask(j);
      for (int i = 0; i < in; ++i) jac(k, off_w1 + j * in + i) = back * u(i);
      jac(k, off_b1 + j) = back;
      jac(k, off_w2 + k * h + j) = dout(k) * f.hidden(j);
    }
    jac(k, off_b2 + k) = dout(k);
  }
  return jac;
}

Eigen::MatrixXd eta_grad_input(const EtaParam& eta, const Eigen::VectorXd& u) {
  if (eta.kind == EtaParam::Kind::Constant)
    return Eigen::MatrixXd::Zero(eta.output_dim(), u.size());
  if (u.size() != eta.w1.cols()) throw DimMismatch("eta input dim mismatch");
  const NetForward f = net_forward(eta, u);
  const int d = eta.output_dim();
  const int h = static_cast<int>(eta.b1.size());
  Eigen::MatrixXd jac(d, u.size());
  for (int k = 0; k < d; ++k) {
    const double s = sigmoid(f.pre_out(k));
    const double dout = 2.0 * s * (1.0 - s);
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(u.size());
    for (int j = 0; j < h; ++j)
      if (f.pre_hidden(j) > 0.0) row += eta.w2(k, j) * eta.w1.row(j);
    jac.row(k) = dout * row;
  }
  return jac;
}

}  // namespace mcbo
