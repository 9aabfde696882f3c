/*
 * Copyright 2026 The PLO Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "plo/policy.hpp"

#include <cmath>
#include <random>
#include <string>

namespace plo {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ConstLayer {
  Eigen::Map<const RowMajor> W;
  Eigen::Map<const Vector> b;
};

struct MutLayer {
  Eigen::Map<RowMajor> W;
  Eigen::Map<Vector> b;
};

ConstLayer layer(const PolicySpec &spec, const double *data, int l) {
  const int rows = spec.fan_out(l), cols = spec.fan_in(l);
  const double *base = data + spec.layer_offset(l);
  return {Eigen::Map<const RowMajor>(base, rows, cols),
          Eigen::Map<const Vector>(base + rows * cols, rows)};
}

MutLayer layer(const PolicySpec &spec, double *data, int l) {
  const int rows = spec.fan_out(l), cols = spec.fan_in(l);
  double *base = data + spec.layer_offset(l);
  return {Eigen::Map<RowMajor>(base, rows, cols),
          Eigen::Map<Vector>(base + rows * cols, rows)};
}

// tanh through the vectorized exp; absolute error stays below 1e-15.
Matrix tanh_activation(const Matrix &z) {
  const Eigen::ArrayXXd t = (2.0 * z.array().cwiseMax(-20.0).cwiseMin(20.0)).exp();
  return ((t - 1.0) / (t + 1.0)).matrix();
}

void check_theta(const PolicySpec &spec, const ParamVector &theta) {
  if (theta.size() != spec.param_count())
    throw ConfigError("parameter vector has " + std::to_string(theta.size()) +
                      " entries, policy spec expects " +
                      std::to_string(spec.param_count()));
}

} // namespace

Eigen::Index PolicySpec::param_count() const {
  return layer_offset(layer_count());
}

Eigen::Index PolicySpec::layer_offset(int l) const {
  Eigen::Index offset = 0;
  for (int i = 0; i < l; ++i)
    offset += Eigen::Index(fan_out(i)) * (fan_in(i) + 1);
  return offset;
}

void PolicySpec::validate() const {
  constexpr int kMaxDim = 1 << 16;
  if (input_dim < 1 || output_dim < 1 || input_dim > kMaxDim || output_dim > kMaxDim)
    throw ConfigError("policy input and output dims must be in [1, 65536]");
  if (hidden_width < 1 || hidden_width > kMaxDim)
    throw ConfigError("policy.hidden_width must be in [1, 65536]");
  if (hidden_layers < 0 || hidden_layers > 64)
    throw ConfigError("policy.hidden_layers must be in [0, 64]");
  if (activation != Activation::Tanh)
    throw ConfigError("only tanh activation is supported");
}

bool operator==(const PolicySpec &a, const PolicySpec &b) {
  return a.input_dim == b.input_dim && a.hidden_width == b.hidden_width &&
         a.hidden_layers == b.hidden_layers && a.activation == b.activation &&
         a.output_dim == b.output_dim && a.init_seed == b.init_seed;
}

ParamVector init_params(const PolicySpec &spec) {
  spec.validate();
  ParamVector theta = ParamVector::Zero(spec.param_count());
  std::mt19937_64 rng(spec.init_seed);
  for (int l = 0; l < spec.layer_count(); ++l) {
    const double bound = 1.0 / std::sqrt(double(spec.fan_in(l)));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto L = layer(spec, theta.data(), l);
    for (Eigen::Index r = 0; r < L.W.rows(); ++r)
      for (Eigen::Index c = 0; c < L.W.cols(); ++c)
        L.W(r, c) = dist(rng);
  }
  return theta;
}

Matrix forward_batch(const PolicySpec &spec, const ParamVector &theta,
                     const Eigen::Ref<const Matrix> &X, PolicyTape *tape) {
  check_theta(spec, theta);
  if (X.rows() != spec.input_dim)
    throw ConfigError("policy input has " + std::to_string(X.rows()) +
                      " rows, spec expects " + std::to_string(spec.input_dim));
  if (tape) {
    tape->input = X;
    tape->hidden.resize(spec.hidden_layers);
  }
  Matrix h = X;
  for (int l = 0; l < spec.hidden_layers; ++l) {
    const auto L = layer(spec, theta.data(), l);
    Matrix z = L.W * h;
    z.colwise() += L.b;
    h = tanh_activation(z);
    if (tape)
      tape->hidden[l] = h;
  }
  const auto out = layer(spec, theta.data(), spec.hidden_layers);
  Matrix y = out.W * h;
  y.colwise() += out.b;
  return y;
}

void backward_batch(const PolicySpec &spec, const ParamVector &theta,
                    const PolicyTape &tape, const Eigen::Ref<const Matrix> &d_out,
                    Eigen::Ref<ParamVector> d_params, Matrix *d_input) {
  check_theta(spec, theta);
  Matrix delta = d_out; // adjoint of the current layer's pre-activation
  for (int l = spec.hidden_layers; l >= 0; --l) {
    const Matrix &in = l == 0 ? tape.input : tape.hidden[l - 1];
    const auto L = layer(spec, theta.data(), l);
    auto G = layer(spec, d_params.data(), l);
    G.W.noalias() += delta * in.transpose();
    G.b += delta.rowwise().sum();
    if (l == 0 && !d_input)
      break;
    Matrix d_in = L.W.transpose() * delta;
    if (l == 0) {
      *d_input = std::move(d_in);
      break;
    }
    delta = d_in.array() * (1.0 - in.array().square());
  }
}

double forward(const PolicySpec &spec, const ParamVector &theta,
               const Eigen::Ref<const Vector> &x) {
  return forward_batch(spec, theta, x)(0, 0);
}

PolicyGradient backward(const PolicySpec &spec, const ParamVector &theta,
                        const Eigen::Ref<const Vector> &x, double adjoint_u) {
  PolicyTape tape;
  forward_batch(spec, theta, x, &tape);
  PolicyGradient g;
  g.d_params = ParamVector::Zero(spec.param_count());
  Matrix d_out = Matrix::Constant(spec.output_dim, 1, adjoint_u);
  Matrix d_in;
  backward_batch(spec, theta, tape, d_out, g.d_params, &d_in);
  g.d_input = d_in.col(0);
  return g;
}

} // namespace plo
