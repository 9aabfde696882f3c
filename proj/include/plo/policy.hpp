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

#ifndef PLO_POLICY_HPP
#define PLO_POLICY_HPP

#include "plo/common.hpp"

#include <cstdint>
#include <vector>

namespace plo {

enum class Activation : std::uint32_t { Tanh = 0 };

/**
 * Deterministic multilayer perceptron u = pi(x; theta).
 *
 * With the default spec (input -> 64 -> 64 -> 1) there are three weight
 * layers and two tanh hidden layers. The output layer is linear; the
 * environment owns action saturation.
 *
 * ParamVector layout, layer by layer from the input side:
 *
 *   [ W_1 (rows = width, cols = fan_in, row-major) | b_1 | W_2 | b_2 | ... ]
 *
 * so entry (r, c) of layer l lives at offset(l) + r * fan_in + c and its bias
 * at offset(l) + rows * fan_in + r.
 */
struct PolicySpec {
  int input_dim = 2;
  int hidden_width = 64;
  int hidden_layers = 2;
  Activation activation = Activation::Tanh;
  int output_dim = 1;
  std::uint64_t init_seed = 0;

  Eigen::Index param_count() const;
  int layer_count() const { return hidden_layers + 1; }
  int fan_in(int layer) const { return layer == 0 ? input_dim : hidden_width; }
  int fan_out(int layer) const {
    return layer == hidden_layers ? output_dim : hidden_width;
  }
  /// Offset of the first weight of layer `layer` inside ParamVector.
  Eigen::Index layer_offset(int layer) const;

  void validate() const;
};

bool operator==(const PolicySpec &a, const PolicySpec &b);

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
ParamVector init_params(const PolicySpec &spec);

double forward(const PolicySpec &spec, const ParamVector &theta,
               const Eigen::Ref<const Vector> &x);

struct PolicyGradient {
  ParamVector d_params;
  Vector d_input;
};

/// Reverse-mode derivatives of forward(theta, x) scaled by `adjoint_u`.
PolicyGradient backward(const PolicySpec &spec, const ParamVector &theta,
                        const Eigen::Ref<const Vector> &x, double adjoint_u);

/// Per-layer activations cached by forward_batch for backward_batch.
struct PolicyTape {
  Matrix input;               // input_dim x B
  std::vector<Matrix> hidden; // post-activation, width x B, one per hidden layer
};

/// Batched forward pass: X is input_dim x B, returns output_dim x B.
Matrix forward_batch(const PolicySpec &spec, const ParamVector &theta,
                     const Eigen::Ref<const Matrix> &X,
                     PolicyTape *tape = nullptr);

/**
 * Batched backward pass through a recorded tape.
 *
 * `d_out` is output_dim x B. Parameter gradients are accumulated (+=) into
 * `d_params`; the input adjoint is written to `d_input` when non-null.
 */
void backward_batch(const PolicySpec &spec, const ParamVector &theta,
                    const PolicyTape &tape, const Eigen::Ref<const Matrix> &d_out,
                    Eigen::Ref<ParamVector> d_params, Matrix *d_input);

} // namespace plo

#endif // PLO_POLICY_HPP
