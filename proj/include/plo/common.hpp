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

#ifndef PLO_COMMON_HPP
#define PLO_COMMON_HPP

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace plo {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

/// Flat policy weights. Layout is documented in policy.hpp.
using ParamVector = Eigen::VectorXd;

/// Invalid configuration value or dimension mismatch.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A rollout produced a non-finite state.
class DivergedRollout : public std::runtime_error {
public:
  DivergedRollout(int step, const std::string &what)
      : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

private:
  int step_;
};

/// Malformed or mismatched checkpoint file.
class CheckpointError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// File system failure; the message carries the path.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Formats a double with 17 significant digits so it reloads bit-exactly.
std::string format_double(double v);

} // namespace plo

#endif // PLO_COMMON_HPP
