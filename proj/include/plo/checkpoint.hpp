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

#ifndef PLO_CHECKPOINT_HPP
#define PLO_CHECKPOINT_HPP

#include "plo/common.hpp"
#include "plo/policy.hpp"

#include <cstdint>
#include <filesystem>

namespace plo {

/**
 * Policy checkpoint file, version 1. All integers and floats little-endian.
 *
 *   offset  size  field
 *        0     8  magic "PLOCKPT\0"
 *        8     4  u32 format version (1)
 *       12     4  u32 input_dim
 *       16     4  u32 hidden_width
 *       20     4  u32 hidden_layers
 *       24     4  u32 output_dim
 *       28     4  u32 activation (0 = tanh)
 *       32     8  u64 init_seed
 *       40     8  u64 training iteration
 *       48     8  u64 parameter count P
 *       56   8*P  f64 parameters in ParamVector order
 */
struct Checkpoint {
  PolicySpec spec;
  std::uint64_t iteration = 0;
  ParamVector theta;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt);

/// Throws CheckpointError on a bad magic, version, size or spec mismatch with
/// the declared parameter count; IoError if the file cannot be read.
Checkpoint load_checkpoint(const std::filesystem::path &path);

} // namespace plo

#endif // PLO_CHECKPOINT_HPP
