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

#include "plo/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace plo {

namespace {

constexpr std::array<char, 8> kMagic = {'P', 'L', 'O', 'C', 'K', 'P', 'T', '\0'};
constexpr std::size_t kHeaderSize = 56;

template <typename T>
void put_le(std::vector<unsigned char> &buf, T value) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i)
    buf.push_back(static_cast<unsigned char>(value >> (8 * i)));
}

template <typename T>
T get_le(const unsigned char *p) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    value |= static_cast<T>(p[i]) << (8 * i);
  return value;
}

} // namespace

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt) {
  ckpt.spec.validate();
  if (ckpt.theta.size() != ckpt.spec.param_count())
    throw CheckpointError("checkpoint parameters do not match the policy spec");
  std::vector<unsigned char> buf(kMagic.begin(), kMagic.end());
  put_le<std::uint32_t>(buf, kCheckpointVersion);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(ckpt.spec.input_dim));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(ckpt.spec.hidden_width));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(ckpt.spec.hidden_layers));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(ckpt.spec.output_dim));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(ckpt.spec.activation));
  put_le<std::uint64_t>(buf, ckpt.spec.init_seed);
  put_le<std::uint64_t>(buf, ckpt.iteration);
  put_le<std::uint64_t>(buf, static_cast<std::uint64_t>(ckpt.theta.size()));
  for (Eigen::Index i = 0; i < ckpt.theta.size(); ++i)
    put_le<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(ckpt.theta(i)));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open checkpoint for writing: " + path.string());
  out.write(reinterpret_cast<const char *>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out)
    throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open checkpoint: " + path.string());
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                      std::istreambuf_iterator<char>());
  const std::string where = " in " + path.string();
  if (buf.size() < kHeaderSize || std::memcmp(buf.data(), kMagic.data(), 8) != 0)
    throw CheckpointError("bad checkpoint header" + where);
  const unsigned char *p = buf.data();
  if (get_le<std::uint32_t>(p + 8) != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version" + where);

  Checkpoint ckpt;
  ckpt.spec.input_dim = static_cast<int>(get_le<std::uint32_t>(p + 12));
  ckpt.spec.hidden_width = static_cast<int>(get_le<std::uint32_t>(p + 16));
  ckpt.spec.hidden_layers = static_cast<int>(get_le<std::uint32_t>(p + 20));
  ckpt.spec.output_dim = static_cast<int>(get_le<std::uint32_t>(p + 24));
  ckpt.spec.activation = static_cast<Activation>(get_le<std::uint32_t>(p + 28));
  ckpt.spec.init_seed = get_le<std::uint64_t>(p + 32);
  ckpt.iteration = get_le<std::uint64_t>(p + 40);
  const std::uint64_t count = get_le<std::uint64_t>(p + 48);
  try {
    ckpt.spec.validate();
  } catch (const ConfigError &e) {
    throw CheckpointError(std::string("invalid policy spec") + where + ": " + e.what());
  }
  if (count != static_cast<std::uint64_t>(ckpt.spec.param_count()) ||
      buf.size() != kHeaderSize + 8 * count)
    throw CheckpointError("checkpoint size does not match its policy spec" + where);

  ckpt.theta.resize(static_cast<Eigen::Index>(count));
  for (std::uint64_t i = 0; i < count; ++i)
    ckpt.theta(static_cast<Eigen::Index>(i)) =
        std::bit_cast<double>(get_le<std::uint64_t>(p + kHeaderSize + 8 * i));
  return ckpt;
}

} // namespace plo
