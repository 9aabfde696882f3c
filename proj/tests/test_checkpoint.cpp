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
#include "test_util.hpp"

#include <doctest.h>

#include <cstring>
#include <limits>

using namespace plo;
using plo::test::TempDir;
using plo::test::read_file;
using plo::test::write_file;

namespace {

Checkpoint sample_checkpoint() {
  Checkpoint ckpt;
  ckpt.spec.input_dim = 4;
  ckpt.spec.hidden_width = 16;
  ckpt.spec.init_seed = 0x0102030405060708ULL;
  ckpt.iteration = 200;
  ckpt.theta = init_params(ckpt.spec);
  ckpt.theta(0) = -0.0;
  ckpt.theta(1) = std::numeric_limits<double>::denorm_min();
  ckpt.theta(2) = 1.0 / 3.0;
  return ckpt;
}

std::uint64_t le64(const std::string &bytes, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i)
    v = (v << 8) | static_cast<unsigned char>(bytes[at + i]);
  return v;
}

} // namespace

TEST_SUITE("checkpoint") {

TEST_CASE("round trip is bit exact") {
  TempDir dir("ckpt_roundtrip");
  const Checkpoint ckpt = sample_checkpoint();
  save_checkpoint(dir.path() / "a.plo", ckpt);
  const Checkpoint back = load_checkpoint(dir.path() / "a.plo");
  CHECK(back.spec == ckpt.spec);
  CHECK(back.iteration == 200);
  REQUIRE(back.theta.size() == ckpt.theta.size());
  CHECK(std::memcmp(back.theta.data(), ckpt.theta.data(), 8 * ckpt.theta.size()) == 0);
  CHECK(std::signbit(back.theta(0)));
  save_checkpoint(dir.path() / "b.plo", back);
  CHECK(read_file(dir.path() / "a.plo") == read_file(dir.path() / "b.plo"));
}

TEST_CASE("header layout") {
  TempDir dir("ckpt_header");
  const Checkpoint ckpt = sample_checkpoint();
  save_checkpoint(dir.path() / "a.plo", ckpt);
  const std::string bytes = read_file(dir.path() / "a.plo");
  REQUIRE(bytes.size() == 56 + 8 * std::size_t(ckpt.theta.size()));
  CHECK(bytes.substr(0, 8) == std::string("PLOCKPT\0", 8));
  CHECK(bytes[8] == 1);
  CHECK(bytes[12] == 4);
  CHECK(bytes[16] == 16);
  CHECK(bytes[20] == 2);
  CHECK(bytes[24] == 1);
  CHECK(bytes[28] == 0);
  CHECK(le64(bytes, 32) == 0x0102030405060708ULL);
  CHECK(bytes[32] == 0x08);
  CHECK(le64(bytes, 40) == 200);
  CHECK(le64(bytes, 48) == std::uint64_t(ckpt.theta.size()));
  CHECK(le64(bytes, 56 + 16) == 0x3FD5555555555555ULL);
}

TEST_CASE("corrupt files are checkpoint errors") {
  TempDir dir("ckpt_corrupt");
  const Checkpoint ckpt = sample_checkpoint();
  save_checkpoint(dir.path() / "good.plo", ckpt);
  const std::string good = read_file(dir.path() / "good.plo");
  auto expect_error = [&](const std::string &bytes) {
    write_file(dir.path() / "bad.plo", bytes);
    CHECK_THROWS_AS(load_checkpoint(dir.path() / "bad.plo"), CheckpointError);
  };
  std::string bad = good;
  bad[0] = 'X';
  expect_error(bad);
  bad = good;
  bad[8] = 2;
  expect_error(bad);
  expect_error(good.substr(0, 30));
  expect_error(good.substr(0, good.size() - 8));
  expect_error(good + "extra");
  expect_error("");
  bad = good;
  bad[16] = 0; // width 0
  expect_error(bad);
  bad = good;
  bad[16] = 17; // declared count no longer matches
  expect_error(bad);
  bad = good;
  bad[28] = 5;
  expect_error(bad);
}

TEST_CASE("missing files are I/O errors naming the path") {
  try {
    load_checkpoint("/nonexistent/dir/ckpt.plo");
    FAIL("expected IoError");
  } catch (const IoError &e) {
    CHECK(std::string(e.what()).find("/nonexistent/dir/ckpt.plo") != std::string::npos);
  }
}

TEST_CASE("saving a mismatched parameter vector fails") {
  TempDir dir("ckpt_mismatch");
  Checkpoint ckpt = sample_checkpoint();
  ckpt.theta.conservativeResize(10);
  CHECK_THROWS_AS(save_checkpoint(dir.path() / "x.plo", ckpt), CheckpointError);
}

}
