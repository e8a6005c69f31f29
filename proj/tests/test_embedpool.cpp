// tests/test_embedpool.cpp

// Copyright 2026 The stressprobe Authors.
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "stressprobe/embedpool.hpp"
#include "stressprobe/rng.hpp"

using namespace stressprobe;
using namespace stressprobe::embed;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("stressprobe_embed_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

LayerTensor tensor(const std::string& name, std::size_t rows, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  LayerTensor t{name, RowMatrix(rows, dim)};
  // Values that survive the float32 round trip exactly.
  for (Eigen::Index i = 0; i < t.values.size(); ++i)
    t.values.data()[i] = static_cast<double>(static_cast<float>(rng.normal()));
  return t;
}

std::vector<std::size_t> range(std::size_t a, std::size_t b) {
  std::vector<std::size_t> v;
  for (std::size_t i = a; i <= b; ++i) v.push_back(i);
  return v;
}

}  // namespace

TEST_CASE("frame_span worked examples") {
  FrameTiming t;
  CHECK(frame_span({0.10, 0.20}, t, 100) == range(5, 9));
  // Clipped by the number of frames.
  CHECK(frame_span({0.10, 0.20}, t, 7) == range(5, 6));
  CHECK(frame_span({0.10, 0.20}, t, 0).empty());
  // Too short to cover half a window.
  CHECK(frame_span({0.101, 0.110}, t, 100).empty());
  // Full-window overlap only.
  t.min_overlap_fraction = 1.0;
  CHECK(frame_span({0.10, 0.125}, t, 100) == range(5, 5));
}

TEST_CASE("frame_span agrees with per-frame enumeration") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    FrameTiming t;
    t.window = rng.uniform(0.01, 0.05);
    t.stride = rng.uniform(0.005, t.window);
    t.min_overlap_fraction = rng.uniform(0.05, 1.0);
    const double s = rng.uniform(0.0, 2.0), e = s + rng.uniform(0.001, 0.4);
    const std::size_t n = 1 + rng.below(200);
    CHECK(frame_span({s, e}, t, n) == oracle::frame_span({s, e}, t, n));
  }
}

TEST_CASE("timing validation") {
  FrameTiming t;
  t.stride = 0.03;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = {};
  t.min_overlap_fraction = 0.0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = {};
  CHECK_NOTHROW(t.validate());
}

TEST_CASE("mean pooling") {
  LayerTensor t{"tf5", RowMatrix(4, 2)};
  t.values << 1, 2, 3, 4, 5, 6, 7, 8;
  auto p = pool(t, {1, 2});
  CHECK(p.vector == std::vector<double>{4, 5});
  CHECK(p.n_frames_pooled == 2);
  CHECK(pool(t, {3}).vector == std::vector<double>{7, 8});
  CHECK_THROWS_AS(pool(t, {}), NoFramesError);
  CHECK_THROWS_AS(pool(t, {4}), ContractError);
}

TEST_CASE("pooling ignores index order") {
  auto t = tensor("cnn", 30, 8, 5);
  std::vector<std::size_t> idx{3, 7, 8, 12, 20};
  auto base = pool(t, idx);
  Rng rng(2);
  for (int i = 0; i < 10; ++i) {
    rng.shuffle(idx);
    CHECK(pool(t, idx).vector == base.vector);
  }
}

TEST_CASE("tensor files round trip") {
  auto dir = scratch("roundtrip");
  FrameTiming timing;
  auto a = tensor("cv", 12, 5, 1), b = tensor("tf23", 12, 3, 2);
  write_utterance(dir.string(), "u1", 16000, timing, {a, b});
  auto meta = read_meta(dir.string(), "u1");
  CHECK(meta.layers.size() == 2);
  CHECK(meta.frame_stride_s == timing.stride);
  auto back = read_layer(dir.string(), "u1", "tf23");
  CHECK(back.values == b.values);
  CHECK(read_layer(dir.string(), "u1", "cv").values == a.values);
  CHECK_THROWS_AS(read_layer(dir.string(), "u1", "tf11"), NotFoundError);
  CHECK_THROWS_AS(read_meta(dir.string(), "u2"), NotFoundError);
}

TEST_CASE("truncated payloads are corrupt") {
  auto dir = scratch("corrupt");
  write_utterance(dir.string(), "u1", 16000, {}, {tensor("cv", 10, 4, 3)});
  fs::path f = dir / "u1" / "cv.f32";
  fs::resize_file(f, fs::file_size(f) - 4);
  CHECK_THROWS_AS(read_layer(dir.string(), "u1", "cv"), CorruptTensorError);
}

TEST_CASE("non-finite payloads are corrupt") {
  auto dir = scratch("nan");
  auto t = tensor("cv", 3, 2, 3);
  t.values(1, 1) = std::numeric_limits<double>::quiet_NaN();
  write_utterance(dir.string(), "u1", 16000, {}, {t});
  CHECK_THROWS_AS(read_layer(dir.string(), "u1", "cv"), CorruptTensorError);
}

TEST_CASE("layer names") {
  CHECK(is_layer_name("tf17"));
  CHECK_FALSE(is_layer_name("tf18"));
  CHECK_FALSE(is_layer_name("duration"));
}
