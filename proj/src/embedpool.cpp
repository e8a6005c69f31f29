// src/embedpool.cpp

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

#include "stressprobe/embedpool.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>

#include "json.hpp"

namespace stressprobe::embed {

namespace fs = std::filesystem;
using nlohmann::json;

// Absorbs binary-decimal rounding in k * stride so that an overlap of exactly
// half a window is not lost to representation error.
constexpr double kOverlapEpsilon = 1e-9;

bool is_layer_name(std::string_view name) {
  if (name == "cnn_raw" || name == "cnn_proj") return true;
  return std::find(kLayerNames.begin(), kLayerNames.end(), name) != kLayerNames.end();
}

void FrameTiming::validate() const {
  if (!(stride > 0.0 && stride <= window))
    throw ConfigError("frame timing needs 0 < stride <= window");
  if (!(min_overlap_fraction > 0.0 && min_overlap_fraction <= 1.0))
    throw ConfigError("frame overlap fraction must be in (0, 1]");
}

std::vector<std::size_t> frame_span(const Interval& iv, const FrameTiming& t,
                                    std::size_t num_frames) {
  std::vector<std::size_t> out;
  if (!(iv.start < iv.end) || num_frames == 0) return out;
  const double need = t.min_overlap_fraction * t.window - kOverlapEpsilon;
  // Only frames starting in (start - window, end) can overlap at all.
  double lo = std::floor((iv.start - t.window) / t.stride);
  double hi = std::ceil(iv.end / t.stride);
  auto first = static_cast<long long>(std::max(0.0, lo));
  auto last = static_cast<long long>(
      std::min(hi, static_cast<double>(num_frames) - 1.0));
  for (long long k = first; k <= last; ++k) {
    double fs = static_cast<double>(k) * t.stride;
    Interval frame{fs, fs + t.window};
    if (overlap(frame, iv) >= need) out.push_back(static_cast<std::size_t>(k));
  }
  return out;
}

PooledEmbedding pool(const LayerTensor& tensor,
                     const std::vector<std::size_t>& indices) {
  if (indices.empty())
    throw NoFramesError("no frames to pool for layer " + tensor.layer_name);
  std::vector<std::size_t> sorted = indices;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t dim = tensor.dim();
  PooledEmbedding out;
  out.layer_name = tensor.layer_name;
  out.vector.assign(dim, 0.0);
  for (std::size_t r : sorted) {
    if (r >= tensor.num_frames())
      throw ContractError("frame index " + std::to_string(r) +
                          " out of range for " + std::to_string(tensor.num_frames()) +
                          " frames");
    for (std::size_t c = 0; c < dim; ++c) out.vector[c] += tensor.values(r, c);
  }
  for (double& v : out.vector) v /= static_cast<double>(sorted.size());
  out.n_frames_pooled = sorted.size();
  return out;
}

UtteranceMeta read_meta(const std::string& dir, const std::string& utterance_id) {
  fs::path meta_path = fs::path(dir) / utterance_id / "meta.json";
  if (!fs::exists(meta_path))
    throw NotFoundError("no embedding metadata at " + meta_path.string());
  json doc;
  try {
    doc = json::parse(read_file(meta_path.string()));
    UtteranceMeta m;
    m.utterance_id = doc.at("utterance_id").get<std::string>();
    m.sample_rate = doc.at("sample_rate").get<int>();
    m.frame_window_s = doc.at("frame_window_s").get<double>();
    m.frame_stride_s = doc.at("frame_stride_s").get<double>();
    for (const auto& l : doc.at("layers")) {
      LayerMeta lm;
      lm.name = l.at("name").get<std::string>();
      lm.dim = l.at("dim").get<std::size_t>();
      lm.num_frames = l.at("num_frames").get<std::size_t>();
      lm.dtype = l.at("dtype").get<std::string>();
      lm.file = l.at("file").get<std::string>();
      lm.byte_length = l.at("byte_length").get<std::size_t>();
      m.layers.push_back(std::move(lm));
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(meta_path.string() + ": " + e.what());
  }
}

LayerTensor read_layer(const std::string& dir, const std::string& utterance_id,
                       const std::string& layer_name) {
  UtteranceMeta meta = read_meta(dir, utterance_id);
  auto it = std::find_if(meta.layers.begin(), meta.layers.end(),
                         [&](const LayerMeta& l) { return l.name == layer_name; });
  if (it == meta.layers.end())
    throw NotFoundError("layer '" + layer_name + "' not present for utterance '" +
                        utterance_id + "'");
  const LayerMeta& lm = *it;
  const std::string where = "utterance '" + utterance_id + "' layer '" + layer_name + "'";
  if (lm.dtype != "f32le")
    throw CorruptTensorError(where + ": unsupported dtype " + lm.dtype);
  if (lm.byte_length != 4 * lm.num_frames * lm.dim)
    throw CorruptTensorError(where + ": byte_length " + std::to_string(lm.byte_length) +
                             " != 4 * num_frames * dim");
  fs::path file = fs::path(dir) / utterance_id / lm.file;
  if (!fs::exists(file)) throw NotFoundError(where + ": missing file " + file.string());
  std::string bytes = read_file(file.string());
  if (bytes.size() != lm.byte_length)
    throw CorruptTensorError(where + ": payload has " + std::to_string(bytes.size()) +
                             " bytes, metadata says " + std::to_string(lm.byte_length));

  LayerTensor t;
  t.layer_name = layer_name;
  t.values.resize(static_cast<Eigen::Index>(lm.num_frames),
                  static_cast<Eigen::Index>(lm.dim));
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t i = 0; i < lm.num_frames * lm.dim; ++i) {
    std::uint32_t u = p[4 * i] | (p[4 * i + 1] << 8) | (p[4 * i + 2] << 16) |
                      (std::uint32_t(p[4 * i + 3]) << 24);
    float v = std::bit_cast<float>(u);
    if (!std::isfinite(v))
      throw CorruptTensorError(where + ": non-finite value at element " +
                               std::to_string(i));
    t.values.data()[i] = static_cast<double>(v);
  }
  return t;
}

void write_utterance(const std::string& dir, const std::string& utterance_id,
                     int sample_rate, const FrameTiming& timing,
                     const std::vector<LayerTensor>& layers) {
  fs::path udir = fs::path(dir) / utterance_id;
  fs::create_directories(udir);
  json meta;
  meta["utterance_id"] = utterance_id;
  meta["sample_rate"] = sample_rate;
  meta["frame_window_s"] = timing.window;
  meta["frame_stride_s"] = timing.stride;
  meta["layers"] = json::array();
  for (const auto& t : layers) {
    std::string payload;
    payload.reserve(4 * static_cast<std::size_t>(t.values.size()));
    for (Eigen::Index i = 0; i < t.values.size(); ++i) {
      auto u = std::bit_cast<std::uint32_t>(static_cast<float>(t.values.data()[i]));
      for (int b = 0; b < 4; ++b) payload.push_back(static_cast<char>((u >> (8 * b)) & 0xFF));
    }
    std::string file = t.layer_name + ".f32";
    write_file((udir / file).string(), payload);
    meta["layers"].push_back({{"name", t.layer_name},
                              {"dim", t.dim()},
                              {"num_frames", t.num_frames()},
                              {"dtype", "f32le"},
                              {"file", file},
                              {"byte_length", payload.size()}});
  }
  write_file((udir / "meta.json").string(), meta.dump(2));
}

}  // namespace stressprobe::embed
