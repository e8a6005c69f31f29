// include/stressprobe/embedpool.hpp

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

#ifndef STRESSPROBE_EMBEDPOOL_HPP_
#define STRESSPROBE_EMBEDPOOL_HPP_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "stressprobe/common.hpp"

namespace stressprobe::embed {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::array<std::string_view, 6> kLayerNames = {
    "cv", "cnn", "tf5", "tf11", "tf17", "tf23"};

bool is_layer_name(std::string_view name);

struct LayerTensor {
  std::string layer_name;
  RowMatrix values;  // num_frames x dim

  std::size_t num_frames() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(values.cols()); }
};

struct FrameTiming {
  double window = 0.025;
  double stride = 0.020;
  // Minimum overlap as a fraction of the frame window.
  double min_overlap_fraction = 0.5;

  void validate() const;
};

// Frame k spans [k*stride, k*stride + window]; it is selected when its overlap
// with the interval is at least min_overlap_fraction * window.
std::vector<std::size_t> frame_span(const Interval& interval,
                                    const FrameTiming& timing,
                                    std::size_t num_frames);

struct PooledEmbedding {
  std::string token_id;
  std::string layer_name;
  std::vector<double> vector;
  std::size_t n_frames_pooled = 0;
};

class NoFramesError : public Error {
 public:
  using Error::Error;
};

// Elementwise mean of the selected rows. The index list is treated as a set
// order-wise, so any permutation gives a bitwise-identical result.
PooledEmbedding pool(const LayerTensor& tensor,
                     const std::vector<std::size_t>& indices);

struct LayerMeta {
  std::string name;
  std::size_t dim = 0;
  std::size_t num_frames = 0;
  std::string dtype = "f32le";
  std::string file;
  std::size_t byte_length = 0;
};

struct UtteranceMeta {
  std::string utterance_id;
  int sample_rate = 16000;
  double frame_window_s = 0.025;
  double frame_stride_s = 0.020;
  std::vector<LayerMeta> layers;
};

UtteranceMeta read_meta(const std::string& dir, const std::string& utterance_id);

// Reads <dir>/<utterance_id>/meta.json and the layer's payload.
// NotFoundError for a missing layer or file; CorruptTensorError for any
// length or finiteness mismatch.
LayerTensor read_layer(const std::string& dir, const std::string& utterance_id,
                       const std::string& layer_name);

// Writes (or extends) an utterance directory in the interchange format.
void write_utterance(const std::string& dir, const std::string& utterance_id,
                     int sample_rate, const FrameTiming& timing,
                     const std::vector<LayerTensor>& layers);

}  // namespace stressprobe::embed

#endif  // STRESSPROBE_EMBEDPOOL_HPP_
