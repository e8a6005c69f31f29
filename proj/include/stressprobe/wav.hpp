// include/stressprobe/wav.hpp

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

#ifndef STRESSPROBE_WAV_HPP_
#define STRESSPROBE_WAV_HPP_

#include <span>
#include <string>
#include <vector>

#include "stressprobe/common.hpp"

namespace stressprobe {

struct AudioSegment {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate = 0;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
  // Samples covering [start, end) seconds, clipped to the signal.
  std::span<const double> slice(const Interval& iv) const;
};

enum class WavEncoding { pcm16, float32 };

// RIFF/WAVE reader: mono linear PCM 16-bit or IEEE float 32-bit (plain or
// WAVE_FORMAT_EXTENSIBLE). Anything else is UnsupportedFormatError.
AudioSegment load_audio(const std::string& path);
AudioSegment decode_wav(std::string_view bytes);

std::string encode_wav(const AudioSegment& audio,
                       WavEncoding enc = WavEncoding::pcm16);
void write_wav(const std::string& path, const AudioSegment& audio,
               WavEncoding enc = WavEncoding::pcm16);

}  // namespace stressprobe

#endif  // STRESSPROBE_WAV_HPP_
