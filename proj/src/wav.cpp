// src/wav.cpp

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

#include "stressprobe/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace stressprobe {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(std::string_view b, std::size_t off) {
  if (off + 4 > b.size()) throw UnsupportedFormatError("truncated WAV header");
  const auto* p = reinterpret_cast<const unsigned char*>(b.data() + off);
  return p[0] | (p[1] << 8) | (p[2] << 16) | (std::uint32_t(p[3]) << 24);
}

std::uint16_t read_u16(std::string_view b, std::size_t off) {
  if (off + 2 > b.size()) throw UnsupportedFormatError("truncated WAV header");
  const auto* p = reinterpret_cast<const unsigned char*>(b.data() + off);
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace

std::span<const double> AudioSegment::slice(const Interval& iv) const {
  auto n = static_cast<std::ptrdiff_t>(samples.size());
  auto b = static_cast<std::ptrdiff_t>(std::llround(iv.start * sample_rate));
  auto e = static_cast<std::ptrdiff_t>(std::llround(iv.end * sample_rate));
  b = std::clamp<std::ptrdiff_t>(b, 0, n);
  e = std::clamp<std::ptrdiff_t>(e, b, n);
  return std::span<const double>(samples.data() + b,
                                 static_cast<std::size_t>(e - b));
}

AudioSegment decode_wav(std::string_view b) {
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE")
    throw UnsupportedFormatError("not a RIFF/WAVE file");
  std::size_t off = 12;
  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  while (off + 8 <= b.size()) {
    std::string_view id = b.substr(off, 4);
    std::uint32_t size = read_u32(b, off + 4);
    std::size_t body = off + 8;
    if (id == "fmt ") {
      if (size < 16) throw UnsupportedFormatError("short fmt chunk");
      format = read_u16(b, body);
      channels = read_u16(b, body + 2);
      rate = read_u32(b, body + 4);
      bits = read_u16(b, body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw UnsupportedFormatError("short extensible fmt chunk");
        // First two bytes of the sub-format GUID carry the actual format tag.
        format = read_u16(b, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw UnsupportedFormatError("data chunk before fmt chunk");
      if (channels != 1)
        throw UnsupportedFormatError("only mono audio is supported, got " +
                                     std::to_string(channels) + " channels");
      std::size_t bytes_per = 0;
      if (format == kFormatPcm && bits == 16) {
        bytes_per = 2;
      } else if (format == kFormatFloat && bits == 32) {
        bytes_per = 4;
      } else {
        throw UnsupportedFormatError(
            "unsupported WAV encoding (format " + std::to_string(format) +
            ", " + std::to_string(bits) + " bits); need 16-bit PCM or 32-bit float");
      }
      if (body + size > b.size())
        throw UnsupportedFormatError("data chunk shorter than declared");
      std::size_t n = size / bytes_per;
      AudioSegment audio;
      audio.sample_rate = static_cast<int>(rate);
      audio.samples.resize(n);
      const auto* p = reinterpret_cast<const unsigned char*>(b.data() + body);
      for (std::size_t i = 0; i < n; ++i) {
        if (bytes_per == 2) {
          auto v = static_cast<std::int16_t>(p[2 * i] | (p[2 * i + 1] << 8));
          audio.samples[i] = static_cast<double>(v) / 32768.0;
        } else {
          std::uint32_t bitsv = p[4 * i] | (p[4 * i + 1] << 8) |
                                (p[4 * i + 2] << 16) |
                                (std::uint32_t(p[4 * i + 3]) << 24);
          audio.samples[i] =
              std::clamp(static_cast<double>(std::bit_cast<float>(bitsv)), -1.0, 1.0);
        }
      }
      if (audio.sample_rate <= 0) throw UnsupportedFormatError("zero sample rate");
      return audio;
    }
    off = body + size + (size & 1);
  }
  throw UnsupportedFormatError("no data chunk");
}

AudioSegment load_audio(const std::string& path) {
  try {
    return decode_wav(read_file(path));
  } catch (const UnsupportedFormatError& e) {
    throw UnsupportedFormatError(path + ": " + e.what());
  }
}

std::string encode_wav(const AudioSegment& audio, WavEncoding enc) {
  const std::uint16_t bits = enc == WavEncoding::pcm16 ? 16 : 32;
  const std::uint32_t bytes_per = bits / 8;
  const auto data_size = static_cast<std::uint32_t>(audio.samples.size() * bytes_per);
  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  put_u32(out, 36 + data_size);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, enc == WavEncoding::pcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate) * bytes_per);
  put_u16(out, static_cast<std::uint16_t>(bytes_per));
  put_u16(out, bits);
  out += "data";
  put_u32(out, data_size);
  for (double s : audio.samples) {
    double c = std::clamp(s, -1.0, 1.0);
    if (enc == WavEncoding::pcm16) {
      auto v = static_cast<std::int16_t>(
          std::clamp<long>(std::lround(c * 32768.0), -32768, 32767));
      put_u16(out, static_cast<std::uint16_t>(v));
    } else {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(c)));
    }
  }
  return out;
}

void write_wav(const std::string& path, const AudioSegment& audio,
               WavEncoding enc) {
  write_file(path, encode_wav(audio, enc));
}

}  // namespace stressprobe
