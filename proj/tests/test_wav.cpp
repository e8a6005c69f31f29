// tests/test_wav.cpp

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

#include <cmath>
#include <cstdint>
#include <cstring>

#include "stressprobe/wav.hpp"

using namespace stressprobe;

namespace {

void put16(std::string& s, std::uint16_t v) {
  s += static_cast<char>(v & 0xff);
  s += static_cast<char>(v >> 8);
}
void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s += static_cast<char>((v >> (8 * i)) & 0xff);
}

// Hand-assembled RIFF file, independent of encode_wav.
std::string riff(std::uint16_t format, std::uint16_t channels, std::uint32_t sr,
                 std::uint16_t bits, const std::string& payload) {
  std::string fmt;
  put16(fmt, format);
  put16(fmt, channels);
  put32(fmt, sr);
  put32(fmt, sr * channels * bits / 8);
  put16(fmt, static_cast<std::uint16_t>(channels * bits / 8));
  put16(fmt, bits);
  std::string body = "WAVE";
  body += "fmt ";
  put32(body, static_cast<std::uint32_t>(fmt.size()));
  body += fmt;
  body += "data";
  put32(body, static_cast<std::uint32_t>(payload.size()));
  body += payload;
  std::string out = "RIFF";
  put32(out, static_cast<std::uint32_t>(body.size()));
  return out + body;
}

}  // namespace

TEST_CASE("1 s of 16 kHz PCM gives 16000 samples") {
  std::string payload;
  for (int i = 0; i < 16000; ++i) put16(payload, static_cast<std::uint16_t>(i % 100));
  auto a = decode_wav(riff(1, 1, 16000, 16, payload));
  CHECK(a.samples.size() == 16000);
  CHECK(a.sample_rate == 16000);
  CHECK(a.duration() == doctest::Approx(1.0));
}

TEST_CASE("PCM16 normalization") {
  std::string payload;
  put16(payload, 0x8000);  // -32768
  put16(payload, 0x7fff);
  put16(payload, 0);
  auto a = decode_wav(riff(1, 1, 8000, 16, payload));
  REQUIRE(a.samples.size() == 3);
  CHECK(a.samples[0] == -1.0);
  CHECK(a.samples[1] == 32767.0 / 32768.0);
  CHECK(a.samples[2] == 0.0);
}

TEST_CASE("float32 payloads decode verbatim") {
  std::string payload;
  for (float f : {0.5f, -0.25f, 0.125f}) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put32(payload, bits);
  }
  auto a = decode_wav(riff(3, 1, 16000, 32, payload));
  REQUIRE(a.samples.size() == 3);
  CHECK(a.samples[1] == -0.25);
}

TEST_CASE("unsupported encodings are rejected") {
  std::string payload(8, '\0');
  CHECK_THROWS_AS(decode_wav(riff(1, 2, 16000, 16, payload)), UnsupportedFormatError);
  CHECK_THROWS_AS(decode_wav(riff(1, 1, 16000, 24, std::string(9, '\0'))), UnsupportedFormatError);
  CHECK_THROWS_AS(decode_wav(riff(6, 1, 8000, 8, payload)), UnsupportedFormatError);
  CHECK_THROWS_AS(decode_wav("not a wav file"), UnsupportedFormatError);
}

TEST_CASE("encode/decode round trip") {
  AudioSegment a;
  a.sample_rate = 22050;
  for (int i = 0; i < 1000; ++i) a.samples.push_back(0.9 * std::sin(0.01 * i));
  auto f = decode_wav(encode_wav(a, WavEncoding::float32));
  REQUIRE(f.samples.size() == a.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    CHECK(f.samples[i] == static_cast<double>(static_cast<float>(a.samples[i])));
  auto p = decode_wav(encode_wav(a, WavEncoding::pcm16));
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    CHECK(std::abs(p.samples[i] - a.samples[i]) <= 1.0 / 32768.0);
  CHECK(p.sample_rate == 22050);
}

TEST_CASE("slice clamps to the signal") {
  AudioSegment a;
  a.sample_rate = 1000;
  a.samples.assign(1000, 0.0);
  CHECK(a.slice({0.1, 0.2}).size() == 100);
  CHECK(a.slice({0.95, 1.5}).size() == 50);
  CHECK(a.slice({2.0, 3.0}).empty());
}
