// tests/test_acoustic.cpp

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
#include <numbers>
#include <numeric>

#include "stressprobe/acoustic.hpp"
#include "stressprobe/rng.hpp"

using namespace stressprobe;
using namespace stressprobe::acoustic;

namespace {

std::vector<double> sine(double f, double amp, double dur, int sr, double phase = 0.0) {
  std::vector<double> x(static_cast<std::size_t>(std::llround(dur * sr)));
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = amp * std::sin(2 * std::numbers::pi * f * static_cast<double>(i) / sr + phase);
  return x;
}

std::vector<double> noise(std::size_t n, double sd, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = sd * rng.normal();
  return x;
}

// Impulse train at f0 through two second-order resonators in cascade.
std::vector<double> two_pole_vowel(double f0, double f1, double f2, double dur, int sr) {
  const std::size_t n = static_cast<std::size_t>(std::llround(dur * sr));
  std::vector<double> x(n, 0.0);
  const double period = sr / f0;
  for (double t = 0; t < static_cast<double>(n); t += period) x[static_cast<std::size_t>(t)] = 1.0;
  for (double f : {f1, f2}) {
    const double bw = 80.0;
    const double r = std::exp(-std::numbers::pi * bw / sr);
    const double c1 = 2 * r * std::cos(2 * std::numbers::pi * f / sr), c2 = -r * r;
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      y[i] = x[i] + (i >= 1 ? c1 * y[i - 1] : 0.0) + (i >= 2 ? c2 * y[i - 2] : 0.0);
    x = y;
  }
  double peak = 0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  for (double& v : x) v *= 0.5 / peak;
  return x;
}

double linear_sum(const TiltBands& db) {
  double s = 0;
  for (double d : db) s += std::pow(10.0, d / 10.0);
  return s;
}

}  // namespace

TEST_CASE("duration is end minus start") {
  corpus::VowelToken t;
  t.interval = {0.10, 0.20};
  CHECK(duration(t) == doctest::Approx(0.10));
  t.interval = {1.0, 1.001};
  CHECK(duration(t) == doctest::Approx(0.001));
}

TEST_CASE("intensity reference level and sinusoid") {
  std::vector<double> ref(100, 2e-5);  // mean square 4e-10
  CHECK(intensity_db(ref) == doctest::Approx(0.0).epsilon(1e-12));
  // 100 Hz at 16 kHz: 160 samples per period, 20 periods.
  auto x = sine(100, 0.3, 0.2, 16000);
  const double analytic = 10 * std::log10((0.3 * 0.3 / 2) / 4e-10);
  CHECK(std::abs(intensity_db(x) - analytic) < 1e-6);
  CHECK_THROWS_AS(intensity_db(std::vector<double>(10, 0.0)), UndefinedFeatureError);
  CHECK_THROWS_AS(intensity_db(std::vector<double>{}), ContractError);
}

TEST_CASE("intensity scaling law") {
  auto x = noise(1000, 0.1, 9);
  for (double c : {0.01, 0.5, 2.0, 17.0}) {
    std::vector<double> y(x);
    for (double& v : y) v *= c;
    CHECK(std::abs(intensity_db(y) - intensity_db(x) - 20 * std::log10(c)) < 1e-9);
  }
}

TEST_CASE("pitch of sines, pulse trains and noise") {
  auto s200 = sine(200, 0.5, 0.2, 16000);
  auto p = mean_pitch(s200, 16000);
  REQUIRE(p);
  CHECK(std::abs(*p - 200) < 2);

  auto pulses = two_pole_vowel(120, 600, 1200, 0.2, 16000);
  auto q = mean_pitch(pulses, 16000);
  REQUIRE(q);
  CHECK(std::abs(*q - 120) < 2);

  CHECK_FALSE(mean_pitch(noise(3200, 0.3, 4), 16000).has_value());
}

TEST_CASE("pitch of pure tones within 1% over 80-400 Hz") {
  for (double f = 80; f <= 400; f += 20) {
    auto p = mean_pitch(sine(f, 0.4, 0.25, 16000, 0.3), 16000);
    REQUIRE(p);
    CHECK(std::abs(*p - f) / f < 0.01);
  }
}

TEST_CASE("spectral tilt concentrates sinusoids in their band") {
  auto t250 = spectral_tilt(sine(250, 0.5, 0.2, 16000), 16000);
  CHECK(std::pow(10.0, t250[0] / 10) / linear_sum(t250) >= 0.99);
  auto t1500 = spectral_tilt(sine(1500, 0.5, 0.2, 16000), 16000);
  CHECK(t1500[2] > t1500[0]);
  CHECK(t1500[2] > t1500[1]);
  CHECK(t1500[2] > t1500[3]);

  auto a = sine(250, 0.3, 0.2, 16000), b = sine(3000, 0.3, 0.2, 16000);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  auto both = spectral_tilt(a, 16000);
  CHECK(std::abs(both[0] - both[3]) < 0.5);

  CHECK_THROWS_AS(spectral_tilt(sine(250, 0.5, 0.2, 6000), 6000), UndefinedFeatureError);
}

TEST_CASE("spectral tilt shifts uniformly under scaling") {
  auto x = noise(3200, 0.1, 2);
  auto base = spectral_tilt(x, 16000);
  for (double& v : x) v *= 3.0;
  auto scaled = spectral_tilt(x, 16000);
  for (int k = 0; k < 4; ++k) CHECK(scaled[k] - base[k] == doctest::Approx(20 * std::log10(3.0)));
}

TEST_CASE("band powers of white noise follow bandwidth") {
  auto bp = band_powers(noise(16000, 0.1, 3), 16000);
  // Bands are 500, 500, 1000, 2000 Hz wide out of 8000.
  const double total = 0.01;
  CHECK(bp[0] == doctest::Approx(total * 500 / 8000).epsilon(0.15));
  CHECK(bp[3] == doctest::Approx(total * 2000 / 8000).epsilon(0.15));
}

TEST_CASE("formants of an all-pole synthetic vowel") {
  auto x = two_pole_vowel(110, 500, 1500, 0.2, 16000);
  auto f = measure_formants(x, 16000);
  REQUIRE(f);
  CHECK(std::abs(f->f1 - 500) < 50);
  CHECK(std::abs(f->f2 - 1500) < 75);
  CHECK_FALSE(measure_formants(std::vector<double>(3200, 0.0), 16000).has_value());
}

TEST_CASE("formant statistics and peripherality") {
  std::vector<Formants> one{{500, 1500}};
  auto s1 = formant_stats(one, Language::nl);
  CHECK(s1.mean_f1 == 500);
  CHECK(s1.mean_f2 == 1500);
  std::vector<Formants> two{{400, 1200}, {600, 1800}};
  auto s2 = formant_stats(two, Language::nl);
  CHECK(s2.mean_f1 == doctest::Approx(500));
  CHECK(s2.mean_f2 == doctest::Approx(1500));
  CHECK(s2.token_count == 2);
  CHECK_THROWS_AS(formant_stats(std::vector<Formants>{}, Language::nl), ContractError);

  CHECK(formant_peripherality(500, 1500, s2) == doctest::Approx(0.0));
  CHECK(formant_peripherality(500, 1600, s2) == doctest::Approx(100.0));
  CHECK(formant_peripherality(800, 1900, s2) == doctest::Approx(500.0));

  // 100 random tokens against an independent mean.
  Rng rng(1);
  std::vector<Formants> many;
  double s_f1 = 0, s_f2 = 0;
  for (int i = 0; i < 100; ++i) {
    many.push_back({rng.uniform(250, 900), rng.uniform(700, 2500)});
    s_f1 += many.back().f1;
    s_f2 += many.back().f2;
  }
  auto s3 = formant_stats(many, Language::de);
  CHECK(s3.mean_f1 == doctest::Approx(s_f1 / 100).epsilon(1e-12));
  CHECK(s3.mean_f2 == doctest::Approx(s_f2 / 100).epsilon(1e-12));
}

TEST_CASE("formant accumulators merge like one pass") {
  Rng rng(8);
  FormantAccumulator all, left, right;
  for (int i = 0; i < 50; ++i) {
    Formants f{rng.uniform(300, 800), rng.uniform(800, 2400)};
    all.add(f);
    (i % 3 ? left : right).add(f);
  }
  left.merge(right);
  auto a = all.finalize(Language::en), b = left.finalize(Language::en);
  CHECK(a.token_count == b.token_count);
  CHECK(a.mean_f1 == doctest::Approx(b.mean_f1).epsilon(1e-12));
}

TEST_CASE("combined vector order and undefined constituents") {
  AcousticFeatures f;
  f.duration = 0.1;
  f.intensity = 60;
  f.pitch = 120;
  f.tilt = TiltBands{1, 2, 3, 4};
  f.formants = Formants{500, 1500};
  f.peripherality = 42;
  auto c = combined(f);
  CHECK(c == std::array<double, 8>{0.1, 60, 120, 1, 2, 3, 4, 42});
  f.pitch.reset();
  CHECK_THROWS_AS(combined(f), UndefinedFeatureError);
}

TEST_CASE("feature table round trip keeps undefined cells") {
  FeatureRow r;
  r.token_id = "u:0:1";
  r.language = Language::pl;
  r.stress = Stress::unstressed;
  r.features.duration = 0.123;
  r.features.intensity = 61.5;
  r.features.tilt = TiltBands{1.5, 2.5, 3.5, 4.5};
  auto csv = feature_table_csv({r});
  CHECK(csv.rfind("token_id,language,stress,duration,intensity,pitch,tilt1,tilt2,tilt3,tilt4,f1,f2,peripherality\n", 0) == 0);
  auto back = parse_feature_table(csv);
  REQUIRE(back.size() == 1);
  CHECK(back[0].features.duration == 0.123);
  CHECK_FALSE(back[0].features.pitch.has_value());
  CHECK_FALSE(back[0].features.formants.has_value());
  CHECK(back[0].features.tilt->at(2) == 3.5);
  CHECK(feature_table_csv(back) == csv);
}

TEST_CASE("measure_token leaves peripherality for later") {
  corpus::VowelToken t;
  t.interval = {0.0, 0.1};
  auto x = two_pole_vowel(130, 600, 1300, 0.1, 16000);
  auto f = measure_token(t, x, 16000);
  CHECK(f.duration == doctest::Approx(0.1));
  CHECK(f.intensity.has_value());
  CHECK(f.pitch.has_value());
  CHECK(f.tilt.has_value());
  CHECK_FALSE(f.peripherality.has_value());
}
