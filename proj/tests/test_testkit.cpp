// tests/test_testkit.cpp

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
#include <filesystem>

#include "stressprobe/embedpool.hpp"
#include "stressprobe/testkit.hpp"

using namespace stressprobe;
using namespace stressprobe::testkit;
namespace fs = std::filesystem;

namespace {

double rms(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

struct Pair {
  corpus::VowelToken first, second;
};

std::vector<Pair> pairs(const SynthCorpus& c) {
  std::vector<Pair> out;
  for (const auto& u : c.utterances)
    for (const auto& w : corpus::select_bisyllabic(u, c.inventory).words)
      out.push_back({w.first, w.second});
  return out;
}

}  // namespace

TEST_CASE("synthetic vowel length, pitch and level") {
  auto v = synth_vowel(150, {500, 1500}, 0.1, 0.05, 16000);
  CHECK(v.size() == 1600);
  auto p = acoustic::mean_pitch(v, 16000);
  REQUIRE(p);
  CHECK(std::abs(*p - 150) < 2);
  CHECK(rms(v) == doctest::Approx(0.05).epsilon(1e-9));
  auto louder = synth_vowel(150, {500, 1500}, 0.1, 0.1, 16000);
  CHECK(acoustic::intensity_db(louder) - acoustic::intensity_db(v) ==
        doctest::Approx(20 * std::log10(2.0)).epsilon(1e-9));
}

TEST_CASE("synthetic vowel formants are measurable") {
  auto v = synth_vowel(120, {500, 1500}, 0.15, 0.05, 16000);
  auto f = acoustic::measure_formants(v, 16000);
  REQUIRE(f);
  CHECK(std::abs(f->f1 - 500) < 50);
  CHECK(std::abs(f->f2 - 1500) < 75);
}

TEST_CASE("tilt delta lifts the upper bands") {
  auto flat = acoustic::spectral_tilt(synth_vowel(120, {500, 1500}, 0.1, 0.05, 16000), 16000);
  auto lifted =
      acoustic::spectral_tilt(synth_vowel(120, {500, 1500}, 0.1, 0.05, 16000, 6.0), 16000);
  CHECK((lifted[3] - lifted[0]) - (flat[3] - flat[0]) == doctest::Approx(6.0).epsilon(0.1));
}

TEST_CASE("noisy vowels keep their level") {
  Rng rng(4);
  auto v = synth_vowel(130, {700, 1250}, 0.1, 0.05, 16000, 0.0, 0.1, &rng);
  CHECK(rms(v) == doctest::Approx(0.05).epsilon(0.05));
  CHECK_THROWS_AS(synth_vowel(130, {700, 1250}, 0.1, 0.05, 16000, 0.0, 0.1), ContractError);
  CHECK_THROWS_AS(synth_vowel(30, {700, 1250}, 0.1, 0.05, 16000), ContractError);
  CHECK_THROWS_AS(synth_vowel(130, {700, 1250}, 0.01, 0.05, 16000), ContractError);
  CHECK_THROWS_AS(synth_vowel(130, {700, 1250}, 0.1, 0.05, 4000), ContractError);
}

TEST_CASE("synthetic corpus is reproducible") {
  CueSpec spec;
  spec.n_words = 40;
  spec.duration_ratio = 1.3;
  auto a = synth_corpus(spec, Language::en);
  auto b = synth_corpus(spec, Language::en);
  REQUIRE(a.audio.size() == b.audio.size());
  for (std::size_t i = 0; i < a.audio.size(); ++i) CHECK(a.audio[i].samples == b.audio[i].samples);
  CHECK(a.labels == b.labels);
  spec.seed = 2;
  auto c = synth_corpus(spec, Language::en);
  CHECK(c.audio[0].samples != a.audio[0].samples);
}

TEST_CASE("every synthetic word has one stressed vowel") {
  CueSpec spec;
  spec.n_words = 60;
  for (Language lang : {Language::de, Language::hu}) {
    auto c = synth_corpus(spec, lang);
    auto ps = pairs(c);
    CHECK(ps.size() == 60);
    CHECK(c.labels.size() == 120);
    std::size_t first_stressed = 0;
    for (const auto& p : ps) {
      Stress s1 = c.labels.at(p.first.token_id()), s2 = c.labels.at(p.second.token_id());
      CHECK(s1 != s2);
      if (s1 == Stress::stressed) ++first_stressed;
    }
    // Fixed-stress languages always stress the first syllable.
    if (is_fixed_stress(lang)) {
      CHECK(first_stressed == 60);
    } else {
      CHECK(first_stressed > 10);
      CHECK(first_stressed < 50);
    }
    for (std::size_t i = 0; i < c.utterances.size(); ++i)
      CHECK_NOTHROW(corpus::validate(c.utterances[i], c.audio[i].duration()));
  }
}

TEST_CASE("duration cues follow the stress labels") {
  CueSpec spec;
  spec.n_words = 200;
  spec.duration_ratio = 1.5;
  for (bool inverted : {false, true}) {
    spec.inverted = inverted;
    auto c = synth_corpus(spec, Language::nl);
    double stressed = 0, unstressed = 0;
    for (const auto& p : pairs(c))
      for (const auto* t : {&p.first, &p.second})
        (c.labels.at(t->token_id()) == Stress::stressed ? stressed : unstressed) +=
            t->interval.length();
    CHECK((inverted ? unstressed / stressed : stressed / unstressed) ==
          doctest::Approx(1.5).epsilon(0.05));
  }
}

TEST_CASE("cue validation") {
  CueSpec spec;
  spec.n_words = 0;
  CHECK_THROWS_AS(spec.validate(), ContractError);
  spec = {};
  spec.duration_ratio = 0;
  CHECK_THROWS_AS(spec.validate(), ContractError);
}

TEST_CASE("corpus and embeddings on disk") {
  fs::path dir = fs::temp_directory_path() / "stressprobe_testkit_disk";
  fs::remove_all(dir);
  CueSpec spec;
  spec.n_words = 12;
  auto c = synth_corpus(spec, Language::nl);
  write_corpus(c, (dir / "nl").string());
  CHECK(fs::exists(dir / "nl" / "lexicon.tsv"));
  CHECK(fs::exists(dir / "nl" / "inventory.json"));
  CHECK(fs::exists(dir / "nl" / "labels.csv"));
  EmbeddingSpec es;
  synth_embeddings(c, es, (dir / "emb").string());
  const auto& u = c.utterances.front();
  auto meta = embed::read_meta((dir / "emb").string(), u.id);
  CHECK(meta.layers.size() == 6);
  auto t = embed::read_layer((dir / "emb").string(), u.id, "tf17");
  CHECK(t.dim() == 16);
  const double dur = c.audio.front().duration();
  CHECK(t.num_frames() ==
        static_cast<std::size_t>(std::floor((dur - es.timing.window) / es.timing.stride)) + 1);
}
