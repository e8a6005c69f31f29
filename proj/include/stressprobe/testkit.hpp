// include/stressprobe/testkit.hpp

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

#ifndef STRESSPROBE_TESTKIT_HPP_
#define STRESSPROBE_TESTKIT_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stressprobe/acoustic.hpp"
#include "stressprobe/corpus.hpp"
#include "stressprobe/embedpool.hpp"
#include "stressprobe/rng.hpp"
#include "stressprobe/wav.hpp"

namespace stressprobe::testkit {

// Controllable stress cues for a synthetic corpus. Deltas are added to the
// stressed vowel (or to the unstressed one when `inverted`).
struct CueSpec {
  double duration_ratio = 1.0;
  double intensity_delta = 0.0;  // dB
  double pitch_delta = 0.0;      // Hz
  double tilt_delta = 0.0;       // dB on the 500-4000 Hz bands
  double noise_level = 0.01;     // relative to vowel RMS
  int n_words = 100;
  std::uint64_t seed = 1;
  bool inverted = false;

  void validate() const;
};

struct Jitter {
  double log_duration_sd = 0.1;
  double intensity_db_sd = 1.0;
  double pitch_hz_sd = 5.0;
};

// Harmonic source shaped by two resonances, scaled to the requested RMS.
// `tilt_db` raises harmonics above 500 Hz; `noise_level` mixes in white
// noise (relative amplitude) drawn from `rng`.
std::vector<double> synth_vowel(double f0, acoustic::Formants formants, double dur,
                                double amp, int sample_rate, double tilt_db = 0.0,
                                double noise_level = 0.0, Rng* rng = nullptr);

struct SynthCorpus {
  Language language = Language::nl;
  int sample_rate = 16000;
  std::vector<corpus::Utterance> utterances;
  std::vector<AudioSegment> audio;
  corpus::PhoneInventory inventory;
  std::string lexicon_tsv;
  std::map<std::string, Stress> labels;  // token_id -> ground truth
};

SynthCorpus synth_corpus(const CueSpec& spec, Language language,
                         int sample_rate = 16000, const Jitter& jitter = {});

// Writes alignments/<utt>.json, audio/<utt>.wav, lexicon.tsv, inventory.json
// and labels.csv under `dir`.
void write_corpus(const SynthCorpus& corpus, const std::string& dir);

struct EmbeddingSpec {
  std::size_t dim = 16;
  std::vector<std::string> layers{"cv", "cnn", "tf5", "tf11", "tf17", "tf23"};
  // Mean shift (in noise standard deviations) of stressed-vowel frames, per
  // layer; layers not listed get 1.0.
  std::map<std::string, double> separation{{"cv", 0.5},   {"cnn", 0.7},
                                           {"tf5", 1.0},  {"tf11", 1.4},
                                           {"tf17", 1.8}, {"tf23", 1.2}};
  // Weight of the language-specific component of the stress direction.
  double language_specificity = 0.8;
  embed::FrameTiming timing;
  std::uint64_t seed = 1;
};

// Labeled Gaussian frame embeddings for every utterance of the corpus, in the
// interchange format.
void synth_embeddings(const SynthCorpus& corpus, const EmbeddingSpec& spec,
                      const std::string& dir);

}  // namespace stressprobe::testkit

#endif  // STRESSPROBE_TESTKIT_HPP_
