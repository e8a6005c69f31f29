// src/testkit.cpp

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

#include "stressprobe/testkit.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "stressprobe/stresslabel.hpp"

namespace stressprobe::testkit {

namespace fs = std::filesystem;

namespace {

constexpr double kBandwidthF1 = 80.0;
constexpr double kBandwidthF2 = 100.0;
constexpr double kBaseDuration = 0.10;
constexpr double kBaseRms = 0.05;
constexpr double kBasePitch = 120.0;
constexpr int kWordsPerUtterance = 4;

struct VowelQuality {
  const char* symbol;
  acoustic::Formants formants;
};

constexpr VowelQuality kVowels[] = {
    {"a", {700.0, 1250.0}}, {"e", {450.0, 1900.0}}, {"i", {300.0, 2250.0}},
    {"o", {480.0, 900.0}},  {"u", {330.0, 850.0}},
};
constexpr const char* kConsonants[] = {"t", "k", "s", "m", "n", "p", "l", "d"};
constexpr const char* kDiphthongs[] = {"ai", "au"};

// Magnitude response of a DC-normalized two-pole resonator.
double resonator_gain(double f, double centre, double bw, int sr) {
  const double r = std::exp(-std::numbers::pi * bw / sr);
  const double theta = 2.0 * std::numbers::pi * centre / sr;
  const double b = 2.0 * r * std::cos(theta), c = -r * r;
  const double a = 1.0 - b - c;
  const std::complex<double> z = std::polar(1.0, -2.0 * std::numbers::pi * f / sr);
  return std::abs(a / (1.0 - b * z - c * z * z));
}

void scale_to_rms(std::vector<double>& x, double amp) {
  double ss = 0.0;
  for (double v : x) ss += v * v;
  double rms = std::sqrt(ss / static_cast<double>(x.size()));
  if (rms > 0)
    for (double& v : x) v *= amp / rms;
}

std::size_t to_samples(double t, int sr) {
  return static_cast<std::size_t>(std::llround(t * sr));
}

}  // namespace

void CueSpec::validate() const {
  if (!(duration_ratio >= 1.0) || !std::isfinite(duration_ratio))
    throw ContractError("duration_ratio must be finite and >= 1");
  for (double d : {intensity_delta, pitch_delta, tilt_delta, noise_level})
    if (!std::isfinite(d)) throw ContractError("cue deltas must be finite");
  if (noise_level < 0) throw ContractError("noise_level must be non-negative");
  if (n_words < 10) throw ContractError("a synthetic corpus needs at least 10 words");
}

std::vector<double> synth_vowel(double f0, acoustic::Formants formants, double dur,
                                double amp, int sr, double tilt_db, double noise_level,
                                Rng* rng) {
  if (!(f0 >= 60.0 && f0 <= 500.0))
    throw ContractError("synth_vowel: f0 must lie in [60, 500] Hz");
  if (!(dur >= 0.03)) throw ContractError("synth_vowel: duration must be >= 0.03 s");
  if (!(amp > 0.0)) throw ContractError("synth_vowel: amplitude must be positive");
  if (sr < 8000) throw ContractError("synth_vowel: sample rate must be >= 8 kHz");
  if (noise_level > 0 && !rng) throw ContractError("synth_vowel: noise needs an rng");

  const std::size_t n = to_samples(dur, sr);
  const double fmax = std::min(5000.0, 0.45 * sr);
  const double tilt_gain = std::pow(10.0, tilt_db / 20.0);
  std::vector<double> x(n, 0.0);
  for (int k = 1; k * f0 < fmax; ++k) {
    const double f = k * f0;
    double a = resonator_gain(f, formants.f1, kBandwidthF1, sr) *
               resonator_gain(f, formants.f2, kBandwidthF2, sr) / k;
    if (f > 500.0) a *= tilt_gain;
    const double w = 2.0 * std::numbers::pi * f / sr;
    for (std::size_t i = 0; i < n; ++i) x[i] += a * std::sin(w * static_cast<double>(i));
  }
  scale_to_rms(x, 1.0);
  if (noise_level > 0)
    for (double& v : x) v += noise_level * rng->normal();
  scale_to_rms(x, amp);
  return x;
}

SynthCorpus synth_corpus(const CueSpec& spec, Language language, int sr,
                         const Jitter& jitter) {
  spec.validate();
  SynthCorpus out;
  out.language = language;
  out.sample_rate = sr;
  out.inventory.language = language;
  for (const auto& v : kVowels) out.inventory.vowels.insert(v.symbol);
  for (const char* d : kDiphthongs) {
    out.inventory.vowels.insert(d);
    out.inventory.diphthongs.insert(d);
  }

  const std::string code(to_string(language));
  std::ostringstream lexicon;
  const int n_utts = (spec.n_words + kWordsPerUtterance - 1) / kWordsPerUtterance;
  int word_counter = 0;
  for (int u = 0; u < n_utts; ++u) {
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "%s_%05d", code.c_str(), u);
    corpus::Utterance utt;
    utt.id = idbuf;
    utt.language = language;
    utt.audio_path = utt.id + ".wav";
    utt.sample_rate = sr;

    Rng noise_rng(derive_seed(spec.seed, {"noise", code, utt.id}));
    std::vector<double> audio;
    auto append_noise = [&](double seconds, double level) {
      std::size_t n = to_samples(seconds, sr);
      for (std::size_t i = 0; i < n; ++i) audio.push_back(level * noise_rng.normal());
    };
    append_noise(0.15, 1e-4);

    const int in_utt = std::min(kWordsPerUtterance, spec.n_words - word_counter);
    for (int w = 0; w < in_utt; ++w, ++word_counter) {
      // Per-word stream so that words are reproducible independently.
      Rng rng(derive_seed(spec.seed, {"word", code, std::to_string(word_counter)}));
      const int stressed = is_fixed_stress(language) ? 0 : static_cast<int>(rng.below(2));
      const int cued = spec.inverted ? 1 - stressed : stressed;

      corpus::WordToken word;
      word.orthography = "w" + code + std::to_string(word_counter);
      const double word_start = static_cast<double>(audio.size()) / sr;
      std::vector<std::string> lex_syllables;
      for (int s = 0; s < 2; ++s) {
        const char* cons = kConsonants[rng.below(std::size(kConsonants))];
        const VowelQuality& vq = kVowels[rng.below(std::size(kVowels))];
        const bool cue = s == cued;

        double cdur = 0.05 + 0.02 * rng.uniform();
        double vdur = kBaseDuration * std::exp(jitter.log_duration_sd * rng.normal());
        if (cue) vdur *= spec.duration_ratio;
        double level_db = jitter.intensity_db_sd * rng.normal() + (cue ? spec.intensity_delta : 0.0);
        double f0 = kBasePitch + jitter.pitch_hz_sd * rng.normal() + (cue ? spec.pitch_delta : 0.0);
        f0 = std::clamp(f0, 60.0, 500.0);
        vdur = std::max(vdur, 0.03);

        corpus::Syllable syl;
        syl.first = word.phones.size();
        const double c_start = static_cast<double>(audio.size()) / sr;
        append_noise(cdur, 0.1 * kBaseRms);
        const double v_start = static_cast<double>(audio.size()) / sr;
        auto samples = synth_vowel(f0, vq.formants, vdur,
                                   kBaseRms * std::pow(10.0, level_db / 20.0), sr,
                                   cue ? spec.tilt_delta : 0.0, spec.noise_level, &rng);
        audio.insert(audio.end(), samples.begin(), samples.end());
        const double v_end = static_cast<double>(audio.size()) / sr;
        word.phones.push_back({cons, {c_start, v_start}, false});
        word.phones.push_back({vq.symbol, {v_start, v_end}, true});
        syl.count = 2;
        syl.nucleus_index = syl.first + 1;
        word.syllables.push_back(syl);

        lex_syllables.push_back(std::string(s == stressed ? "'" : "") + cons + " " + vq.symbol);
      }
      word.interval = {word_start, static_cast<double>(audio.size()) / sr};
      lexicon << word.orthography << "\t" << lex_syllables[0] << " - " << lex_syllables[1] << "\n";

      const std::size_t word_index = utt.words.size();
      for (int s = 0; s < 2; ++s)
        out.labels[corpus::make_word_id(utt.id, word_index) + ":" + std::to_string(s)] =
            s == stressed ? Stress::stressed : Stress::unstressed;
      utt.words.push_back(std::move(word));
      append_noise(0.1, 1e-4);
    }
    append_noise(0.05, 1e-4);
    corpus::validate(utt, static_cast<double>(audio.size()) / sr);
    out.utterances.push_back(std::move(utt));
    out.audio.push_back(AudioSegment{std::move(audio), sr});
  }
  out.lexicon_tsv = lexicon.str();
  return out;
}

void write_corpus(const SynthCorpus& c, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "alignments");
  fs::create_directories(fs::path(dir) / "audio");
  for (std::size_t i = 0; i < c.utterances.size(); ++i) {
    const auto& utt = c.utterances[i];
    write_file((fs::path(dir) / "alignments" / (utt.id + ".json")).string(),
               corpus::serialize_alignment(utt));
    write_wav((fs::path(dir) / "audio" / utt.audio_path).string(), c.audio[i],
              WavEncoding::float32);
  }
  write_file((fs::path(dir) / "lexicon.tsv").string(), c.lexicon_tsv);
  write_file((fs::path(dir) / "inventory.json").string(),
             corpus::serialize_inventory(c.inventory));
  std::ostringstream labels;
  labels << "token_id,stress\n";
  for (const auto& [id, s] : c.labels) labels << id << "," << to_string(s) << "\n";
  write_file((fs::path(dir) / "labels.csv").string(), labels.str());
}

void synth_embeddings(const SynthCorpus& c, const EmbeddingSpec& spec,
                      const std::string& dir) {
  spec.timing.validate();
  const std::string code(to_string(c.language));
  const auto dim = static_cast<Eigen::Index>(spec.dim);

  auto unit = [&](Rng& rng) {
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.normal();
    return Eigen::VectorXd(v.normalized());
  };

  std::map<std::string, Eigen::VectorXd> directions, vowel_offsets;
  for (const auto& layer : spec.layers) {
    Rng shared(derive_seed(spec.seed, {"direction", layer}));
    Rng own(derive_seed(spec.seed, {"direction", layer, code}));
    Eigen::VectorXd d = unit(shared) + spec.language_specificity * unit(own);
    directions[layer] = d.normalized();
    vowel_offsets[layer] = 0.5 * unit(own);
  }

  for (std::size_t u = 0; u < c.utterances.size(); ++u) {
    const auto& utt = c.utterances[u];
    const double duration = c.audio[u].duration();
    const auto frames = static_cast<Eigen::Index>(
        std::floor((duration - spec.timing.window) / spec.timing.stride) + 1);
    std::vector<embed::LayerTensor> tensors;
    for (const auto& layer : spec.layers) {
      auto sep_it = spec.separation.find(layer);
      const double sep = sep_it == spec.separation.end() ? 1.0 : sep_it->second;
      Rng rng(derive_seed(spec.seed, {"frames", layer, utt.id}));
      embed::LayerTensor t;
      t.layer_name = layer;
      t.values.resize(frames, dim);
      for (Eigen::Index k = 0; k < frames; ++k) {
        for (Eigen::Index j = 0; j < dim; ++j) t.values(k, j) = rng.normal();
        const double centre = static_cast<double>(k) * spec.timing.stride + 0.5 * spec.timing.window;
        for (std::size_t w = 0; w < utt.words.size(); ++w) {
          const auto& word = utt.words[w];
          for (int s = 0; s < static_cast<int>(word.syllables.size()); ++s) {
            const auto& iv = word.phones[word.syllables[s].nucleus_index].interval;
            if (centre < iv.start || centre >= iv.end) continue;
            t.values.row(k) += vowel_offsets[layer].transpose();
            auto label = c.labels.find(corpus::make_word_id(utt.id, w) + ":" + std::to_string(s));
            if (label != c.labels.end() && label->second == Stress::stressed)
              t.values.row(k) += sep * directions[layer].transpose();
          }
        }
      }
      tensors.push_back(std::move(t));
    }
    embed::write_utterance(dir, utt.id, c.sample_rate, spec.timing, tensors);
  }
}

}  // namespace stressprobe::testkit
