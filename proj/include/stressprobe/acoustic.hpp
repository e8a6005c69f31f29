// include/stressprobe/acoustic.hpp

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

#ifndef STRESSPROBE_ACOUSTIC_HPP_
#define STRESSPROBE_ACOUSTIC_HPP_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stressprobe/common.hpp"
#include "stressprobe/corpus.hpp"

namespace stressprobe::acoustic {

// Reference mean-square level of the intensity scale (0 dB).
inline constexpr double kIntensityReference = 4e-10;

inline constexpr std::array<double, 5> kTiltBandEdges = {0.0, 500.0, 1000.0,
                                                         2000.0, 4000.0};

struct PitchConfig {
  double frame_s = 0.040;
  double hop_s = 0.010;
  double fmin = 50.0;
  double fmax = 600.0;
  // A frame is voiced when its normalized difference dips below this.
  double threshold = 0.3;
};

struct SpectrumConfig {
  double window_s = 0.025;
  double hop_s = 0.010;
};

struct FormantConfig {
  double preemphasis = 0.97;
  double window_s = 0.025;
  double hop_s = 0.010;
  int order = 0;  // 0 -> round(sr / 1000) + 2
  double max_bandwidth = 400.0;
  double min_frequency = 90.0;
};

struct Formants {
  double f1 = 0.0;
  double f2 = 0.0;
};

using TiltBands = std::array<double, 4>;

double duration(const corpus::VowelToken& token);

// 10 * log10(mean(x^2) / 4e-10). Throws UndefinedFeatureError on silence.
double intensity_db(std::span<const double> x);

// Mean F0 over voiced frames; nullopt when no frame is voiced.
std::optional<double> mean_pitch(std::span<const double> x, int sample_rate,
                                 const PitchConfig& cfg = {});

// Intensities (dB, same reference as intensity_db) of the 0-500, 500-1000,
// 1000-2000 and 2000-4000 Hz bands. A bin on a band edge belongs to the lower
// band.
TiltBands spectral_tilt(std::span<const double> x, int sample_rate,
                        const SpectrumConfig& cfg = {});

// Linear band powers behind spectral_tilt (mean-square units).
std::array<double, 4> band_powers(std::span<const double> x, int sample_rate,
                                  const SpectrumConfig& cfg = {});

// Mean of per-frame (F1, F2) estimates; nullopt if no frame yields two
// formant candidates.
std::optional<Formants> measure_formants(std::span<const double> x,
                                         int sample_rate,
                                         const FormantConfig& cfg = {});

struct LanguageFormantStats {
  Language language = Language::nl;
  double mean_f1 = 0.0;
  double mean_f2 = 0.0;
  std::size_t token_count = 0;
};

// Mergeable running sums so partial statistics combine deterministically.
class FormantAccumulator {
 public:
  void add(const Formants& f);
  void merge(const FormantAccumulator& other);
  std::size_t count() const { return count_; }
  LanguageFormantStats finalize(Language language) const;

 private:
  double sum_f1_ = 0.0;
  double sum_f2_ = 0.0;
  std::size_t count_ = 0;
};

LanguageFormantStats formant_stats(std::span<const Formants> formants,
                                   Language language);

double formant_peripherality(double f1, double f2,
                             const LanguageFormantStats& stats);

struct AcousticFeatures {
  double duration = 0.0;
  std::optional<double> intensity;
  std::optional<double> pitch;
  std::optional<TiltBands> tilt;
  std::optional<Formants> formants;
  std::optional<double> peripherality;
};

inline constexpr std::size_t kCombinedDim = 8;

// [duration, intensity, pitch, tilt1..tilt4, peripherality]. Throws
// UndefinedFeatureError naming the first missing constituent.
std::array<double, kCombinedDim> combined(const AcousticFeatures& f);

struct FeatureConfig {
  PitchConfig pitch;
  SpectrumConfig spectrum;
  FormantConfig formant;
};

// Everything except peripherality, which needs the language-wide formant
// means and is filled in afterwards.
AcousticFeatures measure_token(const corpus::VowelToken& token,
                               std::span<const double> samples, int sample_rate,
                               const FeatureConfig& cfg = {});

struct FeatureRow {
  std::string token_id;
  Language language = Language::nl;
  Stress stress = Stress::unknown;
  AcousticFeatures features;
};

std::string feature_table_csv(const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> parse_feature_table(const std::string& csv_text);

}  // namespace stressprobe::acoustic

#endif  // STRESSPROBE_ACOUSTIC_HPP_
