// src/acoustic.cpp

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

#include "stressprobe/acoustic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/Polynomials>

namespace stressprobe::acoustic {

namespace {

std::size_t samples_for(double seconds, int sr) {
  return static_cast<std::size_t>(std::llround(seconds * sr));
}

// Frame start offsets; a signal shorter than one frame yields a single
// frame covering all of it.
std::vector<std::size_t> frame_starts(std::size_t n, std::size_t frame,
                                      std::size_t hop) {
  std::vector<std::size_t> out;
  if (n < frame) {
    out.push_back(0);
    return out;
  }
  for (std::size_t s = 0; s + frame <= n; s += hop) out.push_back(s);
  return out;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Cumulative-mean-normalized difference pitch estimate for one frame.
constexpr double kDipTolerance = 0.1;

std::optional<double> frame_pitch(std::span<const double> f, int sr,
                                  const PitchConfig& cfg) {
  std::size_t tau_min = static_cast<std::size_t>(std::floor(sr / cfg.fmax));
  std::size_t tau_max = static_cast<std::size_t>(std::ceil(sr / cfg.fmin));
  tau_min = std::max<std::size_t>(tau_min, 2);
  tau_max = std::min(tau_max, f.size() / 2);
  if (tau_max <= tau_min + 1) return std::nullopt;
  const std::size_t window = f.size() - tau_max;

  std::vector<double> d(tau_max + 1, 0.0);
  for (std::size_t tau = 1; tau <= tau_max; ++tau) {
    double acc = 0.0;
    for (std::size_t j = 0; j < window; ++j) {
      double diff = f[j] - f[j + tau];
      acc += diff * diff;
    }
    d[tau] = acc;
  }
  std::vector<double> cmnd(tau_max + 1, 1.0);
  double running = 0.0;
  for (std::size_t tau = 1; tau <= tau_max; ++tau) {
    running += d[tau];
    if (running <= 0.0) return std::nullopt;  // digital silence
    cmnd[tau] = d[tau] * static_cast<double>(tau) / running;
  }

  // Voiced when the deepest dip clears the threshold. The period is the first
  // dip close to that depth; shallower early dips are formant ringing.
  const double deepest = *std::min_element(cmnd.begin() + static_cast<long>(tau_min),
                                           cmnd.begin() + static_cast<long>(tau_max));
  if (deepest >= cfg.threshold) return std::nullopt;
  const double accept = std::min(cfg.threshold, deepest + kDipTolerance);
  std::size_t tau = tau_min;
  while (tau < tau_max && cmnd[tau] >= accept) ++tau;
  while (tau + 1 < tau_max && cmnd[tau + 1] < cmnd[tau]) ++tau;

  double refined = static_cast<double>(tau);
  if (tau > 1 && tau + 1 <= tau_max) {
    double a = cmnd[tau - 1], b = cmnd[tau], c = cmnd[tau + 1];
    double denom = a - 2.0 * b + c;
    if (denom > 0.0) refined += 0.5 * (a - c) / denom;
  }
  double f0 = sr / refined;
  if (f0 < cfg.fmin || f0 > cfg.fmax) return std::nullopt;
  return f0;
}

// Coefficients a[1..p] of A(z) = 1 + sum a_k z^-k via Levinson-Durbin.
std::optional<std::vector<double>> lpc(std::span<const double> x, int order) {
  std::vector<double> r(order + 1, 0.0);
  for (int lag = 0; lag <= order; ++lag) {
    double acc = 0.0;
    for (std::size_t i = static_cast<std::size_t>(lag); i < x.size(); ++i)
      acc += x[i] * x[i - lag];
    r[lag] = acc;
  }
  if (r[0] <= 0.0) return std::nullopt;
  r[0] *= 1.0 + 1e-9;
  std::vector<double> a(order + 1, 0.0), prev(order + 1, 0.0);
  a[0] = 1.0;
  double err = r[0];
  for (int i = 1; i <= order; ++i) {
    double acc = r[i];
    for (int j = 1; j < i; ++j) acc += a[j] * r[i - j];
    double k = -acc / err;
    prev = a;
    for (int j = 1; j < i; ++j) a[j] = prev[j] + k * prev[i - j];
    a[i] = k;
    err *= 1.0 - k * k;
    if (err <= 0.0) return std::nullopt;
  }
  return a;
}

}  // namespace

double duration(const corpus::VowelToken& token) {
  return token.interval.end - token.interval.start;
}

double intensity_db(std::span<const double> x) {
  if (x.empty()) throw ContractError("intensity_db of an empty signal");
  double acc = 0.0;
  for (double v : x) acc += v * v;
  double ms = acc / static_cast<double>(x.size());
  if (!(ms > 0.0))
    throw UndefinedFeatureError("intensity undefined for an all-zero signal");
  return 10.0 * std::log10(ms / kIntensityReference);
}

std::optional<double> mean_pitch(std::span<const double> x, int sr,
                                 const PitchConfig& cfg) {
  if (x.empty()) throw ContractError("mean_pitch of an empty signal");
  const std::size_t frame = samples_for(cfg.frame_s, sr);
  const std::size_t hop = std::max<std::size_t>(1, samples_for(cfg.hop_s, sr));
  double sum = 0.0;
  std::size_t voiced = 0;
  for (std::size_t s : frame_starts(x.size(), frame, hop)) {
    auto f = x.subspan(s, std::min(frame, x.size() - s));
    if (auto f0 = frame_pitch(f, sr, cfg)) {
      sum += *f0;
      ++voiced;
    }
  }
  if (voiced == 0) return std::nullopt;
  return sum / static_cast<double>(voiced);
}

std::array<double, 4> band_powers(std::span<const double> x, int sr,
                                  const SpectrumConfig& cfg) {
  if (sr < 8000)
    throw UndefinedFeatureError("spectral bands up to 4 kHz need a sample "
                                "rate of at least 8 kHz, got " +
                                std::to_string(sr));
  const std::size_t window = samples_for(cfg.window_s, sr);
  const std::size_t hop = std::max<std::size_t>(1, samples_for(cfg.hop_s, sr));
  if (x.size() < 16)
    throw ContractError("signal too short for spectral analysis");
  const std::size_t len = std::min(window, x.size());
  const std::size_t nfft = next_pow2(len);

  std::vector<double> w(len);
  double wsum = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(len - 1));
    wsum += w[i] * w[i];
  }

  std::vector<int> band_of(nfft / 2 + 1, -1);
  for (std::size_t k = 0; k <= nfft / 2; ++k) {
    double f = static_cast<double>(k) * sr / static_cast<double>(nfft);
    for (int b = 0; b < 4; ++b) {
      bool inside = b == 0 ? f <= kTiltBandEdges[1]
                           : f > kTiltBandEdges[b] && f <= kTiltBandEdges[b + 1];
      if (inside) {
        band_of[k] = b;
        break;
      }
    }
  }

  Eigen::FFT<double> fft;
  std::vector<double> buf(nfft);
  std::vector<std::complex<double>> spec;
  std::array<double, 4> acc{};
  std::size_t frames = 0;
  for (std::size_t s : frame_starts(x.size(), len, hop)) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (std::size_t i = 0; i < len; ++i) buf[i] = x[s + i] * w[i];
    fft.fwd(spec, buf);
    for (std::size_t k = 0; k <= nfft / 2; ++k) {
      if (band_of[k] < 0) continue;
      double weight = (k == 0 || k == nfft / 2) ? 1.0 : 2.0;
      acc[band_of[k]] += weight * std::norm(spec[k]);
    }
    ++frames;
  }
  const double norm = static_cast<double>(nfft) * wsum * static_cast<double>(frames);
  for (double& a : acc) a /= norm;
  return acc;
}

TiltBands spectral_tilt(std::span<const double> x, int sr,
                        const SpectrumConfig& cfg) {
  auto p = band_powers(x, sr, cfg);
  TiltBands out;
  for (int b = 0; b < 4; ++b) {
    if (!(p[b] > 0.0))
      throw UndefinedFeatureError("no energy in spectral band " +
                                  std::to_string(b + 1));
    out[b] = 10.0 * std::log10(p[b] / kIntensityReference);
  }
  return out;
}

std::optional<Formants> measure_formants(std::span<const double> x, int sr,
                                         const FormantConfig& cfg) {
  const int order = cfg.order > 0 ? cfg.order
                                  : static_cast<int>(std::lround(sr / 1000.0)) + 2;
  if (x.size() < static_cast<std::size_t>(2 * order + 2)) return std::nullopt;

  std::vector<double> y(x.size());
  y[0] = x[0];
  for (std::size_t i = 1; i < x.size(); ++i) y[i] = x[i] - cfg.preemphasis * x[i - 1];

  const std::size_t window = std::min(samples_for(cfg.window_s, sr), y.size());
  const std::size_t hop = std::max<std::size_t>(1, samples_for(cfg.hop_s, sr));
  std::vector<double> ham(window);
  for (std::size_t i = 0; i < window; ++i)
    ham[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(window - 1));

  double sum_f1 = 0.0, sum_f2 = 0.0;
  std::size_t valid = 0;
  std::vector<double> frame(window);
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
  for (std::size_t s : frame_starts(y.size(), window, hop)) {
    for (std::size_t i = 0; i < window; ++i) frame[i] = y[s + i] * ham[i];
    auto a = lpc(frame, order);
    if (!a) continue;
    // Eigen wants coefficients in increasing degree: z^p + a1 z^(p-1) + ...
    Eigen::VectorXd poly(order + 1);
    for (int k = 0; k <= order; ++k) poly[k] = (*a)[order - k];
    solver.compute(poly);
    std::vector<double> freqs;
    for (const auto& z : solver.roots()) {
      if (z.imag() <= 0.0) continue;
      double f = std::atan2(z.imag(), z.real()) * sr / (2.0 * std::numbers::pi);
      double bw = -std::log(std::abs(z)) * sr / std::numbers::pi;
      if (f > cfg.min_frequency && bw < cfg.max_bandwidth) freqs.push_back(f);
    }
    if (freqs.size() < 2) continue;
    std::sort(freqs.begin(), freqs.end());
    sum_f1 += freqs[0];
    sum_f2 += freqs[1];
    ++valid;
  }
  if (valid == 0) return std::nullopt;
  return Formants{sum_f1 / static_cast<double>(valid),
                  sum_f2 / static_cast<double>(valid)};
}

void FormantAccumulator::add(const Formants& f) {
  sum_f1_ += f.f1;
  sum_f2_ += f.f2;
  ++count_;
}

void FormantAccumulator::merge(const FormantAccumulator& other) {
  sum_f1_ += other.sum_f1_;
  sum_f2_ += other.sum_f2_;
  count_ += other.count_;
}

LanguageFormantStats FormantAccumulator::finalize(Language language) const {
  if (count_ == 0)
    throw ContractError("formant statistics need at least one token with "
                        "measured formants");
  return {language, sum_f1_ / static_cast<double>(count_),
          sum_f2_ / static_cast<double>(count_), count_};
}

LanguageFormantStats formant_stats(std::span<const Formants> formants,
                                   Language language) {
  FormantAccumulator acc;
  for (const auto& f : formants) acc.add(f);
  return acc.finalize(language);
}

double formant_peripherality(double f1, double f2,
                             const LanguageFormantStats& stats) {
  return std::hypot(f1 - stats.mean_f1, f2 - stats.mean_f2);
}

std::array<double, kCombinedDim> combined(const AcousticFeatures& f) {
  auto need = [](bool ok, const char* what) {
    if (!ok)
      throw UndefinedFeatureError(std::string("combined vector undefined: ") +
                                  what + " is missing");
  };
  need(f.intensity.has_value(), "intensity");
  need(f.pitch.has_value(), "pitch");
  need(f.tilt.has_value(), "spectral tilt");
  need(f.peripherality.has_value(), "formant peripherality");
  const auto& t = *f.tilt;
  return {f.duration, *f.intensity, *f.pitch, t[0], t[1], t[2], t[3],
          *f.peripherality};
}

AcousticFeatures measure_token(const corpus::VowelToken& token,
                               std::span<const double> samples, int sr,
                               const FeatureConfig& cfg) {
  AcousticFeatures out;
  out.duration = duration(token);
  if (samples.empty()) return out;
  try {
    out.intensity = intensity_db(samples);
  } catch (const UndefinedFeatureError&) {
  }
  out.pitch = mean_pitch(samples, sr, cfg.pitch);
  try {
    if (samples.size() >= 16) out.tilt = spectral_tilt(samples, sr, cfg.spectrum);
  } catch (const UndefinedFeatureError&) {
  }
  out.formants = measure_formants(samples, sr, cfg.formant);
  return out;
}

namespace {

constexpr const char* kFeatureHeader =
    "token_id,language,stress,duration,intensity,pitch,tilt1,tilt2,tilt3,"
    "tilt4,f1,f2,peripherality";

std::optional<double> parse_cell(const std::string& s) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw ParseError("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("bad number '" + s + "'");
  }
}

}  // namespace

std::string feature_table_csv(const std::vector<FeatureRow>& rows) {
  std::ostringstream out;
  out << kFeatureHeader << "\n";
  for (const auto& r : rows) {
    const auto& f = r.features;
    out << r.token_id << "," << to_string(r.language) << ","
        << to_string(r.stress) << "," << format_double(f.duration) << ","
        << format_optional(f.intensity) << "," << format_optional(f.pitch);
    for (int b = 0; b < 4; ++b)
      out << "," << (f.tilt ? format_double((*f.tilt)[b]) : "");
    out << "," << (f.formants ? format_double(f.formants->f1) : "") << ","
        << (f.formants ? format_double(f.formants->f2) : "") << ","
        << format_optional(f.peripherality) << "\n";
  }
  return out.str();
}

std::vector<FeatureRow> parse_feature_table(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != kFeatureHeader)
    throw ParseError("feature table: unexpected header");
  std::vector<FeatureRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto c = split(trim(line), ',');
    if (c.size() != 13)
      throw ParseError("feature table line " + std::to_string(lineno) +
                       ": expected 13 columns");
    FeatureRow r;
    r.token_id = c[0];
    r.language = parse_language(c[1]);
    r.stress = parse_stress(c[2]);
    auto dur = parse_cell(c[3]);
    if (!dur) throw ParseError("feature table line " + std::to_string(lineno) +
                               ": duration is required");
    r.features.duration = *dur;
    r.features.intensity = parse_cell(c[4]);
    r.features.pitch = parse_cell(c[5]);
    std::array<std::optional<double>, 4> t{parse_cell(c[6]), parse_cell(c[7]),
                                           parse_cell(c[8]), parse_cell(c[9])};
    if (t[0] && t[1] && t[2] && t[3]) r.features.tilt = TiltBands{*t[0], *t[1], *t[2], *t[3]};
    auto f1 = parse_cell(c[10]), f2 = parse_cell(c[11]);
    if (f1 && f2) r.features.formants = Formants{*f1, *f2};
    r.features.peripherality = parse_cell(c[12]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace stressprobe::acoustic
