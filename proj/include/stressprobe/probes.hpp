// include/stressprobe/probes.hpp

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

#ifndef STRESSPROBE_PROBES_HPP_
#define STRESSPROBE_PROBES_HPP_

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "stressprobe/common.hpp"

namespace stressprobe::probes {

// Feature names used throughout the pipeline, in report order.
inline constexpr std::array<std::string_view, 12> kFeatureOrder = {
    "duration", "intensity", "pitch", "formants", "spectral_tilt", "combined",
    "cv",       "cnn",       "tf5",   "tf11",     "tf17",          "tf23"};

enum class FeatureKind { scalar_acoustic, vector_acoustic, embedding };

FeatureKind feature_kind(std::string_view feature_name);
bool is_acoustic(std::string_view feature_name);
// Short axis label: dur, int, pit, for, st, cf, cv, cnn, 5, 11, 17, 23.
std::string_view short_label(std::string_view feature_name);
// Position in kFeatureOrder, or kFeatureOrder.size() when unknown.
std::size_t feature_rank(std::string_view feature_name);

struct Dataset {
  std::string feature_name;
  Language language = Language::nl;
  Eigen::MatrixXd X;            // n x d
  std::vector<int> y;           // 1 = stressed
  std::vector<std::string> token_ids;
  std::vector<std::string> word_ids;

  std::size_t size() const { return y.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(X.cols()); }
  Dataset subset(const std::vector<std::size_t>& rows) const;
  std::size_t count_label(int label) const;
  // Shape, finiteness and label checks.
  void validate() const;
};

enum class ProbeKind { density, discriminant, perceptron };

std::string_view to_string(ProbeKind k);
ProbeKind probe_kind_for(FeatureKind f);

struct Provenance {
  std::string feature_name;
  Language language = Language::nl;
  int fold_index = 0;
  std::uint64_t seed = 0;
};

struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& X);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

struct KernelDensity {
  std::vector<double> samples;
  double bandwidth = 1.0;
  double log_prior = 0.0;

  double log_density(double x) const;
};

struct DensityParams {
  KernelDensity classes[2];
};

struct DiscriminantParams {
  Standardizer standardizer;
  Eigen::VectorXd weights;
  double bias = 0.0;
};

struct PerceptronParams {
  Standardizer standardizer;
  Eigen::MatrixXd w1;  // d x hidden
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;  // hidden
  double b2 = 0.0;
  int epochs = 0;
  double final_loss = 0.0;
};

struct PerceptronConfig {
  int hidden_units = 100;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double l2 = 1e-4;
  int batch_size = 200;
  int max_epochs = 200;
  double tolerance = 1e-4;
  int patience = 10;
};

struct ProbeConfig {
  PerceptronConfig perceptron;
  double bandwidth_floor = 1e-6;
  double discriminant_ridge = 1e-6;  // times trace / d
};

struct Probe {
  ProbeKind kind = ProbeKind::density;
  Provenance provenance;
  std::size_t input_dim = 0;
  std::variant<DensityParams, DiscriminantParams, PerceptronParams> params;
};

// Silverman's rule: 0.9 * min(sd, IQR / 1.34) * n^(-1/5), floored.
double silverman_bandwidth(std::vector<double> samples, double floor = 1e-6);

Probe fit_probe(const Dataset& train, const Provenance& provenance,
                const ProbeConfig& cfg = {});
Probe fit_probe(const Dataset& train, FeatureKind kind,
                const Provenance& provenance, const ProbeConfig& cfg = {});

std::vector<int> probe_predict(const Probe& probe, const Eigen::MatrixXd& X);

struct ConfusionMatrix {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
};

ConfusionMatrix confusion(const std::vector<int>& truth,
                          const std::vector<int>& predicted);

// Matthews correlation; 0 when any marginal is empty.
double mcc(const ConfusionMatrix& c);

std::string serialize_probe(const Probe& probe);
Probe deserialize_probe(const std::string& text);

}  // namespace stressprobe::probes

#endif  // STRESSPROBE_PROBES_HPP_
