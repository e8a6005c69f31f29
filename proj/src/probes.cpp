// src/probes.cpp

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

#include "stressprobe/probes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "json.hpp"
#include "stressprobe/rng.hpp"

namespace stressprobe::probes {

using Eigen::MatrixXd;
using Eigen::VectorXd;

FeatureKind feature_kind(std::string_view name) {
  if (name == "duration" || name == "intensity" || name == "pitch" ||
      name == "formants")
    return FeatureKind::scalar_acoustic;
  if (name == "spectral_tilt" || name == "combined")
    return FeatureKind::vector_acoustic;
  if (name == "cv" || name == "cnn" || name == "cnn_raw" || name == "cnn_proj" ||
      (name.size() > 2 && name.substr(0, 2) == "tf"))
    return FeatureKind::embedding;
  throw ConfigError("unknown feature '" + std::string(name) + "'");
}

bool is_acoustic(std::string_view name) {
  return feature_kind(name) != FeatureKind::embedding;
}

std::string_view short_label(std::string_view name) {
  static constexpr std::array<std::string_view, 12> labels = {
      "dur", "int", "pit", "for", "st", "cf", "cv", "cnn", "5", "11", "17", "23"};
  std::size_t r = feature_rank(name);
  return r < labels.size() ? labels[r] : name;
}

std::size_t feature_rank(std::string_view name) {
  auto it = std::find(kFeatureOrder.begin(), kFeatureOrder.end(), name);
  return static_cast<std::size_t>(it - kFeatureOrder.begin());
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.feature_name = feature_name;
  out.language = language;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  out.y.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
    out.y.push_back(y[rows[i]]);
    out.token_ids.push_back(token_ids[rows[i]]);
    out.word_ids.push_back(word_ids[rows[i]]);
  }
  return out;
}

std::size_t Dataset::count_label(int label) const {
  return static_cast<std::size_t>(std::count(y.begin(), y.end(), label));
}

void Dataset::validate() const {
  const auto n = static_cast<std::size_t>(X.rows());
  if (y.size() != n || token_ids.size() != n || word_ids.size() != n)
    throw ContractError("dataset '" + feature_name + "': inconsistent row counts");
  if (!X.allFinite())
    throw ContractError("dataset '" + feature_name + "' contains undefined values");
  for (int v : y)
    if (v != 0 && v != 1) throw ContractError("labels must be 0 or 1");
}

std::string_view to_string(ProbeKind k) {
  switch (k) {
    case ProbeKind::density: return "density";
    case ProbeKind::discriminant: return "discriminant";
    case ProbeKind::perceptron: return "perceptron";
  }
  return "?";
}

ProbeKind probe_kind_for(FeatureKind f) {
  switch (f) {
    case FeatureKind::scalar_acoustic: return ProbeKind::density;
    case FeatureKind::vector_acoustic: return ProbeKind::discriminant;
    case FeatureKind::embedding: return ProbeKind::perceptron;
  }
  return ProbeKind::density;
}

Standardizer Standardizer::fit(const MatrixXd& X) {
  Standardizer s;
  const double n = static_cast<double>(X.rows());
  s.mean = X.colwise().mean().transpose();
  s.scale.resize(X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    double var = (X.col(c).array() - s.mean[c]).square().sum() / n;
    s.scale[c] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

MatrixXd Standardizer::apply(const MatrixXd& X) const {
  return (X.rowwise() - mean.transpose()).array().rowwise() /
         scale.transpose().array();
}

double KernelDensity::log_density(double x) const {
  double best = -std::numeric_limits<double>::infinity();
  for (double s : samples) {
    double z = (x - s) / bandwidth;
    best = std::max(best, -0.5 * z * z);
  }
  double acc = 0.0;
  for (double s : samples) {
    double z = (x - s) / bandwidth;
    acc += std::exp(-0.5 * z * z - best);
  }
  const double n = static_cast<double>(samples.size());
  return log_prior + best + std::log(acc) -
         std::log(n * bandwidth * std::sqrt(2.0 * std::numbers::pi));
}

namespace {

double quantile_sorted(const std::vector<double>& v, double q) {
  double pos = q * static_cast<double>(v.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return v[lo] + (v[hi] - v[lo]) * frac;
}

void require_both_classes(const Dataset& d) {
  if (d.size() == 0) throw ContractError("cannot fit a probe on an empty dataset");
  if (d.count_label(0) == 0 || d.count_label(1) == 0)
    throw ContractError("training set for '" + d.feature_name +
                        "' contains a single class");
}

DensityParams fit_density(const Dataset& d, const ProbeConfig& cfg) {
  if (d.dim() != 1)
    throw ContractError("density probes take one-dimensional features");
  DensityParams p;
  const double n = static_cast<double>(d.size());
  for (int c = 0; c < 2; ++c) {
    auto& k = p.classes[c];
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d.y[i] == c) k.samples.push_back(d.X(static_cast<Eigen::Index>(i), 0));
    k.bandwidth = silverman_bandwidth(k.samples, cfg.bandwidth_floor);
    k.log_prior = std::log(static_cast<double>(k.samples.size()) / n);
  }
  return p;
}

DiscriminantParams fit_discriminant(const Dataset& d, const ProbeConfig& cfg) {
  DiscriminantParams p;
  p.standardizer = Standardizer::fit(d.X);
  MatrixXd Z = p.standardizer.apply(d.X);
  const Eigen::Index dim = Z.cols();
  VectorXd mu[2] = {VectorXd::Zero(dim), VectorXd::Zero(dim)};
  double count[2] = {0, 0};
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    int c = d.y[static_cast<std::size_t>(i)];
    mu[c] += Z.row(i).transpose();
    count[c] += 1;
  }
  mu[0] /= count[0];
  mu[1] /= count[1];
  MatrixXd S = MatrixXd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    VectorXd r = Z.row(i).transpose() - mu[d.y[static_cast<std::size_t>(i)]];
    S.noalias() += r * r.transpose();
  }
  double denom = Z.rows() > 2 ? static_cast<double>(Z.rows() - 2)
                              : static_cast<double>(Z.rows());
  S /= denom;
  double tr = S.trace();
  double ridge = cfg.discriminant_ridge * (tr > 0 ? tr / static_cast<double>(dim) : 1.0);
  S.diagonal().array() += ridge;
  p.weights = S.ldlt().solve(mu[1] - mu[0]);
  p.bias = -p.weights.dot(0.5 * (mu[0] + mu[1])) + std::log(count[1] / count[0]);
  return p;
}

double log_loss_term(double z, int y) {
  // -log(sigmoid(z)) for y=1, -log(1 - sigmoid(z)) for y=0.
  double s = y == 1 ? -z : z;
  return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

PerceptronParams fit_perceptron(const Dataset& d, std::uint64_t seed,
                                const PerceptronConfig& cfg) {
  PerceptronParams p;
  p.standardizer = Standardizer::fit(d.X);
  const MatrixXd Z = p.standardizer.apply(d.X);
  const Eigen::Index n = Z.rows(), dim = Z.cols(), h = cfg.hidden_units;
  VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = d.y[static_cast<std::size_t>(i)];

  Rng rng(seed);
  auto init = [&](Eigen::Index rows, Eigen::Index cols, double bound) {
    MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(-bound, bound);
    return m;
  };
  double bound1 = std::sqrt(6.0 / static_cast<double>(dim + h));
  double bound2 = std::sqrt(2.0 / static_cast<double>(h + 1));
  p.w1 = init(dim, h, bound1);
  p.b1 = init(h, 1, bound1).col(0);
  p.w2 = init(h, 1, bound2).col(0);
  p.b2 = rng.uniform(-bound2, bound2);

  // Adam state.
  MatrixXd m_w1 = MatrixXd::Zero(dim, h), v_w1 = MatrixXd::Zero(dim, h);
  VectorXd m_b1 = VectorXd::Zero(h), v_b1 = VectorXd::Zero(h);
  VectorXd m_w2 = VectorXd::Zero(h), v_w2 = VectorXd::Zero(h);
  double m_b2 = 0.0, v_b2 = 0.0;
  long step = 0;

  const Eigen::Index batch = std::clamp<Eigen::Index>(cfg.batch_size, 1, n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  double best_loss = std::numeric_limits<double>::infinity();
  int no_improvement = 0;

  MatrixXd xb, hidden, delta1;
  VectorXd yb, z, delta2;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index bsz = std::min(batch, n - start);
      xb.resize(bsz, dim);
      yb.resize(bsz);
      for (Eigen::Index i = 0; i < bsz; ++i) {
        xb.row(i) = Z.row(order[static_cast<std::size_t>(start + i)]);
        yb[i] = y[order[static_cast<std::size_t>(start + i)]];
      }
      hidden.noalias() = xb * p.w1;
      hidden.rowwise() += p.b1.transpose();
      hidden = hidden.cwiseMax(0.0);
      z.noalias() = hidden * p.w2;
      z.array() += p.b2;

      double loss = 0.0;
      delta2.resize(bsz);
      for (Eigen::Index i = 0; i < bsz; ++i) {
        int yi = static_cast<int>(yb[i]);
        loss += log_loss_term(z[i], yi);
        delta2[i] = 1.0 / (1.0 + std::exp(-z[i])) - yb[i];
      }
      const double bs = static_cast<double>(bsz);
      loss = loss / bs +
             0.5 * cfg.l2 * (p.w1.squaredNorm() + p.w2.squaredNorm()) / bs;
      epoch_loss += loss * bs;

      VectorXd g_w2 = (hidden.transpose() * delta2 + cfg.l2 * p.w2) / bs;
      double g_b2 = delta2.sum() / bs;
      delta1.noalias() = delta2 * p.w2.transpose();
      delta1.array() *= (hidden.array() > 0.0).cast<double>();
      MatrixXd g_w1 = (xb.transpose() * delta1 + cfg.l2 * p.w1) / bs;
      VectorXd g_b1 = delta1.colwise().sum().transpose() / bs;

      ++step;
      const double lr = cfg.learning_rate *
                        std::sqrt(1.0 - std::pow(cfg.beta2, static_cast<double>(step))) /
                        (1.0 - std::pow(cfg.beta1, static_cast<double>(step)));
      auto adam = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
        param.array() -= lr * m.array() / (v.array().sqrt() + cfg.epsilon);
      };
      adam(p.w1, m_w1, v_w1, g_w1);
      adam(p.b1, m_b1, v_b1, g_b1);
      adam(p.w2, m_w2, v_w2, g_w2);
      m_b2 = cfg.beta1 * m_b2 + (1.0 - cfg.beta1) * g_b2;
      v_b2 = cfg.beta2 * v_b2 + (1.0 - cfg.beta2) * g_b2 * g_b2;
      p.b2 -= lr * m_b2 / (std::sqrt(v_b2) + cfg.epsilon);
    }
    epoch_loss /= static_cast<double>(n);
    p.epochs = epoch + 1;
    p.final_loss = epoch_loss;
    if (epoch_loss > best_loss - cfg.tolerance) {
      ++no_improvement;
    } else {
      no_improvement = 0;
    }
    best_loss = std::min(best_loss, epoch_loss);
    if (no_improvement > cfg.patience) break;
  }
  return p;
}

}  // namespace

double silverman_bandwidth(std::vector<double> s, double floor) {
  const std::size_t n = s.size();
  if (n < 2) return floor;
  std::sort(s.begin(), s.end());
  double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : s) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / static_cast<double>(n - 1));
  double iqr = (quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25)) / 1.34;
  double spread = std::min(sd, iqr);
  if (!(spread > 0.0)) spread = std::max(sd, iqr);
  return std::max(0.9 * spread * std::pow(static_cast<double>(n), -0.2), floor);
}

Probe fit_probe(const Dataset& train, const Provenance& provenance,
                const ProbeConfig& cfg) {
  return fit_probe(train, feature_kind(train.feature_name), provenance, cfg);
}

Probe fit_probe(const Dataset& train, FeatureKind kind,
                const Provenance& provenance, const ProbeConfig& cfg) {
  train.validate();
  require_both_classes(train);
  Probe probe;
  probe.kind = probe_kind_for(kind);
  probe.provenance = provenance;
  probe.input_dim = train.dim();
  switch (probe.kind) {
    case ProbeKind::density:
      probe.params = fit_density(train, cfg);
      break;
    case ProbeKind::discriminant:
      probe.params = fit_discriminant(train, cfg);
      break;
    case ProbeKind::perceptron:
      probe.params = fit_perceptron(train, provenance.seed, cfg.perceptron);
      break;
  }
  return probe;
}

std::vector<int> probe_predict(const Probe& probe, const MatrixXd& X) {
  if (static_cast<std::size_t>(X.cols()) != probe.input_dim)
    throw ContractError("probe expects " + std::to_string(probe.input_dim) +
                        "-dimensional input, got " + std::to_string(X.cols()));
  std::vector<int> out(static_cast<std::size_t>(X.rows()), 0);
  if (const auto* d = std::get_if<DensityParams>(&probe.params)) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      double x = X(i, 0);
      // Equal posteriors fall to the unstressed class.
      out[static_cast<std::size_t>(i)] =
          d->classes[1].log_density(x) > d->classes[0].log_density(x) ? 1 : 0;
    }
  } else if (const auto* l = std::get_if<DiscriminantParams>(&probe.params)) {
    VectorXd score = l->standardizer.apply(X) * l->weights;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      out[static_cast<std::size_t>(i)] = score[i] + l->bias > 0.0 ? 1 : 0;
  } else {
    const auto& m = std::get<PerceptronParams>(probe.params);
    MatrixXd hidden = m.standardizer.apply(X) * m.w1;
    hidden.rowwise() += m.b1.transpose();
    hidden = hidden.cwiseMax(0.0);
    VectorXd z = hidden * m.w2;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      out[static_cast<std::size_t>(i)] = z[i] + m.b2 > 0.0 ? 1 : 0;
  }
  return out;
}

ConfusionMatrix confusion(const std::vector<int>& truth,
                          const std::vector<int>& predicted) {
  if (truth.size() != predicted.size())
    throw ContractError("confusion: label vectors differ in length");
  ConfusionMatrix c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 1) {
      predicted[i] == 1 ? ++c.tp : ++c.fn;
    } else {
      predicted[i] == 1 ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

double mcc(const ConfusionMatrix& c) {
  const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
  const double a = tp + fp, b = tp + fn, d = tn + fp, e = tn + fn;
  if (a == 0 || b == 0 || d == 0 || e == 0) return 0.0;
  // One square root keeps perfect and inverted predictors at exactly +-1.
  double v = (tp * tn - fp * fn) / std::sqrt(a * b * d * e);
  return std::clamp(v, -1.0, 1.0);
}

// --- serialization ---

namespace {

using nlohmann::json;

json to_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VectorXd vec_from(const json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(VectorXd(m.row(r).transpose())));
  return rows;
}

MatrixXd mat_from(const json& j, Eigen::Index cols) {
  MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) m.row(static_cast<Eigen::Index>(r)) = vec_from(j[r]).transpose();
  return m;
}

json to_json(const Standardizer& s) { return {{"mean", to_json(s.mean)}, {"scale", to_json(s.scale)}}; }

Standardizer standardizer_from(const json& j) { return {vec_from(j.at("mean")), vec_from(j.at("scale"))}; }

}  // namespace

std::string serialize_probe(const Probe& probe) {
  json doc;
  doc["format"] = "stressprobe-probe";
  doc["version"] = 1;
  doc["kind"] = std::string(to_string(probe.kind));
  doc["input_dim"] = probe.input_dim;
  doc["provenance"] = {{"feature", probe.provenance.feature_name},
                       {"language", std::string(to_string(probe.provenance.language))},
                       {"fold", probe.provenance.fold_index},
                       {"seed", probe.provenance.seed}};
  json params;
  if (const auto* d = std::get_if<DensityParams>(&probe.params)) {
    params["classes"] = json::array();
    for (const auto& k : d->classes)
      params["classes"].push_back(
          {{"samples", k.samples}, {"bandwidth", k.bandwidth}, {"log_prior", k.log_prior}});
  } else if (const auto* l = std::get_if<DiscriminantParams>(&probe.params)) {
    params = {{"standardizer", to_json(l->standardizer)},
              {"weights", to_json(l->weights)},
              {"bias", l->bias}};
  } else {
    const auto& m = std::get<PerceptronParams>(probe.params);
    params = {{"standardizer", to_json(m.standardizer)},
              {"w1", to_json(m.w1)},
              {"b1", to_json(m.b1)},
              {"w2", to_json(m.w2)},
              {"b2", m.b2},
              {"epochs", m.epochs},
              {"final_loss", m.final_loss}};
  }
  doc["params"] = std::move(params);
  return doc.dump();
}

Probe deserialize_probe(const std::string& text) {
  try {
    json doc = json::parse(text);
    if (doc.at("format") != "stressprobe-probe")
      throw ParseError("not a serialized probe");
    if (doc.at("version").get<int>() != 1)
      throw ParseError("unsupported probe version " + doc.at("version").dump());
    Probe p;
    const std::string kind = doc.at("kind").get<std::string>();
    p.input_dim = doc.at("input_dim").get<std::size_t>();
    const auto& prov = doc.at("provenance");
    p.provenance.feature_name = prov.at("feature").get<std::string>();
    p.provenance.language = parse_language(prov.at("language").get<std::string>());
    p.provenance.fold_index = prov.at("fold").get<int>();
    p.provenance.seed = prov.at("seed").get<std::uint64_t>();
    const auto& params = doc.at("params");
    if (kind == "density") {
      p.kind = ProbeKind::density;
      DensityParams d;
      for (int c = 0; c < 2; ++c) {
        const auto& k = params.at("classes").at(static_cast<std::size_t>(c));
        d.classes[c].samples = k.at("samples").get<std::vector<double>>();
        d.classes[c].bandwidth = k.at("bandwidth").get<double>();
        d.classes[c].log_prior = k.at("log_prior").get<double>();
      }
      p.params = std::move(d);
    } else if (kind == "discriminant") {
      p.kind = ProbeKind::discriminant;
      p.params = DiscriminantParams{standardizer_from(params.at("standardizer")),
                                    vec_from(params.at("weights")),
                                    params.at("bias").get<double>()};
    } else if (kind == "perceptron") {
      p.kind = ProbeKind::perceptron;
      PerceptronParams m;
      m.standardizer = standardizer_from(params.at("standardizer"));
      m.w1 = mat_from(params.at("w1"), static_cast<Eigen::Index>(params.at("b1").size()));
      m.b1 = vec_from(params.at("b1"));
      m.w2 = vec_from(params.at("w2"));
      m.b2 = params.at("b2").get<double>();
      m.epochs = params.at("epochs").get<int>();
      m.final_loss = params.at("final_loss").get<double>();
      p.params = std::move(m);
    } else {
      throw ParseError("unknown probe kind '" + kind + "'");
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("probe blob: ") + e.what());
  }
}

}  // namespace stressprobe::probes
