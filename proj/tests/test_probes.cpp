// tests/test_probes.cpp

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

#include "oracles.hpp"
#include "stressprobe/probes.hpp"
#include "stressprobe/rng.hpp"

using namespace stressprobe;
using namespace stressprobe::probes;

namespace {

// Two Gaussian blobs at +-shift along every axis.
Dataset blobs(const std::string& feature, std::size_t n, std::size_t dim, double shift,
              std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.feature_name = feature;
  d.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    int label = static_cast<int>(i % 2);
    d.y.push_back(label);
    d.token_ids.push_back("t" + std::to_string(i));
    d.word_ids.push_back("w" + std::to_string(i / 2));
    for (std::size_t c = 0; c < dim; ++c)
      d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          rng.normal() + (label ? shift : -shift);
  }
  return d;
}

double score(const Probe& p, const Dataset& d) {
  return mcc(confusion(d.y, probe_predict(p, d.X)));
}

}  // namespace

TEST_CASE("probe family follows the feature") {
  CHECK(probe_kind_for(feature_kind("duration")) == ProbeKind::density);
  CHECK(probe_kind_for(feature_kind("formants")) == ProbeKind::density);
  CHECK(probe_kind_for(feature_kind("spectral_tilt")) == ProbeKind::discriminant);
  CHECK(probe_kind_for(feature_kind("combined")) == ProbeKind::discriminant);
  CHECK(probe_kind_for(feature_kind("tf11")) == ProbeKind::perceptron);
  CHECK_THROWS_AS(feature_kind("loudness"), ConfigError);
  CHECK(short_label("tf17") == "17");
  CHECK(feature_rank("cv") == 6);
}

TEST_CASE("mcc worked examples") {
  CHECK(mcc({10, 0, 10, 0}) == 1.0);
  CHECK(mcc({0, 10, 0, 10}) == -1.0);
  ConfusionMatrix c;
  c.tp = 6;
  c.fp = 2;
  c.tn = 7;
  c.fn = 5;
  CHECK(mcc(c) == doctest::Approx(32.0 / std::sqrt(9504.0)).epsilon(1e-12));
  CHECK(mcc(c) == doctest::Approx(0.3283).epsilon(1e-4));
  // Constant predictors hit the marginal-zero rule.
  CHECK(mcc({5, 5, 0, 0}) == 0.0);
  CHECK(mcc({0, 0, 5, 5}) == 0.0);
}

TEST_CASE("mcc matches the direct formula and swap symmetry") {
  Rng rng(77);
  for (int i = 0; i < 2000; ++i) {
    ConfusionMatrix c{rng.below(20), rng.below(20), rng.below(20), rng.below(20)};
    if (c.total() == 0) continue;
    const double direct = oracle::mcc_direct(c.tp, c.fp, c.tn, c.fn);
    CHECK(std::abs(mcc(c) - direct) < 1e-12);
    ConfusionMatrix s{c.tn, c.fn, c.tp, c.fp};
    CHECK(std::abs(mcc(s) - mcc(c)) < 1e-12);
  }
}

TEST_CASE("confusion counts") {
  auto c = confusion({1, 1, 0, 0, 1}, {1, 0, 0, 1, 1});
  CHECK(c.tp == 2);
  CHECK(c.fn == 1);
  CHECK(c.tn == 1);
  CHECK(c.fp == 1);
  CHECK_THROWS_AS(confusion({1}, {1, 0}), ContractError);
}

TEST_CASE("density probe separates distant clusters") {
  auto d = blobs("duration", 200, 1, 3.0, 1);
  auto p = fit_probe(d, {"duration", Language::nl, 0, 1});
  CHECK(p.kind == ProbeKind::density);
  CHECK(score(p, d) > 0.95);
}

TEST_CASE("identical classes predict unstressed") {
  Dataset d;
  d.feature_name = "duration";
  d.X.resize(6, 1);
  d.X << 1, 1, 2, 2, 3, 3;
  d.y = {0, 1, 0, 1, 0, 1};
  d.token_ids = d.word_ids = {"a", "b", "c", "d", "e", "f"};
  auto p = fit_probe(d, {"duration", Language::nl, 0, 1});
  for (int v : probe_predict(p, d.X)) CHECK(v == 0);
}

TEST_CASE("silverman bandwidth") {
  CHECK(silverman_bandwidth({1.0}, 0.01) == 0.01);
  CHECK(silverman_bandwidth({2.0, 2.0, 2.0}, 0.01) == 0.01);
  // n = 5, sd = sqrt(2.5), IQR = 2 / 1.34
  const double expect = 0.9 * (2.0 / 1.34) * std::pow(5.0, -0.2);
  CHECK(silverman_bandwidth({1, 2, 3, 4, 5}) == doctest::Approx(expect));
}

TEST_CASE("discriminant probe on shifted blobs") {
  auto d = blobs("spectral_tilt", 400, 4, 1.0, 2);
  auto p = fit_probe(d, {"spectral_tilt", Language::de, 0, 2});
  CHECK(p.kind == ProbeKind::discriminant);
  CHECK(score(p, blobs("spectral_tilt", 400, 4, 1.0, 3)) > 0.8);
}

TEST_CASE("discriminant probe survives a constant column") {
  auto d = blobs("combined", 200, 8, 1.0, 4);
  d.X.col(3).setConstant(5.0);
  auto p = fit_probe(d, {"combined", Language::de, 0, 2});
  CHECK(score(p, d) > 0.8);
}

TEST_CASE("perceptron fits separable data") {
  auto d = blobs("tf5", 500, 16, 1.0, 5);
  auto p = fit_probe(d, {"tf5", Language::en, 0, 11});
  CHECK(p.kind == ProbeKind::perceptron);
  CHECK(score(p, d) >= 0.95);
  const auto& params = std::get<PerceptronParams>(p.params);
  CHECK(params.epochs >= 1);
  CHECK(params.w1.cols() == 100);
}

TEST_CASE("perceptron training is deterministic in its seed") {
  auto d = blobs("cnn", 200, 8, 0.5, 6);
  auto a = fit_probe(d, {"cnn", Language::en, 0, 42});
  auto b = fit_probe(d, {"cnn", Language::en, 0, 42});
  CHECK(serialize_probe(a) == serialize_probe(b));
  auto c = fit_probe(d, {"cnn", Language::en, 0, 43});
  CHECK(serialize_probe(a) != serialize_probe(c));
}

TEST_CASE("single-class training sets are rejected") {
  auto d = blobs("duration", 10, 1, 1.0, 7);
  for (int& v : d.y) v = 1;
  CHECK_THROWS_AS(fit_probe(d, {}), ContractError);
  Dataset empty;
  empty.feature_name = "duration";
  CHECK_THROWS_AS(fit_probe(empty, {}), ContractError);
}

TEST_CASE("serialized probes predict identically") {
  for (const char* f : {"duration", "combined", "tf23"}) {
    const std::size_t dim = std::string(f) == "duration" ? 1 : 8;
    auto d = blobs(f, 120, dim, 0.7, 8);
    auto p = fit_probe(d, {f, Language::hu, 3, 9});
    auto text = serialize_probe(p);
    auto q = deserialize_probe(text);
    CHECK(q.kind == p.kind);
    CHECK(q.provenance.fold_index == 3);
    CHECK(q.provenance.language == Language::hu);
    CHECK(probe_predict(q, d.X) == probe_predict(p, d.X));
    CHECK(serialize_probe(q) == text);
  }
  CHECK_THROWS_AS(deserialize_probe("{}"), ParseError);
  CHECK_THROWS_AS(deserialize_probe("not json"), ParseError);
}

TEST_CASE("dimension mismatch at prediction") {
  auto d = blobs("spectral_tilt", 50, 4, 1.0, 9);
  auto p = fit_probe(d, {});
  Eigen::MatrixXd wrong = Eigen::MatrixXd::Zero(3, 5);
  CHECK_THROWS_AS(probe_predict(p, wrong), ContractError);
}

TEST_CASE("dataset validation") {
  auto d = blobs("tf5", 10, 3, 1.0, 10);
  CHECK_NOTHROW(d.validate());
  d.X(2, 1) = std::nan("");
  CHECK_THROWS_AS(d.validate(), ContractError);
  auto e = blobs("tf5", 10, 3, 1.0, 10);
  e.y[0] = 2;
  CHECK_THROWS_AS(e.validate(), ContractError);
  auto s = e.subset({1, 3});
  CHECK(s.size() == 2);
  CHECK(s.token_ids[1] == "t3");
}
