// tests/test_properties.cpp

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

#include <algorithm>
#include <numeric>
#include <regex>
#include <set>

#include "oracles.hpp"
#include "stressprobe/clustering.hpp"
#include "stressprobe/corpus.hpp"
#include "stressprobe/embedpool.hpp"
#include "stressprobe/evaluation.hpp"
#include "stressprobe/report.hpp"
#include "stressprobe/stresslabel.hpp"
#include "stressprobe/testkit.hpp"

using namespace stressprobe;
using Eigen::MatrixXd;

namespace {

testkit::SynthCorpus corpus_for(Language lang, int words, double ratio, std::uint64_t seed) {
  testkit::CueSpec spec;
  spec.n_words = words;
  spec.duration_ratio = ratio;
  spec.seed = seed;
  return testkit::synth_corpus(spec, lang);
}

std::vector<corpus::VowelToken> tokens_of(const testkit::SynthCorpus& c) {
  std::vector<corpus::VowelToken> out;
  for (const auto& u : c.utterances)
    for (const auto& w : corpus::select_bisyllabic(u, c.inventory).words) {
      for (auto t : {w.first, w.second}) {
        t.stress = c.labels.at(t.token_id());
        out.push_back(t);
      }
    }
  return out;
}

probes::Dataset duration_dataset(const testkit::SynthCorpus& c) {
  auto toks = tokens_of(c);
  probes::Dataset d;
  d.feature_name = "duration";
  d.language = c.language;
  d.X.resize(static_cast<Eigen::Index>(toks.size()), 1);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    d.X(static_cast<Eigen::Index>(i), 0) = acoustic::duration(toks[i]);
    d.y.push_back(toks[i].stress == Stress::stressed);
    d.token_ids.push_back(toks[i].token_id());
    d.word_ids.push_back(toks[i].word_id());
  }
  return d;
}

// Internal nodes as (original leaf ids, height), sorted.
std::vector<std::pair<std::vector<std::size_t>, double>> canonical(
    const cluster::Dendrogram& t, const std::vector<std::size_t>& original) {
  std::vector<std::pair<std::vector<std::size_t>, double>> out;
  for (const auto& n : t.nodes) {
    if (n.is_leaf()) continue;
    std::vector<std::size_t> m;
    for (auto leaf : n.members) m.push_back(original[leaf]);
    std::sort(m.begin(), m.end());
    out.emplace_back(m, n.height);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

}  // namespace

TEST_CASE("selected words give two ordered, disjoint vowels") {
  auto c = corpus_for(Language::en, 80, 1.2, 3);
  for (const auto& u : c.utterances) {
    auto sel = corpus::select_bisyllabic(u, c.inventory);
    for (const auto& w : sel.words) {
      CHECK(w.first.interval.end <= w.second.interval.start);
      CHECK(w.first.syllable_index == 0);
      CHECK(w.second.syllable_index == 1);
    }
    // Idempotent and order-preserving.
    auto again = corpus::select_bisyllabic(u, c.inventory);
    REQUIRE(again.words.size() == sel.words.size());
    for (std::size_t i = 0; i < sel.words.size(); ++i) {
      CHECK(again.words[i].word_index == sel.words[i].word_index);
      if (i) CHECK(sel.words[i - 1].word_index < sel.words[i].word_index);
    }
  }
  auto toks = tokens_of(c);
  CHECK(corpus::corpus_stats(toks).at(Language::en).word_count == toks.size() / 2);
}

TEST_CASE("alignment documents round trip bit-exactly") {
  auto c = corpus_for(Language::de, 20, 1.3, 4);
  for (const auto& u : c.utterances) {
    auto back = corpus::parse_alignment(corpus::serialize_alignment(u));
    REQUIRE(back.words.size() == u.words.size());
    for (std::size_t w = 0; w < u.words.size(); ++w) {
      CHECK(back.words[w].interval.start == u.words[w].interval.start);
      for (std::size_t p = 0; p < u.words[w].phones.size(); ++p) {
        CHECK(back.words[w].phones[p].interval.start == u.words[w].phones[p].interval.start);
        CHECK(back.words[w].phones[p].interval.end == u.words[w].phones[p].interval.end);
      }
    }
  }
}

TEST_CASE("self alignment is all matches; alignment is symmetric") {
  Rng rng(12);
  label::ScoringScheme s{2.0, -1.0, -0.5};
  for (int i = 0; i < 200; ++i) {
    auto a = oracle::random_phones(rng, 8, 4);
    auto self = label::nw_align(a, a, s);
    CHECK(self.score == doctest::Approx(2.0 * static_cast<double>(a.size())));
    for (const auto& p : self.pairs) CHECK(p.a == p.b);
    auto b = oracle::random_phones(rng, 8, 4);
    CHECK(label::nw_align(a, b, s).score == doctest::Approx(label::nw_align(b, a, s).score));
  }
}

TEST_CASE("fixed stress always labels one of each") {
  auto c = corpus_for(Language::pl, 30, 1.0, 5);
  for (const auto& u : c.utterances)
    for (const auto& w : u.words) {
      for (Language l : {Language::pl, Language::hu}) {
        auto lab = label::label_fixed(w, l);
        CHECK(lab.first != lab.second);
        CHECK(lab.first == Stress::stressed);
      }
    }
}

TEST_CASE("labeled data are balanced") {
  for (Language l : kAllLanguages) {
    auto toks = tokens_of(corpus_for(l, 50, 1.1, 6));
    auto stressed = std::count_if(toks.begin(), toks.end(),
                                  [](const auto& t) { return t.stress == Stress::stressed; });
    CHECK(static_cast<std::size_t>(stressed) * 2 == toks.size());
  }
}

TEST_CASE("duration ignores the audio; peripherality is a distance") {
  corpus::VowelToken t;
  t.interval = {0.2, 0.31};
  std::vector<double> quiet(1760, 0.001), loud(1760, 0.9);
  CHECK(acoustic::measure_token(t, quiet, 16000).duration ==
        acoustic::measure_token(t, loud, 16000).duration);

  acoustic::LanguageFormantStats st{Language::nl, 500, 1500, 10};
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    double f1 = rng.uniform(200, 900), f2 = rng.uniform(600, 2600);
    CHECK(acoustic::formant_peripherality(f1, f2, st) > 0.0);
  }
  CHECK(acoustic::formant_peripherality(500, 1500, st) == 0.0);
}

TEST_CASE("pooling everything gives column means") {
  Rng rng(8);
  embed::LayerTensor t{"tf11", embed::RowMatrix(17, 6)};
  for (Eigen::Index i = 0; i < t.values.size(); ++i) t.values.data()[i] = rng.normal();
  std::vector<std::size_t> all(17);
  std::iota(all.begin(), all.end(), 0);
  auto p = embed::pool(t, all);
  Eigen::VectorXd means = t.values.colwise().mean();
  for (int c = 0; c < 6; ++c) CHECK(p.vector[c] == doctest::Approx(means[c]).epsilon(1e-12));
}

TEST_CASE("frames for tokens inside the audio stay in range") {
  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    embed::FrameTiming t;
    t.window = rng.uniform(0.015, 0.04);
    t.stride = rng.uniform(0.005, t.window);
    const double audio = rng.uniform(0.5, 3.0);
    const std::size_t frames = static_cast<std::size_t>(std::floor((audio - t.window) / t.stride)) + 1;
    const double s = rng.uniform(0.0, audio - 0.05), e = std::min(audio, s + rng.uniform(0.03, 0.3));
    auto span = embed::frame_span({s, e}, t, frames);
    if (!span.empty()) CHECK(span.back() < frames);
    // With an unbounded frame count the span still never reaches past the audio.
    auto wide = embed::frame_span({s, e}, t, 100000);
    if (!wide.empty()) CHECK(static_cast<double>(wide.back()) * t.stride < audio);
  }
}

TEST_CASE("density probe with mirrored classes flips sign at zero") {
  probes::Dataset d;
  d.feature_name = "pitch";
  Rng rng(10);
  std::vector<double> pos;
  for (int i = 0; i < 60; ++i) pos.push_back(std::abs(rng.normal()) + 0.2);
  d.X.resize(120, 1);
  for (int i = 0; i < 60; ++i) {
    d.X(2 * i, 0) = pos[i];
    d.X(2 * i + 1, 0) = -pos[i];
    d.y.push_back(1);
    d.y.push_back(0);
    d.token_ids.push_back("p" + std::to_string(i));
    d.token_ids.push_back("n" + std::to_string(i));
    d.word_ids.push_back("w" + std::to_string(i));
    d.word_ids.push_back("w" + std::to_string(i));
  }
  auto p = probes::fit_probe(d, {});
  Eigen::MatrixXd probe_pts(2, 1);
  probe_pts << 1e-3, -1e-3;
  CHECK(probes::probe_predict(p, probe_pts) == std::vector<int>{1, 0});
}

TEST_CASE("identical fits predict identically") {
  auto d = duration_dataset(corpus_for(Language::nl, 60, 1.3, 11));
  d.feature_name = "tf5";
  for (const char* f : {"duration", "tf5"}) {
    d.feature_name = f;
    auto a = probes::fit_probe(d, {f, Language::nl, 0, 5});
    auto b = probes::fit_probe(d, {f, Language::nl, 0, 5});
    CHECK(probes::probe_predict(a, d.X) == probes::probe_predict(b, d.X));
  }
}

TEST_CASE("folds keep both vowels of a word together") {
  auto d = duration_dataset(corpus_for(Language::en, 90, 1.3, 12));
  auto folds = eval::make_folds(d.word_ids, 20, 2.0 / 3.0, 4);
  for (const auto& f : folds) {
    std::set<std::string> train(f.train_word_ids.begin(), f.train_word_ids.end());
    std::map<std::string, int> side;
    for (std::size_t i = 0; i < d.size(); ++i) {
      int s = train.count(d.word_ids[i]) ? 1 : 0;
      auto [it, fresh] = side.emplace(d.word_ids[i], s);
      CHECK(it->second == s);
    }
  }
}

TEST_CASE("perfect probes pool to exactly one; vectors come k per language") {
  eval::DatasetMap data;
  eval::FoldMap folds;
  for (Language l : {Language::nl, Language::de, Language::hu}) {
    data[l] = duration_dataset(corpus_for(l, 60, 3.0, 13));
    folds[l] = eval::make_folds(data[l].word_ids, 6, 2.0 / 3.0, 1);
  }
  eval::MatrixOptions opt;
  opt.languages = {Language::nl, Language::de, Language::hu};
  auto cells = eval::run_matrix(data, "duration", folds, opt);
  CHECK(cells.size() == 9 * 6);
  auto cmp = eval::pool_comparison(cells, "duration");
  CHECK(cmp.target.mean == 1.0);
  auto vecs = cluster::build_vectors(cells, opt.languages);
  CHECK(vecs.size() == 18);
  std::map<Language, int> per;
  for (const auto& v : vecs) ++per[v.train_language];
  for (const auto& [l, n] : per) CHECK(n == 6);
}

TEST_CASE("hierarchical clustering is permutation invariant") {
  Rng rng(14);
  MatrixXd X(25, 4);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
  std::vector<std::size_t> id(25);
  std::iota(id.begin(), id.end(), 0);
  for (auto link : {cluster::Linkage::ward, cluster::Linkage::average}) {
    auto base = canonical(cluster::hclust(X, link), id);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<std::size_t> perm = id;
      rng.shuffle(perm);
      MatrixXd Y(25, 4);
      for (int i = 0; i < 25; ++i) Y.row(i) = X.row(static_cast<Eigen::Index>(perm[i]));
      auto got = canonical(cluster::hclust(Y, link), perm);
      REQUIRE(got.size() == base.size());
      for (std::size_t n = 0; n < got.size(); ++n) {
        CHECK(got[n].first == base[n].first);
        CHECK(got[n].second == doctest::Approx(base[n].second).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("merge heights grow towards the root") {
  Rng rng(15);
  MatrixXd X(30, 3);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
  auto t = cluster::hclust(X);
  for (const auto& n : t.nodes)
    if (!n.is_leaf()) {
      CHECK(n.height >= t.nodes[n.children->first].height);
      CHECK(n.height >= t.nodes[n.children->second].height);
    }
}

TEST_CASE("lda distances survive translation") {
  Rng rng(16);
  MatrixXd X(30, 5);
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) {
    labels.push_back(i % 3);
    for (int c = 0; c < 5; ++c) X(i, c) = rng.normal() + (i % 3) * (c == 0 ? 2.0 : 0.0);
  }
  auto a = cluster::lda_project(X, labels, 2);
  Eigen::RowVectorXd shift(5);
  shift << 3, -1, 0.5, 10, -7;
  MatrixXd Y = X.rowwise() + shift;
  auto b = cluster::lda_project(Y, labels, 2);
  for (int i = 0; i < 30; ++i)
    for (int j = i + 1; j < 30; ++j)
      CHECK((a.coords.row(i) - a.coords.row(j)).norm() ==
            doctest::Approx((b.coords.row(i) - b.coords.row(j)).norm()).epsilon(1e-6));
}

TEST_CASE("longer stressed vowels never lower the duration score") {
  double last = -2;
  for (double ratio : {1.0, 1.2, 1.5}) {
    auto d = duration_dataset(corpus_for(Language::nl, 150, ratio, 17));
    eval::DatasetMap data{{Language::nl, d}};
    eval::FoldMap folds{{Language::nl, eval::make_folds(d.word_ids, 10, 2.0 / 3.0, 3)}};
    eval::MatrixOptions opt;
    opt.languages = {Language::nl};
    auto cells = eval::run_matrix(data, "duration", folds, opt);
    double mean = 0;
    for (const auto& c : cells) mean += c.mcc;
    mean /= static_cast<double>(cells.size());
    CHECK(mean >= last);
    last = mean;
  }
  CHECK(last > 0.8);
}

TEST_CASE("figure numbers match their tables") {
  std::vector<eval::ScoreCell> cells;
  Rng rng(18);
  for (const char* f : {"duration", "combined", "tf23"})
    for (int k = 0; k < 5; ++k)
      for (Language tr : {Language::en, Language::pl})
        for (Language te : {Language::en, Language::pl})
          cells.push_back({tr, te, f, k, rng.uniform(-0.2, 0.9), 10});
  auto bars = pipeline::per_language_bars(cells, {});
  const std::string svg = pipeline::bars_svg(bars);
  std::regex attr("data-mean=\"([^\"]+)\" data-lo=\"([^\"]+)\" data-hi=\"([^\"]+)\"");
  std::vector<std::string> from_svg;
  for (std::sregex_iterator it(svg.begin(), svg.end(), attr), end; it != end; ++it)
    from_svg.push_back((*it)[1].str() + "," + (*it)[2].str() + "," + (*it)[3].str());
  std::vector<std::string> from_csv;
  std::istringstream in(pipeline::bars_csv(bars));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    auto f = split(line, ',');
    from_csv.push_back(f[3] + "," + f[4] + "," + f[5]);
  }
  CHECK(from_svg == from_csv);
  CHECK(from_csv.size() == 6);
}
