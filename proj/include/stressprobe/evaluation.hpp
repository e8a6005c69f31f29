// include/stressprobe/evaluation.hpp

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

#ifndef STRESSPROBE_EVALUATION_HPP_
#define STRESSPROBE_EVALUATION_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "stressprobe/common.hpp"
#include "stressprobe/probes.hpp"

namespace stressprobe::eval {

struct FoldPlan {
  int fold_index = 0;
  std::vector<std::string> train_word_ids;
  std::vector<std::string> test_word_ids;
  std::uint64_t seed = 0;
};

// k repeated random word-level splits (not a partition: the 2/3 vs 1/3
// fractions rule out disjoint test folds). The train side gets
// round(n * train_frac) words. Input order does not matter.
std::vector<FoldPlan> make_folds(const std::vector<std::string>& word_ids,
                                 int k = 20, double train_frac = 2.0 / 3.0,
                                 std::uint64_t seed = 0);

struct ScoreCell {
  Language train_language = Language::nl;
  Language test_language = Language::nl;
  std::string feature_name;
  int fold_index = 0;
  double mcc = 0.0;
  std::size_t n_test = 0;
};

using DatasetMap = std::map<Language, probes::Dataset>;
using FoldMap = std::map<Language, std::vector<FoldPlan>>;

struct MatrixOptions {
  std::vector<Language> languages{kAllLanguages.begin(), kAllLanguages.end()};
  probes::ProbeConfig probe;
  std::uint64_t seed = 0;
  int jobs = 1;
  // When set, every fitted probe is written here as <lang>_<fold>.json.
  std::string probe_dir;
};

// For every (train language, fold): fit on the fold's train words, score on
// the fold's held-out words of the same language and on the full dataset of
// every other language. Cells come out in (train language, fold, test
// language) order regardless of the number of workers.
std::vector<ScoreCell> run_matrix(const DatasetMap& datasets,
                                  const std::string& feature_name,
                                  const FoldMap& folds,
                                  const MatrixOptions& options = {});

enum class CiMethod { student_t, bca_bootstrap };

struct MeanCi {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
};

struct CiOptions {
  double level = 0.99;
  CiMethod method = CiMethod::student_t;
  int resamples = 2000;
  std::uint64_t seed = 0;
};

// Two-sided confidence interval of the mean; n >= 2.
MeanCi pooled_ci(std::span<const double> scores, const CiOptions& opts = {});

struct PooledComparison {
  std::string feature_name;
  MeanCi target;
  MeanCi cross;
};

// Target pool: cells with train == test language. Cross pool: the rest, or
// with `macro` one mean per probe over its cross-language cells.
PooledComparison pool_comparison(const std::vector<ScoreCell>& cells,
                                 const std::string& feature_name,
                                 const CiOptions& opts = {}, bool macro = false);

std::string scorecells_csv(const std::vector<ScoreCell>& cells);
std::vector<ScoreCell> parse_scorecells(const std::string& csv_text);
std::string pooled_csv(const std::vector<PooledComparison>& rows);

}  // namespace stressprobe::eval

#endif  // STRESSPROBE_EVALUATION_HPP_
