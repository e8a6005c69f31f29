// include/stressprobe/report.hpp

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

#ifndef STRESSPROBE_REPORT_HPP_
#define STRESSPROBE_REPORT_HPP_

#include <string>
#include <utility>
#include <vector>

#include "stressprobe/clustering.hpp"
#include "stressprobe/config.hpp"
#include "stressprobe/evaluation.hpp"

namespace stressprobe::pipeline {

struct ClusterSummary {
  std::string best_acoustic;  // empty when no acoustic feature was evaluated
  std::string best_layer;
  std::string lda_csv;        // feature,train_language,fold,ld1,ld2
  std::vector<std::pair<std::string, std::string>> dendrograms;  // file name, JSON
  std::string summary_json;
};

// Feature with the highest mean same-language MCC among `candidates`; the
// earliest in report order wins ties.
std::string best_feature(const std::vector<eval::ScoreCell>& cells,
                         const std::vector<std::string>& candidates);

// LDA projection of the performance vectors of every feature (classes are
// training languages) and hierarchical clustering for the best acoustic
// feature and best layer. Empty overrides select by best_feature.
ClusterSummary analyze_clusters(const std::vector<eval::ScoreCell>& cells,
                                const std::vector<Language>& languages,
                                cluster::Linkage linkage,
                                const std::string& best_acoustic = "",
                                const std::string& best_layer = "");

// Figure and table files; returns the paths written.
std::vector<std::string> write_report(const RunConfig& cfg, const std::string& dir);

struct BarRow {
  Language language = Language::nl;
  std::string feature_name;
  eval::MeanCi ci;
};

// Same-language MCC per training language and feature, with CIs over folds.
std::vector<BarRow> per_language_bars(const std::vector<eval::ScoreCell>& cells,
                                      const eval::CiOptions& opts);
std::string bars_csv(const std::vector<BarRow>& rows);
std::string bars_svg(const std::vector<BarRow>& rows);

std::string pooled_svg(const std::vector<eval::PooledComparison>& rows);

// Draws the dendrogram JSON produced by cluster::dendrogram_json; every leaf
// becomes one element of class "leaf".
std::string dendrogram_svg(const std::vector<std::pair<std::string, std::string>>& trees);

std::string lda_svg(const std::string& lda_csv);

}  // namespace stressprobe::pipeline

#endif  // STRESSPROBE_REPORT_HPP_
