// include/stressprobe/clustering.hpp

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

#ifndef STRESSPROBE_CLUSTERING_HPP_
#define STRESSPROBE_CLUSTERING_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "stressprobe/common.hpp"
#include "stressprobe/evaluation.hpp"

namespace stressprobe::cluster {

// MCC of one probe on every test language, in `languages` order.
struct PerformanceVector {
  Language train_language = Language::nl;
  std::string feature_name;
  int fold_index = 0;
  std::vector<double> scores;

  std::string id() const;
};

// One vector per (train language, feature, fold). Throws ContractError listing
// the missing (probe, test language) cells when the set is incomplete.
std::vector<PerformanceVector> build_vectors(
    const std::vector<eval::ScoreCell>& cells,
    const std::vector<Language>& languages = {kAllLanguages.begin(),
                                              kAllLanguages.end()});

Eigen::MatrixXd as_matrix(const std::vector<PerformanceVector>& vectors);

struct Projection {
  Eigen::MatrixXd coords;                // n x out_dims
  Eigen::MatrixXd axes;                  // d x out_dims
  Eigen::VectorXd discriminant_ratios;   // per axis, descending
  std::vector<int> classes;              // sorted distinct labels
  Eigen::MatrixXd centroids;             // classes x out_dims, in `classes` order
  bool regularized = false;              // within-class scatter needed a ridge
};

// Fisher discriminant axes (between- over within-class scatter). Each axis is
// sign-normalized so that its first non-negligible loading is positive.
Projection lda_project(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                       int out_dims = 2);

// Mean silhouette coefficient under Euclidean distance.
double silhouette(const Eigen::MatrixXd& points, const std::vector<int>& labels);

enum class Linkage { single, complete, average, ward };

Linkage parse_linkage(std::string_view name);
std::string_view to_string(Linkage l);

struct DendrogramNode {
  std::size_t id = 0;
  std::optional<std::pair<std::size_t, std::size_t>> children;
  double height = 0.0;
  std::vector<std::size_t> members;  // sorted leaf indices

  bool is_leaf() const { return !children.has_value(); }
};

// Leaves are nodes 0..n-1, merges n..2n-2 in merge order; the root is last.
struct Dendrogram {
  std::vector<DendrogramNode> nodes;
  std::size_t leaf_count = 0;

  const DendrogramNode& root() const { return nodes.back(); }
};

// Naive agglomerative clustering with Lance-Williams updates. Distance ties
// go to the pair whose lowest leaf indices are lexicographically smallest.
Dendrogram hclust(const Eigen::MatrixXd& X, Linkage linkage = Linkage::ward);

// Share of leaves that agree with the majority group of their side of the
// root split, counted over all leaves. In [0.5, 1].
double first_split_purity(const Dendrogram& tree, const std::vector<int>& group_of);

std::string dendrogram_json(const Dendrogram& tree,
                            const std::vector<std::string>& leaf_labels);

}  // namespace stressprobe::cluster

#endif  // STRESSPROBE_CLUSTERING_HPP_
