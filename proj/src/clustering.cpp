// src/clustering.cpp

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

#include "stressprobe/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "json.hpp"

namespace stressprobe::cluster {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string PerformanceVector::id() const {
  return feature_name + ":" + std::string(to_string(train_language)) + ":" +
         std::to_string(fold_index);
}

std::vector<PerformanceVector> build_vectors(const std::vector<eval::ScoreCell>& cells,
                                             const std::vector<Language>& languages) {
  using Key = std::tuple<std::string, Language, int>;
  std::map<Key, std::map<Language, double>> grouped;
  for (const auto& c : cells)
    grouped[{c.feature_name, c.train_language, c.fold_index}][c.test_language] = c.mcc;

  std::vector<PerformanceVector> out;
  std::string missing;
  for (const auto& [key, scores] : grouped) {
    PerformanceVector v;
    std::tie(v.feature_name, v.train_language, v.fold_index) = key;
    for (Language l : languages) {
      auto it = scores.find(l);
      if (it == scores.end()) {
        if (!missing.empty()) missing += ", ";
        missing += v.id() + "->" + std::string(to_string(l));
        continue;
      }
      v.scores.push_back(it->second);
    }
    out.push_back(std::move(v));
  }
  if (!missing.empty())
    throw ContractError("incomplete score cells, missing: " + missing);
  // Report order: feature rank, then train language, then fold.
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::make_tuple(probes::feature_rank(a.feature_name), a.feature_name,
                           a.train_language, a.fold_index) <
           std::make_tuple(probes::feature_rank(b.feature_name), b.feature_name,
                           b.train_language, b.fold_index);
  });
  return out;
}

MatrixXd as_matrix(const std::vector<PerformanceVector>& vectors) {
  if (vectors.empty()) return {};
  MatrixXd m(static_cast<Eigen::Index>(vectors.size()),
             static_cast<Eigen::Index>(vectors[0].scores.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i)
    for (std::size_t j = 0; j < vectors[i].scores.size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vectors[i].scores[j];
  return m;
}

Projection lda_project(const MatrixXd& X, const std::vector<int>& labels, int out_dims) {
  const Eigen::Index n = X.rows(), d = X.cols();
  if (static_cast<std::size_t>(n) != labels.size())
    throw ContractError("lda_project: one label per row required");
  if (out_dims < 1 || out_dims > d)
    throw ContractError("lda_project: out_dims must be in [1, d]");
  std::map<int, std::vector<Eigen::Index>> members;
  for (Eigen::Index i = 0; i < n; ++i) members[labels[static_cast<std::size_t>(i)]].push_back(i);
  if (members.size() < 2) throw ContractError("lda_project needs at least 2 classes");
  for (const auto& [label, rows] : members)
    if (rows.size() < 2)
      throw ContractError("lda_project: class " + std::to_string(label) +
                          " has fewer than 2 vectors");

  const VectorXd grand = X.colwise().mean().transpose();
  MatrixXd sw = MatrixXd::Zero(d, d), sb = MatrixXd::Zero(d, d);
  for (const auto& [label, rows] : members) {
    VectorXd mu = VectorXd::Zero(d);
    for (auto r : rows) mu += X.row(r).transpose();
    mu /= static_cast<double>(rows.size());
    for (auto r : rows) {
      VectorXd c = X.row(r).transpose() - mu;
      sw.noalias() += c * c.transpose();
    }
    VectorXd g = mu - grand;
    sb.noalias() += static_cast<double>(rows.size()) * g * g.transpose();
  }

  Projection p;
  Eigen::SelfAdjointEigenSolver<MatrixXd> sw_eig(sw);
  const double max_ev = sw_eig.eigenvalues().maxCoeff();
  if (!(sw_eig.eigenvalues().minCoeff() > 1e-12 * std::max(max_ev, 1e-300))) {
    double tr = sw.trace();
    double ridge = 1e-8 * (tr > 0 ? tr / static_cast<double>(d) : 1.0);
    sw.diagonal().array() += ridge;
    p.regularized = true;
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(sb, sw);
  // Eigenvalues ascend; take the largest out_dims.
  p.axes.resize(d, out_dims);
  p.discriminant_ratios.resize(out_dims);
  for (int k = 0; k < out_dims; ++k) {
    Eigen::Index col = d - 1 - k;
    VectorXd v = ges.eigenvectors().col(col);
    const double tol = 1e-12 * v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < d; ++i) {
      if (std::abs(v[i]) > tol) {
        if (v[i] < 0) v = -v;
        break;
      }
    }
    p.axes.col(k) = v;
    p.discriminant_ratios[k] = ges.eigenvalues()[col];
  }
  p.coords = (X.rowwise() - grand.transpose()) * p.axes;
  p.centroids = MatrixXd::Zero(static_cast<Eigen::Index>(members.size()), out_dims);
  Eigen::Index ci = 0;
  for (const auto& [label, rows] : members) {
    p.classes.push_back(label);
    for (auto r : rows) p.centroids.row(ci) += p.coords.row(r);
    p.centroids.row(ci) /= static_cast<double>(rows.size());
    ++ci;
  }
  return p;
}

double silhouette(const MatrixXd& pts, const std::vector<int>& labels) {
  const Eigen::Index n = pts.rows();
  std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw ContractError("silhouette needs at least 2 classes");
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::map<int, std::pair<double, int>> sums;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      auto& s = sums[labels[static_cast<std::size_t>(j)]];
      s.first += (pts.row(i) - pts.row(j)).norm();
      s.second += 1;
    }
    const int own = labels[static_cast<std::size_t>(i)];
    if (sums[own].second == 0) continue;  // singleton class contributes 0
    double a = sums[own].first / sums[own].second;
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [label, s] : sums)
      if (label != own && s.second > 0) b = std::min(b, s.first / s.second);
    double m = std::max(a, b);
    total += m > 0 ? (b - a) / m : 0.0;
  }
  return total / static_cast<double>(n);
}

Linkage parse_linkage(std::string_view name) {
  if (name == "single") return Linkage::single;
  if (name == "complete") return Linkage::complete;
  if (name == "average") return Linkage::average;
  if (name == "ward") return Linkage::ward;
  throw ConfigError("unknown linkage '" + std::string(name) + "'");
}

std::string_view to_string(Linkage l) {
  switch (l) {
    case Linkage::single: return "single";
    case Linkage::complete: return "complete";
    case Linkage::average: return "average";
    case Linkage::ward: return "ward";
  }
  return "?";
}

Dendrogram hclust(const MatrixXd& X, Linkage linkage) {
  const auto n = static_cast<std::size_t>(X.rows());
  if (n < 2) throw ContractError("hclust needs at least 2 vectors");
  Dendrogram tree;
  tree.leaf_count = n;
  for (std::size_t i = 0; i < n; ++i) tree.nodes.push_back({i, std::nullopt, 0.0, {i}});

  MatrixXd dist(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      dist(i, j) = (X.row(i) - X.row(j)).norm();

  // Slot s holds cluster node_of[s]; inactive slots are skipped.
  std::vector<std::size_t> node_of(n), sizes(n, 1), min_leaf(n);
  std::vector<bool> active(n, true);
  for (std::size_t i = 0; i < n; ++i) node_of[i] = min_leaf[i] = i;

  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> best_key{n, n};
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        double dij = dist(i, j);
        std::pair<std::size_t, std::size_t> key = std::minmax(min_leaf[i], min_leaf[j]);
        if (dij < best || (dij == best && key < best_key)) {
          best = dij;
          best_key = key;
          bi = i;
          bj = j;
        }
      }
    }
    if (min_leaf[bj] < min_leaf[bi]) std::swap(bi, bj);

    const double ni = static_cast<double>(sizes[bi]), nj = static_cast<double>(sizes[bj]);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const double dki = dist(k, bi), dkj = dist(k, bj), nk = static_cast<double>(sizes[k]);
      double nd = 0.0;
      switch (linkage) {
        case Linkage::single: nd = std::min(dki, dkj); break;
        case Linkage::complete: nd = std::max(dki, dkj); break;
        case Linkage::average: nd = (ni * dki + nj * dkj) / (ni + nj); break;
        case Linkage::ward:
          nd = std::sqrt(std::max(0.0, ((ni + nk) * dki * dki + (nj + nk) * dkj * dkj -
                                        nk * best * best) /
                                           (ni + nj + nk)));
          break;
      }
      dist(k, bi) = dist(bi, k) = nd;
    }

    const auto& left = tree.nodes[node_of[bi]];
    const auto& right = tree.nodes[node_of[bj]];
    DendrogramNode merged;
    merged.id = tree.nodes.size();
    merged.children = std::make_pair(left.id, right.id);
    merged.height = std::max({best, left.height, right.height});
    std::merge(left.members.begin(), left.members.end(), right.members.begin(),
               right.members.end(), std::back_inserter(merged.members));
    tree.nodes.push_back(std::move(merged));

    node_of[bi] = tree.nodes.size() - 1;
    sizes[bi] += sizes[bj];
    min_leaf[bi] = std::min(min_leaf[bi], min_leaf[bj]);
    active[bj] = false;
  }
  return tree;
}

double first_split_purity(const Dendrogram& tree, const std::vector<int>& group_of) {
  const auto& root = tree.root();
  if (!root.children) throw ContractError("first_split_purity: root has no children");
  if (group_of.size() != tree.leaf_count)
    throw ContractError("first_split_purity: one group per leaf required");
  std::size_t agree = 0;
  for (std::size_t child : {root.children->first, root.children->second}) {
    std::map<int, std::size_t> counts;
    for (std::size_t leaf : tree.nodes[child].members) counts[group_of[leaf]] += 1;
    std::size_t majority = 0;
    for (const auto& [g, c] : counts) majority = std::max(majority, c);
    agree += majority;
  }
  return static_cast<double>(agree) / static_cast<double>(tree.leaf_count);
}

namespace {

nlohmann::json node_json(const Dendrogram& tree, std::size_t id,
                         const std::vector<std::string>& labels) {
  const auto& node = tree.nodes[id];
  nlohmann::json j;
  j["id"] = node.id;
  j["height"] = node.height;
  j["size"] = node.members.size();
  if (node.is_leaf()) {
    j["leaf"] = node.members[0];
    if (node.members[0] < labels.size()) j["label"] = labels[node.members[0]];
  } else {
    j["children"] = {node_json(tree, node.children->first, labels),
                     node_json(tree, node.children->second, labels)};
  }
  return j;
}

}  // namespace

std::string dendrogram_json(const Dendrogram& tree,
                            const std::vector<std::string>& leaf_labels) {
  nlohmann::json doc;
  doc["leaf_count"] = tree.leaf_count;
  doc["root"] = node_json(tree, tree.root().id, leaf_labels);
  return doc.dump(1);
}

}  // namespace stressprobe::cluster
