// src/report.cpp

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

#include "stressprobe/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"
#include "stressprobe/corpus.hpp"
#include "stressprobe/pipeline.hpp"
#include "stressprobe/rng.hpp"

namespace stressprobe::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

const char* colour(Language l) {
  switch (l) {
    case Language::nl: return "#1f77b4";
    case Language::en: return "#ff7f0e";
    case Language::de: return "#2ca02c";
    case Language::pl: return "#d62728";
    case Language::hu: return "#9467bd";
  }
  return "#000000";
}

std::vector<std::string> features_in(const std::vector<eval::ScoreCell>& cells) {
  std::vector<std::string> out;
  for (const auto& c : cells)
    if (std::find(out.begin(), out.end(), c.feature_name) == out.end()) out.push_back(c.feature_name);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return probes::feature_rank(a) < probes::feature_rank(b);
  });
  return out;
}

std::string svg_open(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(w) + "\" height=\"" + px(h) +
         "\" viewBox=\"0 0 " + px(w) + " " + px(h) + "\" font-family=\"sans-serif\" font-size=\"10\">\n";
}

// Vertical MCC axis on [-1, 1] with gridlines at 0.5 steps.
struct McCAxis {
  double top, height;
  double y(double v) const { return top + (1.0 - std::clamp(v, -1.0, 1.0)) / 2.0 * height; }
  void draw(std::ostringstream& out, double left, double right) const {
    for (double t : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      out << "<line x1=\"" << px(left) << "\" x2=\"" << px(right) << "\" y1=\"" << px(y(t))
          << "\" y2=\"" << px(y(t)) << "\" stroke=\"" << (t == 0.0 ? "#444" : "#ddd")
          << "\"/>\n<text x=\"" << px(left - 4) << "\" y=\"" << px(y(t) + 3)
          << "\" text-anchor=\"end\">" << format_double(t) << "</text>\n";
    }
  }
};

void error_bar(std::ostringstream& out, double x, const McCAxis& ax, const eval::MeanCi& ci) {
  out << "<line class=\"ci\" x1=\"" << px(x) << "\" x2=\"" << px(x) << "\" y1=\"" << px(ax.y(ci.lo))
      << "\" y2=\"" << px(ax.y(ci.hi)) << "\" stroke=\"#000\"/>\n";
}

std::string ci_attrs(const std::string& prefix, const eval::MeanCi& ci) {
  return " data-" + prefix + "mean=\"" + format_double(ci.mean) + "\" data-" + prefix + "lo=\"" +
         format_double(ci.lo) + "\" data-" + prefix + "hi=\"" + format_double(ci.hi) + "\"";
}

}  // namespace

std::string best_feature(const std::vector<eval::ScoreCell>& cells,
                         const std::vector<std::string>& candidates) {
  std::string best;
  double best_mean = -std::numeric_limits<double>::infinity();
  std::vector<std::string> order(candidates);
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return probes::feature_rank(a) < probes::feature_rank(b);
  });
  for (const auto& f : order) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& c : cells)
      if (c.feature_name == f && c.train_language == c.test_language) {
        sum += c.mcc;
        ++n;
      }
    if (n == 0) continue;
    const double mean = sum / static_cast<double>(n);
    if (mean > best_mean) {
      best_mean = mean;
      best = f;
    }
  }
  return best;
}

ClusterSummary analyze_clusters(const std::vector<eval::ScoreCell>& cells,
                                const std::vector<Language>& languages, cluster::Linkage linkage,
                                const std::string& best_acoustic, const std::string& best_layer) {
  ClusterSummary s;
  const auto features = features_in(cells);
  std::vector<std::string> acoustic_names, layer_names;
  for (const auto& f : features) (probes::is_acoustic(f) ? acoustic_names : layer_names).push_back(f);
  auto pick = [&](const std::string& forced, const std::vector<std::string>& pool) {
    if (forced.empty()) return best_feature(cells, pool);
    if (std::find(pool.begin(), pool.end(), forced) == pool.end())
      throw ConfigError("feature '" + forced + "' was not evaluated");
    return forced;
  };
  s.best_acoustic = pick(best_acoustic, acoustic_names);
  s.best_layer = pick(best_layer, layer_names);

  auto lang_index = [&](Language l) {
    return static_cast<int>(std::find(languages.begin(), languages.end(), l) - languages.begin());
  };

  json summary;
  summary["best_acoustic"] = s.best_acoustic;
  summary["best_layer"] = s.best_layer;
  summary["linkage"] = std::string(cluster::to_string(linkage));
  std::vector<std::string> codes;
  for (auto l : languages) codes.emplace_back(to_string(l));
  summary["languages"] = codes;
  summary["lda"] = json::object();

  std::ostringstream lda;
  lda << "feature,train_language,fold,ld1,ld2\n";
  for (const auto& f : features) {
    std::vector<eval::ScoreCell> mine;
    for (const auto& c : cells)
      if (c.feature_name == f) mine.push_back(c);
    auto vectors = cluster::build_vectors(mine, languages);
    Eigen::MatrixXd X = cluster::as_matrix(vectors);
    std::vector<int> labels;
    for (const auto& v : vectors) labels.push_back(lang_index(v.train_language));
    const int dims = static_cast<int>(std::min<Eigen::Index>(2, X.cols()));
    auto proj = cluster::lda_project(X, labels, dims);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      lda << f << "," << to_string(vectors[i].train_language) << "," << vectors[i].fold_index << ","
          << format_double(proj.coords(r, 0)) << ","
          << format_double(dims > 1 ? proj.coords(r, 1) : 0.0) << "\n";
    }
    std::vector<double> ratios(proj.discriminant_ratios.data(),
                               proj.discriminant_ratios.data() + proj.discriminant_ratios.size());
    summary["lda"][f] = {{"silhouette", cluster::silhouette(proj.coords, labels)},
                         {"discriminant_ratios", ratios},
                         {"regularized", proj.regularized}};

    if (f != s.best_acoustic && f != s.best_layer) continue;
    auto tree = cluster::hclust(X, linkage);
    std::vector<std::string> leaf_labels;
    std::vector<int> group;
    bool both_groups[2] = {false, false};
    for (const auto& v : vectors) {
      leaf_labels.push_back(v.id());
      int g = is_fixed_stress(v.train_language) ? 1 : 0;
      group.push_back(g);
      both_groups[g] = true;
    }
    const std::string file = "dendrogram_" + f + ".json";
    s.dendrograms.emplace_back(file, cluster::dendrogram_json(tree, leaf_labels));
    json d = {{"file", file},
              {"role", f == s.best_acoustic ? "best_acoustic" : "best_layer"},
              {"leaf_count", tree.leaf_count}};
    // Purity of the variable/fixed grouping only means something when both occur.
    if (both_groups[0] && both_groups[1]) d["first_split_purity"] = cluster::first_split_purity(tree, group);
    else d["first_split_purity"] = nullptr;
    summary["dendrograms"][f] = d;
  }
  s.lda_csv = lda.str();
  s.summary_json = summary.dump(2) + "\n";
  return s;
}

// --- figure 1 ---

std::vector<BarRow> per_language_bars(const std::vector<eval::ScoreCell>& cells,
                                      const eval::CiOptions& opts) {
  std::map<std::pair<Language, std::size_t>, std::pair<std::string, std::vector<double>>> groups;
  for (const auto& c : cells) {
    if (c.train_language != c.test_language) continue;
    auto& g = groups[{c.train_language, probes::feature_rank(c.feature_name)}];
    g.first = c.feature_name;
    g.second.push_back(c.mcc);
  }
  std::vector<BarRow> rows;
  for (const auto& [key, g] : groups) {
    eval::CiOptions o = opts;
    o.seed = derive_seed(opts.seed, {"bars", std::string(to_string(key.first)), g.first});
    rows.push_back({key.first, g.first, eval::pooled_ci(g.second, o)});
  }
  return rows;
}

std::string bars_csv(const std::vector<BarRow>& rows) {
  std::ostringstream out;
  out << "language,feature,label,mean,lo,hi,n\n";
  for (const auto& r : rows)
    out << to_string(r.language) << "," << r.feature_name << "," << probes::short_label(r.feature_name)
        << "," << format_double(r.ci.mean) << "," << format_double(r.ci.lo) << ","
        << format_double(r.ci.hi) << "," << r.ci.n << "\n";
  return out.str();
}

std::string bars_svg(const std::vector<BarRow>& rows) {
  std::vector<Language> langs;
  for (const auto& r : rows)
    if (std::find(langs.begin(), langs.end(), r.language) == langs.end()) langs.push_back(r.language);
  const double left = 50, bar = 18, gap = 6, panel_h = 150, panel_gap = 40;
  const double width = left + 12 * (bar + gap) + 20;
  std::ostringstream out;
  out << svg_open(width, panel_gap + langs.size() * (panel_h + panel_gap));
  for (std::size_t p = 0; p < langs.size(); ++p) {
    McCAxis ax{panel_gap + p * (panel_h + panel_gap), panel_h};
    out << "<g class=\"panel\" data-language=\"" << to_string(langs[p]) << "\">\n";
    out << "<text x=\"" << px(left) << "\" y=\"" << px(ax.top - 8) << "\">" << to_string(langs[p])
        << "</text>\n";
    ax.draw(out, left, width - 10);
    for (const auto& r : rows) {
      if (r.language != langs[p]) continue;
      const double x = left + probes::feature_rank(r.feature_name) * (bar + gap) + gap;
      const double y0 = ax.y(0.0), y1 = ax.y(r.ci.mean);
      out << "<rect class=\"bar\" data-feature=\"" << r.feature_name << "\"" << ci_attrs("", r.ci)
          << " x=\"" << px(x) << "\" y=\"" << px(std::min(y0, y1)) << "\" width=\"" << px(bar)
          << "\" height=\"" << px(std::abs(y1 - y0)) << "\" fill=\""
          << (probes::is_acoustic(r.feature_name) ? "#888" : "#4a7ab5") << "\"/>\n";
      error_bar(out, x + bar / 2, ax, r.ci);
      out << "<text x=\"" << px(x + bar / 2) << "\" y=\"" << px(ax.top + panel_h + 12)
          << "\" text-anchor=\"middle\">" << probes::short_label(r.feature_name) << "</text>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

// --- figure 2 ---

std::string pooled_svg(const std::vector<eval::PooledComparison>& rows) {
  const double left = 50, bar = 14, group = 40, top = 30, h = 200;
  const double width = left + rows.size() * group + 120;
  std::ostringstream out;
  out << svg_open(width, top + h + 40);
  McCAxis ax{top, h};
  ax.draw(out, left, left + rows.size() * group);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double x = left + i * group + 5;
    out << "<g class=\"feature\" data-feature=\"" << r.feature_name << "\">\n";
    for (int side = 0; side < 2; ++side) {
      const auto& ci = side == 0 ? r.target : r.cross;
      const double bx = x + side * bar, y0 = ax.y(0.0), y1 = ax.y(ci.mean);
      out << "<rect class=\"bar\" data-pool=\"" << (side == 0 ? "target" : "cross") << "\""
          << ci_attrs("", ci) << " x=\"" << px(bx) << "\" y=\"" << px(std::min(y0, y1))
          << "\" width=\"" << px(bar) << "\" height=\"" << px(std::abs(y1 - y0)) << "\" fill=\""
          << (side == 0 ? "#4a7ab5" : "#c8843c") << "\"/>\n";
      error_bar(out, bx + bar / 2, ax, ci);
    }
    out << "<text x=\"" << px(x + bar) << "\" y=\"" << px(top + h + 14) << "\" text-anchor=\"middle\">"
        << probes::short_label(r.feature_name) << "</text>\n</g>\n";
  }
  const double lx = left + rows.size() * group + 10;
  out << "<rect x=\"" << px(lx) << "\" y=\"" << px(top) << "\" width=\"10\" height=\"10\" fill=\"#4a7ab5\"/>"
      << "<text x=\"" << px(lx + 14) << "\" y=\"" << px(top + 9) << "\">same language</text>\n"
      << "<rect x=\"" << px(lx) << "\" y=\"" << px(top + 16) << "\" width=\"10\" height=\"10\" fill=\"#c8843c\"/>"
      << "<text x=\"" << px(lx + 14) << "\" y=\"" << px(top + 25) << "\">cross-lingual</text>\n";
  out << "</svg>\n";
  return out.str();
}

// --- figure 3 ---

std::string dendrogram_svg(const std::vector<std::pair<std::string, std::string>>& trees) {
  const double leaf_gap = 6, top = 30, h = 220, panel_gap = 40;
  std::vector<json> docs;
  double total_w = panel_gap;
  for (const auto& [name, text] : trees) {
    docs.push_back(json::parse(text));
    total_w += docs.back()["leaf_count"].get<double>() * leaf_gap + panel_gap;
  }
  std::ostringstream out;
  out << svg_open(std::max(total_w, 100.0), top + h + 40);
  double x0 = panel_gap;
  for (std::size_t t = 0; t < docs.size(); ++t) {
    const json& root = docs[t]["root"];
    const double max_h = std::max(root["height"].get<double>(), 1e-12);
    auto y = [&](double height) { return top + h - height / max_h * h; };
    std::size_t next_leaf = 0;
    out << "<g class=\"dendrogram\" data-name=\"" << trees[t].first << "\">\n";
    // Returns the x position of the node; leaves are laid out left to right.
    std::function<double(const json&)> draw = [&](const json& node) -> double {
      if (!node.contains("children")) {
        const double x = x0 + static_cast<double>(next_leaf++) * leaf_gap;
        const std::string label = node.value("label", std::string());
        auto parts = split(label, ':');
        std::string fill = "#000000";
        if (parts.size() == 3) fill = colour(parse_language(parts[1]));
        out << "<circle class=\"leaf\" data-label=\"" << label << "\" cx=\"" << px(x) << "\" cy=\""
            << px(y(0.0) + 4) << "\" r=\"2.5\" fill=\"" << fill << "\"/>\n";
        return x;
      }
      const double xa = draw(node["children"][0]);
      const double xb = draw(node["children"][1]);
      const double ya = y(node["children"][0]["height"].get<double>());
      const double yb = y(node["children"][1]["height"].get<double>());
      const double ym = y(node["height"].get<double>());
      out << "<path class=\"link\" data-height=\"" << format_double(node["height"].get<double>())
          << "\" d=\"M" << px(xa) << " " << px(ya) << "V" << px(ym) << "H" << px(xb) << "V" << px(yb)
          << "\" fill=\"none\" stroke=\"#333\"/>\n";
      return (xa + xb) / 2;
    };
    draw(root);
    out << "<text x=\"" << px(x0) << "\" y=\"" << px(top - 10) << "\">" << trees[t].first << "</text>\n";
    out << "</g>\n";
    x0 += docs[t]["leaf_count"].get<double>() * leaf_gap + panel_gap;
  }
  out << "</svg>\n";
  return out.str();
}

// --- figure 4 ---

std::string lda_svg(const std::string& lda_csv) {
  struct Point {
    Language lang;
    std::string fold, ld1, ld2;
  };
  std::map<std::size_t, std::pair<std::string, std::vector<Point>>> panels;
  std::istringstream in(lda_csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 5) throw ParseError("lda coordinates: expected 5 fields");
    auto& p = panels[probes::feature_rank(f[0])];
    p.first = f[0];
    p.second.push_back({parse_language(f[1]), f[2], f[3], f[4]});
  }
  const double cell = 160, pad = 30;
  const std::size_t cols = 4, rows = (panels.size() + cols - 1) / cols;
  std::ostringstream out;
  out << svg_open(cols * (cell + pad) + pad, rows * (cell + pad) + pad);
  std::size_t k = 0;
  for (const auto& [rank, panel] : panels) {
    const double ox = pad + (k % cols) * (cell + pad), oy = pad + (k / cols) * (cell + pad);
    ++k;
    double lo1 = 1e300, hi1 = -1e300, lo2 = 1e300, hi2 = -1e300;
    for (const auto& p : panel.second) {
      double a = std::stod(p.ld1), b = std::stod(p.ld2);
      lo1 = std::min(lo1, a), hi1 = std::max(hi1, a), lo2 = std::min(lo2, b), hi2 = std::max(hi2, b);
    }
    const double s1 = hi1 > lo1 ? hi1 - lo1 : 1.0, s2 = hi2 > lo2 ? hi2 - lo2 : 1.0;
    out << "<g class=\"panel\" data-feature=\"" << panel.first << "\">\n<rect x=\"" << px(ox) << "\" y=\""
        << px(oy) << "\" width=\"" << px(cell) << "\" height=\"" << px(cell)
        << "\" fill=\"none\" stroke=\"#999\"/>\n<text x=\"" << px(ox) << "\" y=\"" << px(oy - 4)
        << "\">" << probes::short_label(panel.first) << "</text>\n";
    for (const auto& p : panel.second) {
      const double x = ox + 5 + (std::stod(p.ld1) - lo1) / s1 * (cell - 10);
      const double y = oy + cell - 5 - (std::stod(p.ld2) - lo2) / s2 * (cell - 10);
      out << "<circle class=\"point\" data-language=\"" << to_string(p.lang) << "\" data-fold=\""
          << p.fold << "\" data-ld1=\"" << p.ld1 << "\" data-ld2=\"" << p.ld2 << "\" cx=\"" << px(x)
          << "\" cy=\"" << px(y) << "\" r=\"2.5\" fill=\"" << colour(p.lang) << "\"/>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

// --- all of it ---

std::vector<std::string> write_report(const RunConfig& cfg, const std::string& dir) {
  const auto ingest_dir = fs::path(stage_dir(cfg, Stage::ingest));
  const auto eval_dir = fs::path(stage_dir(cfg, Stage::evaluate));
  const auto cluster_dir = fs::path(stage_dir(cfg, Stage::cluster));
  auto tokens = parse_tokens(read_file((ingest_dir / "tokens.csv").string()));
  auto cells = eval::parse_scorecells(read_file((eval_dir / "scorecells.csv").string()));
  const std::string lda = read_file((cluster_dir / "lda_coords.csv").string());
  const json summary = json::parse(read_file((cluster_dir / "summary.json").string()));

  std::vector<std::pair<std::string, std::string>> files;

  auto bars = per_language_bars(cells, cfg.ci);
  files.emplace_back("fig1_per_language_bars.csv", bars_csv(bars));
  files.emplace_back("fig1_per_language_bars.svg", bars_svg(bars));

  std::vector<eval::PooledComparison> pooled;
  for (const auto& f : features_in(cells)) {
    eval::CiOptions ci = cfg.ci;
    ci.seed = derive_seed(cfg.seed, {"ci", f});
    pooled.push_back(eval::pool_comparison(cells, f, ci, cfg.macro_cross));
  }
  files.emplace_back("fig2_pooled.csv", eval::pooled_csv(pooled));
  files.emplace_back("fig2_pooled.svg", pooled_svg(pooled));

  std::vector<std::pair<std::string, std::string>> trees;
  json fig3;
  fig3["trees"] = json::array();
  if (summary.contains("dendrograms")) {
    for (const auto& [feature, d] : summary["dendrograms"].items()) {
      std::string text = read_file((cluster_dir / d["file"].get<std::string>()).string());
      trees.emplace_back(feature, text);
      fig3["trees"].push_back({{"feature", feature}, {"role", d["role"]},
                               {"first_split_purity", d["first_split_purity"]},
                               {"tree", json::parse(text)}});
    }
  }
  std::stable_sort(trees.begin(), trees.end(), [](const auto& a, const auto& b) {
    return probes::feature_rank(a.first) < probes::feature_rank(b.first);
  });
  files.emplace_back("fig3_dendrogram.json", fig3.dump(1) + "\n");
  files.emplace_back("fig3_dendrogram.svg", dendrogram_svg(trees));

  files.emplace_back("fig4_lda.csv", lda);
  files.emplace_back("fig4_lda.svg", lda_svg(lda));

  std::vector<corpus::VowelToken> vts;
  for (const auto& t : tokens) vts.push_back(t.token);
  std::ostringstream table;
  table << "language,words,hours,pct_stress_first_syllable\n";
  for (const auto& [lang, st] : corpus::corpus_stats(vts))
    table << to_string(lang) << "," << st.word_count << "," << format_double(st.hours) << ","
          << format_double(st.pct_stress_first_syllable) << "\n";
  files.emplace_back("table1_stats.csv", table.str());

  fs::create_directories(dir);
  std::vector<std::string> out;
  for (const auto& [name, text] : files) {
    const std::string p = (fs::path(dir) / name).string();
    write_file(p, text);
    out.push_back(p);
  }
  return out;
}

}  // namespace stressprobe::pipeline
