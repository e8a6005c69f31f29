// src/evaluation.cpp

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

#include "stressprobe/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "stressprobe/parallel.hpp"
#include "stressprobe/rng.hpp"

namespace stressprobe::eval {

std::vector<FoldPlan> make_folds(const std::vector<std::string>& word_ids, int k,
                                 double train_frac, std::uint64_t seed) {
  std::vector<std::string> ids = word_ids;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 3)
    throw ContractError("make_folds needs at least 3 words, got " +
                        std::to_string(ids.size()));
  if (k < 1) throw ContractError("make_folds needs k >= 1");
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw ContractError("train fraction must lie strictly between 0 and 1");
  const auto n = static_cast<long long>(ids.size());
  long long n_train = std::llround(static_cast<double>(n) * train_frac);
  n_train = std::clamp<long long>(n_train, 1, n - 1);

  std::vector<FoldPlan> folds;
  for (int f = 0; f < k; ++f) {
    FoldPlan plan;
    plan.fold_index = f;
    plan.seed = derive_seed(seed, {"fold", std::to_string(f)});
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(plan.seed);
    rng.shuffle(order);
    for (long long i = 0; i < n; ++i) {
      auto& dest = i < n_train ? plan.train_word_ids : plan.test_word_ids;
      dest.push_back(ids[order[static_cast<std::size_t>(i)]]);
    }
    std::sort(plan.train_word_ids.begin(), plan.train_word_ids.end());
    std::sort(plan.test_word_ids.begin(), plan.test_word_ids.end());
    folds.push_back(std::move(plan));
  }
  return folds;
}

namespace {

std::vector<std::size_t> rows_for(const probes::Dataset& d,
                                  const std::vector<std::string>& words) {
  std::unordered_set<std::string> wanted(words.begin(), words.end());
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (wanted.count(d.word_ids[i])) rows.push_back(i);
  return rows;
}

}  // namespace

std::vector<ScoreCell> run_matrix(const DatasetMap& datasets,
                                  const std::string& feature_name,
                                  const FoldMap& folds,
                                  const MatrixOptions& opt) {
  const auto& langs = opt.languages;
  if (langs.empty()) throw ConfigError("run_matrix: no languages configured");
  for (Language l : langs) {
    if (!datasets.count(l))
      throw ConfigError("no " + std::string(to_string(l)) + " dataset for feature '" +
                        feature_name + "'");
    if (!folds.count(l) || folds.at(l).empty())
      throw ConfigError("no fold plan for " + std::string(to_string(l)));
    datasets.at(l).validate();
  }

  struct Job {
    Language lang;
    const FoldPlan* fold;
  };
  std::vector<Job> jobs;
  for (Language l : langs)
    for (const auto& f : folds.at(l)) jobs.push_back({l, &f});

  if (!opt.probe_dir.empty()) std::filesystem::create_directories(opt.probe_dir);

  const std::size_t per_job = langs.size();
  std::vector<ScoreCell> cells(jobs.size() * per_job);
  parallel_for(jobs.size(), opt.jobs, [&](std::size_t j) {
    const Job& job = jobs[j];
    const probes::Dataset& own = datasets.at(job.lang);
    const std::string code(to_string(job.lang));
    probes::Dataset train = own.subset(rows_for(own, job.fold->train_word_ids));
    probes::Dataset held_out = own.subset(rows_for(own, job.fold->test_word_ids));

    std::unordered_set<std::string> train_tokens(train.token_ids.begin(),
                                                 train.token_ids.end());
    for (const auto& t : held_out.token_ids)
      if (train_tokens.count(t))
        throw Error("train/test leakage: token '" + t + "' in fold " +
                    std::to_string(job.fold->fold_index) + " of " + code);

    probes::Provenance prov{feature_name, job.lang, job.fold->fold_index,
                            derive_seed(opt.seed, {"probe", feature_name, code,
                                                   std::to_string(job.fold->fold_index)})};
    probes::Probe probe = probes::fit_probe(train, prov, opt.probe);
    if (!opt.probe_dir.empty())
      write_file(opt.probe_dir + "/" + code + "_" +
                     std::to_string(job.fold->fold_index) + ".json",
                 probes::serialize_probe(probe));

    for (std::size_t t = 0; t < langs.size(); ++t) {
      const probes::Dataset& test = langs[t] == job.lang ? held_out : datasets.at(langs[t]);
      ScoreCell& cell = cells[j * per_job + t];
      cell.train_language = job.lang;
      cell.test_language = langs[t];
      cell.feature_name = feature_name;
      cell.fold_index = job.fold->fold_index;
      cell.n_test = test.size();
      cell.mcc = test.size() == 0
                     ? 0.0
                     : probes::mcc(probes::confusion(test.y, probes::probe_predict(probe, test.X)));
    }
  });
  return cells;
}

namespace {

MeanCi bca_interval(std::span<const double> x, double mean, const CiOptions& opts) {
  const std::size_t n = x.size();
  const double alpha = 1.0 - opts.level;
  Rng rng(opts.seed);
  std::vector<double> boot(static_cast<std::size_t>(opts.resamples));
  for (auto& b : boot) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[rng.below(n)];
    b = acc / static_cast<double>(n);
  }
  std::sort(boot.begin(), boot.end());
  boost::math::normal_distribution<double> norm;
  auto below = static_cast<double>(std::lower_bound(boot.begin(), boot.end(), mean) - boot.begin());
  double prop = std::clamp(below / static_cast<double>(boot.size()), 1e-6, 1.0 - 1e-6);
  double z0 = boost::math::quantile(norm, prop);

  double total = std::accumulate(x.begin(), x.end(), 0.0);
  std::vector<double> jack(n);
  for (std::size_t i = 0; i < n; ++i) jack[i] = (total - x[i]) / static_cast<double>(n - 1);
  double jmean = std::accumulate(jack.begin(), jack.end(), 0.0) / static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (double j : jack) {
    double d = jmean - j;
    num += d * d * d;
    den += d * d;
  }
  double accel = den > 0.0 ? num / (6.0 * std::pow(den, 1.5)) : 0.0;

  auto adjusted = [&](double q) {
    double z = boost::math::quantile(norm, q);
    double a = boost::math::cdf(norm, z0 + (z0 + z) / (1.0 - accel * (z0 + z)));
    auto idx = static_cast<std::size_t>(
        std::clamp(std::floor(a * static_cast<double>(boot.size())), 0.0,
                   static_cast<double>(boot.size() - 1)));
    return boot[idx];
  };
  MeanCi out{mean, adjusted(alpha / 2.0), adjusted(1.0 - alpha / 2.0), n};
  out.lo = std::min(out.lo, mean);
  out.hi = std::max(out.hi, mean);
  return out;
}

}  // namespace

MeanCi pooled_ci(std::span<const double> x, const CiOptions& opts) {
  const std::size_t n = x.size();
  if (n < 2) throw ContractError("a confidence interval needs at least 2 scores");
  if (!(opts.level > 0.0 && opts.level < 1.0))
    throw ContractError("confidence level must be in (0, 1)");
  double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  bool constant = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
  if (constant) return {x[0], x[0], x[0], n};
  if (opts.method == CiMethod::bca_bootstrap) return bca_interval(x, mean, opts);
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / static_cast<double>(n - 1));
  boost::math::students_t_distribution<double> t(static_cast<double>(n - 1));
  double crit = boost::math::quantile(t, 1.0 - (1.0 - opts.level) / 2.0);
  double half = crit * sd / std::sqrt(static_cast<double>(n));
  return {mean, mean - half, mean + half, n};
}

PooledComparison pool_comparison(const std::vector<ScoreCell>& cells,
                                 const std::string& feature_name,
                                 const CiOptions& opts, bool macro) {
  std::vector<double> target, cross;
  std::map<std::pair<Language, int>, std::pair<double, int>> per_probe;
  for (const auto& c : cells) {
    if (c.feature_name != feature_name) continue;
    if (c.train_language == c.test_language) {
      target.push_back(c.mcc);
    } else if (macro) {
      auto& acc = per_probe[{c.train_language, c.fold_index}];
      acc.first += c.mcc;
      acc.second += 1;
    } else {
      cross.push_back(c.mcc);
    }
  }
  if (macro)
    for (const auto& [key, acc] : per_probe) cross.push_back(acc.first / acc.second);
  if (target.empty())
    throw ContractError("no language-specific cells for feature '" + feature_name + "'");
  if (cross.empty())
    throw ContractError("no cross-lingual cells for feature '" + feature_name + "'");
  return {feature_name, pooled_ci(target, opts), pooled_ci(cross, opts)};
}

std::string scorecells_csv(const std::vector<ScoreCell>& cells) {
  std::ostringstream out;
  out << "train_language,test_language,feature,fold,mcc\n";
  for (const auto& c : cells)
    out << to_string(c.train_language) << "," << to_string(c.test_language) << ","
        << c.feature_name << "," << c.fold_index << "," << format_double(c.mcc) << "\n";
  return out.str();
}

std::vector<ScoreCell> parse_scorecells(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      trim(line) != "train_language,test_language,feature,fold,mcc")
    throw ParseError("scorecells: unexpected header");
  std::vector<ScoreCell> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto c = split(trim(line), ',');
    if (c.size() != 5)
      throw ParseError("scorecells line " + std::to_string(lineno) + ": expected 5 columns");
    ScoreCell cell;
    cell.train_language = parse_language(c[0]);
    cell.test_language = parse_language(c[1]);
    cell.feature_name = c[2];
    try {
      cell.fold_index = std::stoi(c[3]);
      cell.mcc = std::stod(c[4]);
    } catch (const std::logic_error&) {
      throw ParseError("scorecells line " + std::to_string(lineno) + ": bad number");
    }
    out.push_back(std::move(cell));
  }
  return out;
}

std::string pooled_csv(const std::vector<PooledComparison>& rows) {
  std::ostringstream out;
  out << "feature,mean_target,lo_target,hi_target,n_target,mean_cross,lo_cross,"
         "hi_cross,n_cross\n";
  for (const auto& r : rows)
    out << r.feature_name << "," << format_double(r.target.mean) << ","
        << format_double(r.target.lo) << "," << format_double(r.target.hi) << ","
        << r.target.n << "," << format_double(r.cross.mean) << ","
        << format_double(r.cross.lo) << "," << format_double(r.cross.hi) << ","
        << r.cross.n << "\n";
  return out.str();
}

}  // namespace stressprobe::eval
