// src/pipeline.cpp

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

#include "stressprobe/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "stressprobe/clustering.hpp"
#include "stressprobe/parallel.hpp"
#include "stressprobe/report.hpp"
#include "stressprobe/rng.hpp"
#include "stressprobe/wav.hpp"

namespace stressprobe::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// --- csv helpers ---

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw ParseError("unterminated quote in CSV row");
  out.push_back(std::move(cur));
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw ParseError("");
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + s + "' in " + what);
  }
}

std::size_t to_index(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw ParseError("");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ParseError("bad index '" + s + "' in " + what);
  }
}

// Runs `fn`, prefixing any error message with `context` while keeping the
// validation/runtime distinction.
template <typename Fn>
auto with_context(const std::string& context, Fn&& fn) {
  try {
    return fn();
  } catch (const MissingStageError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(context + ": " + e.what());
  } catch (const Error& e) {
    throw Error(context + ": " + e.what());
  }
}

std::vector<std::string> alignment_files(const std::string& path) {
  if (!fs::is_directory(path)) return {path};
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(path)) {
    auto ext = e.path().extension().string();
    if (e.is_regular_file() && (ext == ".json" || ext == ".jsonl")) out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw ConfigError("no alignment files under " + path);
  return out;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_hash(const std::string& path) { return hex64(fnv1a(read_file(path))); }

void log_line(const StageOptions& o, const std::string& s) {
  if (o.log) *o.log << s << "\n";
}

}  // namespace

// --- token table ---

namespace {
constexpr const char* kTokenHeader =
    "token_id,language,utterance_id,word_index,syllable_index,orthography,phone,"
    "start,end,word_start,word_end,stress,audio_path";
}

std::string tokens_csv(const std::vector<TokenRow>& rows) {
  std::ostringstream out;
  out << kTokenHeader << "\n";
  for (const auto& r : rows) {
    const auto& t = r.token;
    out << csv_field(t.token_id()) << "," << to_string(t.language) << ","
        << csv_field(t.utterance_id) << "," << t.word_index << "," << t.syllable_index << ","
        << csv_field(r.orthography) << "," << csv_field(t.phone_label) << ","
        << format_double(t.interval.start) << "," << format_double(t.interval.end) << ","
        << format_double(t.word_interval.start) << "," << format_double(t.word_interval.end)
        << "," << to_string(t.stress) << "," << csv_field(r.audio_path) << "\n";
  }
  return out.str();
}

std::vector<TokenRow> parse_tokens(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != kTokenHeader)
    throw ParseError("token table: unexpected header");
  std::vector<TokenRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = "token table line " + std::to_string(lineno);
    auto f = csv_row(line);
    if (f.size() != 13) throw ParseError(where + ": expected 13 fields");
    TokenRow r;
    auto& t = r.token;
    t.language = parse_language(f[1]);
    t.utterance_id = f[2];
    t.word_index = to_index(f[3], where);
    t.syllable_index = static_cast<int>(to_index(f[4], where));
    r.orthography = f[5];
    t.phone_label = f[6];
    t.interval = {to_double(f[7], where), to_double(f[8], where)};
    t.word_interval = {to_double(f[9], where), to_double(f[10], where)};
    t.stress = parse_stress(f[11]);
    r.audio_path = f[12];
    if (t.token_id() != f[0]) throw ParseError(where + ": token id does not match its fields");
    rows.push_back(std::move(r));
  }
  return rows;
}

// --- ingest ---

IngestResult ingest(const RunConfig& cfg) {
  if (cfg.corpora.empty()) throw ConfigError("config lists no corpora");
  IngestResult res;
  std::set<std::string> seen_utts;
  for (const auto& in : cfg.corpora) {
    const std::string code(to_string(in.language));
    auto inv = with_context(in.inventory, [&] { return corpus::load_inventory(in.inventory); });
    if (inv.language != in.language)
      throw ConfigError(in.inventory + ": inventory is for " + std::string(to_string(inv.language)) +
                        ", configured for " + code);
    res.inputs.push_back(in.inventory);
    label::Lexicon lexicon;
    if (!is_fixed_stress(in.language)) {
      lexicon = with_context(in.lexicon, [&] { return label::load_lexicon(in.lexicon); });
      res.inputs.push_back(in.lexicon);
    }
    label::SymbolMap symbols;
    if (!in.symbol_map.empty()) {
      symbols = with_context(in.symbol_map, [&] { return label::load_symbol_map(in.symbol_map); });
      res.inputs.push_back(in.symbol_map);
    }
    auto& counts = res.report[in.language];
    counts["labeled"] += 0;

    for (const auto& file : alignment_files(in.alignments)) {
      res.inputs.push_back(file);
      auto utts = with_context(file, [&] { return corpus::parse_alignment_file(file); });
      for (const auto& utt : utts) {
        const std::string ctx = file + " (utterance " + utt.id + ")";
        if (utt.language != in.language)
          throw DataConsistencyError(ctx + ": language " + std::string(to_string(utt.language)) +
                                     " in the " + code + " corpus");
        if (!seen_utts.insert(utt.id).second)
          throw DataConsistencyError(ctx + ": duplicate utterance id");
        const std::string audio_path = (fs::path(in.audio_root) / utt.audio_path).lexically_normal().string();
        auto sel = with_context(ctx, [&] {
          AudioSegment audio = load_audio(audio_path);
          if (audio.sample_rate != utt.sample_rate)
            throw DataConsistencyError("sample rate " + std::to_string(audio.sample_rate) +
                                       " in " + audio_path + ", alignment says " +
                                       std::to_string(utt.sample_rate));
          corpus::validate(utt, audio.duration());
          return corpus::select_bisyllabic(utt, inv, cfg.strict_selection);
        });
        for (const auto& issue : sel.issues) {
          res.unlabeled.push_back({in.language, utt.id, issue.word_index,
                                   utt.words[issue.word_index].orthography, "selection",
                                   issue.message});
          ++counts["selection"];
        }
        for (const auto& w : sel.words) {
          label::LabelOutcome outcome =
              is_fixed_stress(in.language)
                  ? label::LabelOutcome{label::label_fixed(*w.word, in.language)}
                  : label::label_lexical(*w.word, lexicon, cfg.scoring,
                                         in.symbol_map.empty() ? nullptr : &symbols);
          if (auto* u = std::get_if<label::Unlabeled>(&outcome)) {
            const std::string reason(label::to_string(u->reason));
            res.unlabeled.push_back({in.language, utt.id, w.word_index, w.word->orthography,
                                     reason, ""});
            ++counts[reason];
            continue;
          }
          const auto& labels = std::get<label::StressLabels>(outcome);
          TokenRow a{w.first, w.word->orthography, audio_path};
          TokenRow b{w.second, w.word->orthography, audio_path};
          a.token.stress = labels.first;
          b.token.stress = labels.second;
          res.tokens.push_back(std::move(a));
          res.tokens.push_back(std::move(b));
          ++counts["labeled"];
        }
      }
    }
  }
  return res;
}

std::string labeling_report_csv(const IngestResult& r) {
  std::ostringstream out;
  out << "language,outcome,words\n";
  for (const auto& [lang, counts] : r.report)
    for (const auto& [reason, n] : counts) out << to_string(lang) << "," << reason << "," << n << "\n";
  return out.str();
}

std::string unlabeled_csv(const std::vector<UnlabeledWord>& rows) {
  std::ostringstream out;
  out << "language,utterance_id,word_index,orthography,reason,detail\n";
  for (const auto& r : rows)
    out << to_string(r.language) << "," << csv_field(r.utterance_id) << "," << r.word_index
        << "," << csv_field(r.orthography) << "," << r.reason << "," << csv_field(r.detail)
        << "\n";
  return out.str();
}

// --- features ---

namespace {

// Token indices grouped by audio file, groups in first-appearance order.
std::vector<std::vector<std::size_t>> group_by_audio(const std::vector<TokenRow>& tokens) {
  std::vector<std::vector<std::size_t>> groups;
  std::unordered_map<std::string, std::size_t> where;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto [it, fresh] = where.emplace(tokens[i].audio_path, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

std::vector<std::vector<std::size_t>> group_by_utterance(const std::vector<TokenRow>& tokens) {
  std::vector<std::vector<std::size_t>> groups;
  std::unordered_map<std::string, std::size_t> where;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto [it, fresh] = where.emplace(tokens[i].token.utterance_id, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

}  // namespace

std::vector<acoustic::FeatureRow> extract_features(const std::vector<TokenRow>& tokens,
                                                   const acoustic::FeatureConfig& cfg,
                                                   int jobs) {
  std::vector<acoustic::FeatureRow> rows(tokens.size());
  const auto groups = group_by_audio(tokens);
  parallel_for(groups.size(), jobs, [&](std::size_t g) {
    const std::string& path = tokens[groups[g].front()].audio_path;
    AudioSegment audio = with_context(path, [&] { return load_audio(path); });
    for (std::size_t i : groups[g]) {
      const auto& t = tokens[i].token;
      rows[i].token_id = t.token_id();
      rows[i].language = t.language;
      rows[i].stress = t.stress;
      rows[i].features = acoustic::measure_token(t, audio.slice(t.interval), audio.sample_rate, cfg);
    }
  });

  std::map<Language, acoustic::FormantAccumulator> acc;
  for (const auto& r : rows)
    if (r.features.formants) acc[r.language].add(*r.features.formants);
  std::map<Language, acoustic::LanguageFormantStats> stats;
  for (const auto& [lang, a] : acc) stats[lang] = a.finalize(lang);
  for (auto& r : rows)
    if (r.features.formants)
      r.features.peripherality = acoustic::formant_peripherality(
          r.features.formants->f1, r.features.formants->f2, stats.at(r.language));
  return rows;
}

// --- pooling ---

PoolResult pool_layer(const std::vector<TokenRow>& tokens, const std::string& dir,
                      const std::string& layer, const embed::FrameTiming& timing, int jobs) {
  const auto groups = group_by_utterance(tokens);
  std::vector<std::optional<embed::PooledEmbedding>> slots(tokens.size());
  parallel_for(groups.size(), jobs, [&](std::size_t g) {
    const std::string& utt = tokens[groups[g].front()].token.utterance_id;
    with_context("embeddings for utterance " + utt, [&] {
      auto meta = embed::read_meta(dir, utt);
      embed::FrameTiming t = timing;
      t.window = meta.frame_window_s;
      t.stride = meta.frame_stride_s;
      auto tensor = embed::read_layer(dir, utt, layer);
      for (std::size_t i : groups[g]) {
        auto idx = embed::frame_span(tokens[i].token.interval, t, tensor.num_frames());
        if (idx.empty()) continue;
        auto p = embed::pool(tensor, idx);
        p.token_id = tokens[i].token.token_id();
        slots[i] = std::move(p);
      }
      return 0;
    });
  });
  PoolResult res;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (slots[i]) res.pooled.push_back(std::move(*slots[i]));
    else res.no_frames.push_back(tokens[i].token.token_id());
  }
  return res;
}

std::string pooled_table_csv(const std::vector<embed::PooledEmbedding>& rows) {
  std::ostringstream out;
  const std::size_t dim = rows.empty() ? 0 : rows.front().vector.size();
  out << "token_id,n_frames";
  for (std::size_t j = 0; j < dim; ++j) out << ",v" << j;
  out << "\n";
  for (const auto& r : rows) {
    if (r.vector.size() != dim) throw ContractError("pooled vectors of different dimension");
    out << csv_field(r.token_id) << "," << r.n_frames_pooled;
    for (double v : r.vector) out << "," << format_double(v);
    out << "\n";
  }
  return out.str();
}

std::vector<embed::PooledEmbedding> parse_pooled_table(const std::string& csv_text,
                                                       const std::string& layer) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("pooled table: empty");
  const auto header = csv_row(line);
  if (header.size() < 2 || header[0] != "token_id" || header[1] != "n_frames")
    throw ParseError("pooled table: unexpected header");
  const std::size_t dim = header.size() - 2;
  std::vector<embed::PooledEmbedding> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = "pooled table line " + std::to_string(lineno);
    auto f = csv_row(line);
    if (f.size() != dim + 2) throw ParseError(where + ": wrong field count");
    embed::PooledEmbedding p;
    p.token_id = f[0];
    p.layer_name = layer;
    p.n_frames_pooled = to_index(f[1], where);
    p.vector.reserve(dim);
    for (std::size_t j = 0; j < dim; ++j) p.vector.push_back(to_double(f[j + 2], where));
    rows.push_back(std::move(p));
  }
  return rows;
}

// --- datasets ---

namespace {

using Vec = std::vector<double>;

// The feature vector of one token, or the reason it has none.
std::variant<Vec, std::string> acoustic_vector(const std::string& name,
                                               const acoustic::AcousticFeatures& f) {
  auto need = [](const auto& opt, const char* what) -> std::variant<Vec, std::string> {
    if (!opt) return std::string(what) + " undefined";
    return Vec{};
  };
  if (name == "duration") return Vec{f.duration};
  if (name == "intensity") {
    if (!f.intensity) return need(f.intensity, "intensity");
    return Vec{*f.intensity};
  }
  if (name == "pitch") {
    if (!f.pitch) return need(f.pitch, "pitch");
    return Vec{*f.pitch};
  }
  if (name == "formants") {
    // The formant feature is peripherality, a scalar.
    if (!f.peripherality) return need(f.peripherality, "formant peripherality");
    return Vec{*f.peripherality};
  }
  if (name == "spectral_tilt") {
    if (!f.tilt) return need(f.tilt, "spectral tilt");
    return Vec(f.tilt->begin(), f.tilt->end());
  }
  if (name == "combined") {
    try {
      auto c = acoustic::combined(f);
      return Vec(c.begin(), c.end());
    } catch (const UndefinedFeatureError& e) {
      return std::string(e.what());
    }
  }
  throw ConfigError("'" + name + "' is not an acoustic feature");
}

}  // namespace

eval::DatasetMap build_datasets(const std::string& feature_name,
                                const std::vector<TokenRow>& tokens,
                                const std::vector<acoustic::FeatureRow>* features,
                                const std::vector<embed::PooledEmbedding>* pooled,
                                std::vector<Exclusion>* exclusions) {
  const bool acoustic_feature = probes::is_acoustic(feature_name);
  if (acoustic_feature && !features)
    throw ContractError("build_datasets: acoustic feature without a feature table");
  if (!acoustic_feature && !pooled)
    throw ContractError("build_datasets: layer without pooled embeddings");

  std::unordered_map<std::string, std::size_t> index;
  if (acoustic_feature)
    for (std::size_t i = 0; i < features->size(); ++i) index.emplace((*features)[i].token_id, i);
  else
    for (std::size_t i = 0; i < pooled->size(); ++i) index.emplace((*pooled)[i].token_id, i);

  auto vector_of = [&](const TokenRow& r) -> std::variant<Vec, std::string> {
    auto it = index.find(r.token.token_id());
    if (it == index.end()) return std::string(acoustic_feature ? "not measured" : "no frames");
    if (acoustic_feature) return acoustic_vector(feature_name, (*features)[it->second].features);
    return (*pooled)[it->second].vector;
  };

  struct Rows {
    std::vector<Vec> x;
    std::vector<int> y;
    std::vector<std::string> tokens, words;
  };
  std::map<Language, Rows> acc;
  std::size_t dim = 0;
  for (std::size_t i = 0; i < tokens.size();) {
    const std::string word = tokens[i].token.word_id();
    std::size_t j = i;
    while (j < tokens.size() && tokens[j].token.word_id() == word) ++j;
    if (j - i != 2)
      throw DataConsistencyError("word " + word + " has " + std::to_string(j - i) +
                                 " tokens in the token table, expected 2");
    const TokenRow& a = tokens[i];
    const TokenRow& b = tokens[i + 1];
    if (a.token.stress == b.token.stress || a.token.stress == Stress::unknown ||
        b.token.stress == Stress::unknown)
      throw DataConsistencyError("word " + word + " is not labeled with one stressed vowel");
    auto va = vector_of(a), vb = vector_of(b);
    std::string reason;
    if (auto* s = std::get_if<std::string>(&va)) reason = *s;
    else if (auto* s2 = std::get_if<std::string>(&vb)) reason = *s2;
    if (!reason.empty()) {
      if (exclusions) exclusions->push_back({word, feature_name, reason});
    } else {
      auto& rows = acc[a.token.language];
      for (const TokenRow* r : {&a, &b}) {
        Vec v = std::get<Vec>(r == &a ? va : vb);
        if (dim == 0) dim = v.size();
        if (v.size() != dim) throw DataConsistencyError("inconsistent vector length for " + feature_name);
        rows.x.push_back(std::move(v));
        rows.y.push_back(r->token.stress == Stress::stressed ? 1 : 0);
        rows.tokens.push_back(r->token.token_id());
        rows.words.push_back(word);
      }
    }
    i = j;
  }

  eval::DatasetMap out;
  for (auto& [lang, rows] : acc) {
    probes::Dataset d;
    d.feature_name = feature_name;
    d.language = lang;
    d.X.resize(static_cast<Eigen::Index>(rows.x.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < rows.x.size(); ++r)
      for (std::size_t c = 0; c < dim; ++c)
        d.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows.x[r][c];
    d.y = std::move(rows.y);
    d.token_ids = std::move(rows.tokens);
    d.word_ids = std::move(rows.words);
    if (d.count_label(1) != d.count_label(0))
      throw DataConsistencyError("unbalanced dataset for " + feature_name);
    out.emplace(lang, std::move(d));
  }
  return out;
}

std::vector<eval::FoldPlan> folds_for(const probes::Dataset& d, const RunConfig& cfg) {
  std::vector<std::string> words(d.word_ids);
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  return eval::make_folds(words, cfg.k, cfg.train_fraction,
                          derive_seed(cfg.seed, {"folds", std::string(to_string(d.language))}));
}

// --- stages ---

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::ingest: return "ingest";
    case Stage::features: return "features";
    case Stage::pool: return "pool";
    case Stage::evaluate: return "evaluate";
    case Stage::cluster: return "cluster";
    case Stage::report: return "report";
  }
  return "?";
}

Stage parse_stage(std::string_view name) {
  for (Stage s : {Stage::ingest, Stage::features, Stage::pool, Stage::evaluate, Stage::cluster,
                  Stage::report})
    if (to_string(s) == name) return s;
  throw ConfigError("unknown stage '" + std::string(name) + "'");
}

std::string stage_dir(const RunConfig& cfg, Stage s) {
  return (fs::path(cfg.output) / std::string(to_string(s))).string();
}

namespace {

std::string artifact(const RunConfig& cfg, Stage s, const std::string& name) {
  return (fs::path(stage_dir(cfg, s)) / name).string();
}

void require_artifact(const RunConfig& cfg, Stage producer, const std::string& name,
                      Stage consumer) {
  const std::string path = artifact(cfg, producer, name);
  if (!fs::exists(path))
    throw MissingStageError("'" + std::string(to_string(consumer)) + "' needs " + path +
                            "; run the '" + std::string(to_string(producer)) + "' stage first");
}

std::vector<TokenRow> load_tokens(const RunConfig& cfg, Stage consumer) {
  require_artifact(cfg, Stage::ingest, "tokens.csv", consumer);
  return parse_tokens(read_file(artifact(cfg, Stage::ingest, "tokens.csv")));
}

std::string layer_file(const std::string& layer) { return "pooled_" + layer + ".csv"; }

// Input files of a stage. Prerequisites are checked here too, so a missing
// stage is reported before anything runs.
std::vector<std::string> stage_inputs(Stage s, const RunConfig& cfg) {
  std::vector<std::string> in;
  switch (s) {
    case Stage::ingest:
      for (const auto& c : cfg.corpora) {
        for (const auto& f : alignment_files(c.alignments)) in.push_back(f);
        in.push_back(c.inventory);
        if (!is_fixed_stress(c.language)) in.push_back(c.lexicon);
        if (!c.symbol_map.empty()) in.push_back(c.symbol_map);
      }
      break;
    case Stage::features: {
      auto tokens = load_tokens(cfg, s);
      in.push_back(artifact(cfg, Stage::ingest, "tokens.csv"));
      std::set<std::string> audio;
      for (const auto& t : tokens) audio.insert(t.audio_path);
      in.insert(in.end(), audio.begin(), audio.end());
      break;
    }
    case Stage::pool: {
      auto tokens = load_tokens(cfg, s);
      in.push_back(artifact(cfg, Stage::ingest, "tokens.csv"));
      if (cfg.layers().empty()) break;
      std::set<std::string> utts;
      for (const auto& t : tokens) utts.insert(t.token.utterance_id);
      for (const auto& u : utts) {
        const fs::path d = fs::path(cfg.embeddings) / u;
        if (!fs::exists(d / "meta.json"))
          throw NotFoundError("no embeddings for utterance " + u + " under " + cfg.embeddings);
        in.push_back((d / "meta.json").string());
        auto meta = embed::read_meta(cfg.embeddings, u);
        for (const auto& l : meta.layers) {
          auto layers = cfg.layers();
          if (std::find(layers.begin(), layers.end(), l.name) != layers.end())
            in.push_back((d / l.file).string());
        }
      }
      break;
    }
    case Stage::evaluate:
      require_artifact(cfg, Stage::ingest, "tokens.csv", s);
      in.push_back(artifact(cfg, Stage::ingest, "tokens.csv"));
      for (const auto& f : cfg.features) {
        if (probes::is_acoustic(f)) {
          require_artifact(cfg, Stage::features, "features.csv", s);
          in.push_back(artifact(cfg, Stage::features, "features.csv"));
        } else {
          require_artifact(cfg, Stage::pool, layer_file(f), s);
          in.push_back(artifact(cfg, Stage::pool, layer_file(f)));
        }
      }
      break;
    case Stage::cluster:
      require_artifact(cfg, Stage::evaluate, "scorecells.csv", s);
      in.push_back(artifact(cfg, Stage::evaluate, "scorecells.csv"));
      break;
    case Stage::report:
      require_artifact(cfg, Stage::ingest, "tokens.csv", s);
      require_artifact(cfg, Stage::evaluate, "scorecells.csv", s);
      require_artifact(cfg, Stage::cluster, "lda_coords.csv", s);
      require_artifact(cfg, Stage::cluster, "summary.json", s);
      in.push_back(artifact(cfg, Stage::ingest, "tokens.csv"));
      in.push_back(artifact(cfg, Stage::evaluate, "scorecells.csv"));
      for (const auto& e : fs::directory_iterator(stage_dir(cfg, Stage::cluster)))
        if (e.is_regular_file()) in.push_back(e.path().string());
      break;
  }
  std::sort(in.begin(), in.end());
  in.erase(std::unique(in.begin(), in.end()), in.end());
  return in;
}

std::string inputs_hash(Stage s, const RunConfig& cfg, const std::vector<std::string>& inputs) {
  std::uint64_t h = fnv1a(to_string(s));
  h = fnv1a(config_json(cfg), h);
  for (const auto& p : inputs) {
    h = fnv1a(p, h);
    h = fnv1a(file_hash(p), h);
  }
  return hex64(h);
}

fs::path manifest_path(const RunConfig& cfg) { return fs::path(cfg.output) / "manifest.json"; }

json read_manifest(const RunConfig& cfg) {
  const auto p = manifest_path(cfg);
  if (!fs::exists(p)) return json::object();
  try {
    return json::parse(read_file(p.string()));
  } catch (const json::exception&) {
    return json::object();  // rebuilt below
  }
}

bool up_to_date(const json& manifest, Stage s, const std::string& hash) {
  const std::string name(to_string(s));
  if (!manifest.contains("stages") || !manifest["stages"].contains(name)) return false;
  const auto& entry = manifest["stages"][name];
  if (entry.value("inputs_hash", "") != hash) return false;
  for (const auto& [path, digest] : entry["outputs"].items()) {
    if (!fs::exists(path) || file_hash(path) != digest.get<std::string>()) return false;
  }
  return true;
}

void record_stage(const RunConfig& cfg, Stage s, const std::string& hash,
                  const std::vector<std::string>& outputs, const std::vector<std::string>& inputs) {
  json m = read_manifest(cfg);
  m["config"] = json::parse(config_json(cfg));
  auto& entry = m["stages"][std::string(to_string(s))];
  entry = json::object();
  entry["inputs_hash"] = hash;
  json in = json::object(), out = json::object();
  for (const auto& p : inputs) in[p] = file_hash(p);
  for (const auto& p : outputs) out[p] = file_hash(p);
  entry["inputs"] = in;
  entry["outputs"] = out;
  write_file(manifest_path(cfg).string(), m.dump(2) + "\n");
}

using Outputs = std::vector<std::string>;

Outputs emit(const std::string& dir, const std::vector<std::pair<std::string, std::string>>& files) {
  fs::create_directories(dir);
  Outputs out;
  for (const auto& [name, text] : files) {
    const std::string p = (fs::path(dir) / name).string();
    write_file(p, text);
    out.push_back(p);
  }
  return out;
}

Outputs do_ingest(const RunConfig& cfg, const StageOptions& o) {
  auto r = ingest(cfg);
  for (const auto& [lang, counts] : r.report) {
    std::size_t unl = 0;
    for (const auto& [k, n] : counts)
      if (k != "labeled") unl += n;
    log_line(o, "ingest " + std::string(to_string(lang)) + ": " +
                    std::to_string(counts.at("labeled")) + " labeled words, " +
                    std::to_string(unl) + " not labeled");
  }
  return emit(stage_dir(cfg, Stage::ingest), {{"tokens.csv", tokens_csv(r.tokens)},
                                               {"labeling_report.csv", labeling_report_csv(r)},
                                               {"unlabeled.csv", unlabeled_csv(r.unlabeled)}});
}

Outputs do_features(const RunConfig& cfg, const StageOptions& o) {
  auto tokens = load_tokens(cfg, Stage::features);
  auto rows = extract_features(tokens, cfg.acoustic, cfg.jobs);
  std::ostringstream excl;
  excl << "token_id,feature,reason\n";
  std::size_t missing = 0;
  for (const auto& r : rows) {
    const auto& f = r.features;
    auto note = [&](bool ok, const char* name) {
      if (ok) return;
      excl << r.token_id << "," << name << ",undefined\n";
      ++missing;
    };
    note(f.intensity.has_value(), "intensity");
    note(f.pitch.has_value(), "pitch");
    note(f.tilt.has_value(), "spectral_tilt");
    note(f.formants.has_value(), "formants");
  }
  log_line(o, "features: " + std::to_string(rows.size()) + " tokens, " +
                  std::to_string(missing) + " undefined measurements");
  return emit(stage_dir(cfg, Stage::features),
              {{"features.csv", acoustic::feature_table_csv(rows)}, {"exclusions.csv", excl.str()}});
}

Outputs do_pool(const RunConfig& cfg, const StageOptions& o) {
  auto tokens = load_tokens(cfg, Stage::pool);
  std::vector<std::pair<std::string, std::string>> files;
  std::ostringstream missing;
  missing << "layer,token_id\n";
  for (const auto& layer : cfg.layers()) {
    auto r = pool_layer(tokens, cfg.embeddings, layer, cfg.timing, cfg.jobs);
    for (const auto& id : r.no_frames) missing << layer << "," << id << "\n";
    log_line(o, "pool " + layer + ": " + std::to_string(r.pooled.size()) + " tokens, " +
                    std::to_string(r.no_frames.size()) + " without frames");
    files.emplace_back(layer_file(layer), pooled_table_csv(r.pooled));
  }
  files.emplace_back("no_frames.csv", missing.str());
  return emit(stage_dir(cfg, Stage::pool), files);
}

Outputs do_evaluate(const RunConfig& cfg, const StageOptions& o) {
  auto tokens = load_tokens(cfg, Stage::evaluate);
  std::optional<std::vector<acoustic::FeatureRow>> feats;
  std::vector<eval::ScoreCell> cells;
  std::vector<eval::PooledComparison> pooled;
  std::vector<Exclusion> excl;
  std::ostringstream sizes;
  sizes << "feature,language,words,stressed,unstressed,dim\n";
  const auto langs = cfg.languages();

  for (const auto& feature : cfg.features) {
    eval::DatasetMap data;
    if (probes::is_acoustic(feature)) {
      if (!feats)
        feats = acoustic::parse_feature_table(read_file(artifact(cfg, Stage::features, "features.csv")));
      data = build_datasets(feature, tokens, &*feats, nullptr, &excl);
    } else {
      auto pooled_rows = parse_pooled_table(read_file(artifact(cfg, Stage::pool, layer_file(feature))), feature);
      data = build_datasets(feature, tokens, nullptr, &pooled_rows, &excl);
    }
    eval::FoldMap folds;
    for (Language l : langs) {
      auto it = data.find(l);
      if (it == data.end() || it->second.size() == 0)
        throw DataConsistencyError("no usable " + std::string(to_string(l)) + " words for feature '" +
                                   feature + "'");
      const auto& d = it->second;
      sizes << feature << "," << to_string(l) << "," << d.size() / 2 << "," << d.count_label(1)
            << "," << d.count_label(0) << "," << d.dim() << "\n";
      folds[l] = folds_for(d, cfg);
    }
    eval::MatrixOptions mo;
    mo.languages = langs;
    mo.probe = cfg.probe;
    mo.seed = cfg.seed;
    mo.jobs = cfg.jobs;
    if (cfg.save_probes) mo.probe_dir = artifact(cfg, Stage::evaluate, "probes/" + feature);
    auto fc = eval::run_matrix(data, feature, folds, mo);
    eval::CiOptions ci = cfg.ci;
    ci.seed = derive_seed(cfg.seed, {"ci", feature});
    pooled.push_back(eval::pool_comparison(fc, feature, ci, cfg.macro_cross));
    log_line(o, "evaluate " + feature + ": target MCC " + format_double(pooled.back().target.mean) +
                    ", cross MCC " + format_double(pooled.back().cross.mean));
    cells.insert(cells.end(), fc.begin(), fc.end());
  }
  std::ostringstream ex;
  ex << "word_id,feature,reason\n";
  for (const auto& e : excl) ex << csv_field(e.word_id) << "," << e.feature_name << "," << csv_field(e.reason) << "\n";
  return emit(stage_dir(cfg, Stage::evaluate), {{"scorecells.csv", eval::scorecells_csv(cells)},
                                                 {"pooled.csv", eval::pooled_csv(pooled)},
                                                 {"dataset_sizes.csv", sizes.str()},
                                                 {"exclusions.csv", ex.str()}});
}

Outputs do_cluster(const RunConfig& cfg, const StageOptions& o) {
  auto cells = eval::parse_scorecells(read_file(artifact(cfg, Stage::evaluate, "scorecells.csv")));
  const auto langs = cfg.languages();
  if (langs.size() < 2) throw ConfigError("clustering needs at least two languages");
  auto summary = analyze_clusters(cells, langs, cfg.linkage, cfg.best_acoustic, cfg.best_layer);
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("lda_coords.csv", summary.lda_csv);
  for (const auto& [name, text] : summary.dendrograms) files.emplace_back(name, text);
  files.emplace_back("summary.json", summary.summary_json);
  log_line(o, "cluster: best acoustic '" + summary.best_acoustic + "', best layer '" +
                  summary.best_layer + "'");
  return emit(stage_dir(cfg, Stage::cluster), files);
}

}  // namespace

StageOutcome run_stage(Stage s, const RunConfig& cfg, const StageOptions& o) {
  cfg.validate();
  const auto inputs = stage_inputs(s, cfg);
  const auto hash = inputs_hash(s, cfg, inputs);
  StageOutcome out;
  if (!o.force && up_to_date(read_manifest(cfg), s, hash)) {
    log_line(o, std::string(to_string(s)) + ": up to date, skipped");
    out.skipped = true;
    return out;
  }
  fs::create_directories(cfg.output);
  switch (s) {
    case Stage::ingest: out.outputs = do_ingest(cfg, o); break;
    case Stage::features: out.outputs = do_features(cfg, o); break;
    case Stage::pool: out.outputs = do_pool(cfg, o); break;
    case Stage::evaluate: out.outputs = do_evaluate(cfg, o); break;
    case Stage::cluster: out.outputs = do_cluster(cfg, o); break;
    case Stage::report: out.outputs = write_report(cfg, stage_dir(cfg, Stage::report)); break;
  }
  record_stage(cfg, s, hash, out.outputs, inputs);
  return out;
}

}  // namespace stressprobe::pipeline

namespace stressprobe::pipeline {

namespace {
std::string toml_str(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}
}  // namespace

std::string write_synthetic_project(const SynthOptions& o) {
  if (o.dir.empty()) throw ConfigError("synth: output directory not set");
  if (o.languages.empty()) throw ConfigError("synth: no languages");
  if (o.k < 2) throw ConfigError("synth: k must be at least 2");
  fs::create_directories(o.dir);
  const fs::path root = fs::absolute(o.dir);
  const std::string config_path =
      o.config_path.empty() ? (root / "stressprobe.toml").string() : fs::absolute(o.config_path).string();
  const fs::path emb = root / "embeddings";

  std::ostringstream toml;
  toml << "# synthetic corpus\n";
  toml << "output = " << toml_str((root / "out").string()) << "\n";
  toml << "seed = " << o.cues.seed << "\n";
  toml << "k = " << o.k << "\n";
  if (o.embeddings) {
    toml << "embeddings = " << toml_str(emb.string()) << "\n";
  } else {
    toml << "features = [";
    for (std::size_t i = 0; i < 6; ++i) toml << (i ? ", " : "") << "\"" << probes::kFeatureOrder[i] << "\"";
    toml << "]\n";
  }
  for (Language l : o.languages) {
    const std::string code(to_string(l));
    testkit::CueSpec spec = o.cues;
    spec.inverted = std::find(o.inverted.begin(), o.inverted.end(), l) != o.inverted.end();
    auto corpus = testkit::synth_corpus(spec, l);
    const fs::path d = root / code;
    testkit::write_corpus(corpus, d.string());
    if (o.embeddings) testkit::synth_embeddings(corpus, o.embedding, emb.string());
    toml << "\n[corpus." << code << "]\n"
         << "alignments = " << toml_str((d / "alignments").string()) << "\n"
         << "audio_root = " << toml_str((d / "audio").string()) << "\n"
         << "inventory = " << toml_str((d / "inventory.json").string()) << "\n";
    if (!is_fixed_stress(l)) toml << "lexicon = " << toml_str((d / "lexicon.tsv").string()) << "\n";
  }
  if (!fs::path(config_path).parent_path().empty()) fs::create_directories(fs::path(config_path).parent_path());
  write_file(config_path, toml.str());
  return config_path;
}

}  // namespace stressprobe::pipeline
