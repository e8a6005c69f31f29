// src/config.cpp

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

#include "stressprobe/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <set>

#include "json.hpp"

namespace stressprobe {

namespace fs = std::filesystem;

namespace {

class TomlReader {
 public:
  explicit TomlReader(const std::string& text) : s_(text) {}

  ConfigTable run() {
    ConfigTable out;
    std::string prefix;
    while (true) {
      skip_blank_lines();
      if (at_end()) break;
      if (peek() == '[') {
        ++pos_;
        std::string name = read_key();
        skip_ws();
        expect(']');
        prefix = name + ".";
      } else {
        std::string key = prefix + read_key();
        skip_ws();
        expect('=');
        skip_ws();
        ConfigValue v = read_value();
        if (!out.emplace(key, std::move(v)).second) fail("duplicate key '" + key + "'");
      }
      end_of_line();
    }
    return out;
  }

 private:
  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }

  [[noreturn]] void fail(const std::string& msg) const {
    std::size_t line = 1 + static_cast<std::size_t>(
                               std::count(s_.begin(), s_.begin() + static_cast<long>(std::min(pos_, s_.size())), '\n'));
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  void skip_ws() {
    while (peek() == ' ' || peek() == '\t') ++pos_;
  }
  void skip_comment() {
    if (peek() == '#')
      while (!at_end() && peek() != '\n') ++pos_;
  }
  void skip_blank_lines() {
    while (true) {
      skip_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        ++pos_;
        continue;
      }
      return;
    }
  }
  void end_of_line() {
    skip_ws();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (!at_end() && peek() != '\n') fail("unexpected trailing characters");
  }

  std::string read_key() {
    skip_ws();
    std::string key;
    while (!at_end()) {
      char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.') {
        key += c;
        ++pos_;
      } else {
        break;
      }
    }
    if (key.empty()) fail("expected a key");
    return key;
  }

  std::string read_string() {
    expect('"');
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      char c = s_[pos_++];
      if (c == '"') return out;
      if (c == '\\') {
        char e = at_end() ? '\0' : s_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail("unsupported escape");
        }
      } else {
        out += c;
      }
    }
  }

  ConfigValue read_value() {
    char c = peek();
    if (c == '"') return {read_string()};
    if (c == '[') {
      ++pos_;
      ConfigArray arr;
      while (true) {
        skip_blank_lines();
        if (peek() == ']') {
          ++pos_;
          return {std::move(arr)};
        }
        arr.push_back(read_value());
        skip_blank_lines();
        if (peek() == ',') {
          ++pos_;
        } else if (peek() != ']') {
          fail("expected ',' or ']' in array");
        }
      }
    }
    std::size_t start = pos_;
    while (!at_end() && peek() != ',' && peek() != ']' && peek() != '#' &&
           peek() != '\n' && peek() != '\r' && peek() != ' ' && peek() != '\t')
      ++pos_;
    std::string tok = s_.substr(start, pos_ - start);
    if (tok == "true") return {true};
    if (tok == "false") return {false};
    std::string digits;
    for (char ch : tok)
      if (ch != '_') digits += ch;
    const bool floaty = digits.find_first_of(".eE") != std::string::npos ||
                        digits == "inf" || digits == "nan";
    if (!floaty) {
      std::int64_t i = 0;
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), i);
      if (ec == std::errc() && p == digits.data() + digits.size() && !digits.empty()) return {i};
    } else {
      double d = 0;
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), d);
      if (ec == std::errc() && p == digits.data() + digits.size()) return {d};
    }
    fail("cannot parse value '" + tok + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

// Pulls typed values out of a table and remembers which keys were used.
class Fields {
 public:
  explicit Fields(const ConfigTable& t) : t_(t) {}

  const ConfigValue* find(const std::string& key) {
    auto it = t_.find(key);
    if (it == t_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  void get(const std::string& key, std::string& out) {
    if (auto* v = find(key)) out = as_string(key, *v);
  }
  void get(const std::string& key, double& out) {
    if (auto* v = find(key)) out = as_double(key, *v);
  }
  void get(const std::string& key, int& out) {
    if (auto* v = find(key)) out = static_cast<int>(as_int(key, *v));
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (auto* v = find(key)) {
      auto i = as_int(key, *v);
      if (i < 0) throw ConfigError("'" + key + "' must be non-negative");
      out = static_cast<std::uint64_t>(i);
    }
  }
  void get(const std::string& key, bool& out) {
    if (auto* v = find(key)) {
      if (!std::holds_alternative<bool>(v->v)) throw ConfigError("'" + key + "' must be a boolean");
      out = std::get<bool>(v->v);
    }
  }
  void get(const std::string& key, std::vector<std::string>& out) {
    if (auto* v = find(key)) {
      if (!std::holds_alternative<ConfigArray>(v->v))
        throw ConfigError("'" + key + "' must be an array of strings");
      out.clear();
      for (const auto& e : std::get<ConfigArray>(v->v)) out.push_back(as_string(key, e));
    }
  }

  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : t_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

 private:
  static std::string as_string(const std::string& key, const ConfigValue& v) {
    if (!std::holds_alternative<std::string>(v.v)) throw ConfigError("'" + key + "' must be a string");
    return std::get<std::string>(v.v);
  }
  static std::int64_t as_int(const std::string& key, const ConfigValue& v) {
    if (!std::holds_alternative<std::int64_t>(v.v)) throw ConfigError("'" + key + "' must be an integer");
    return std::get<std::int64_t>(v.v);
  }
  static double as_double(const std::string& key, const ConfigValue& v) {
    if (std::holds_alternative<std::int64_t>(v.v)) return static_cast<double>(std::get<std::int64_t>(v.v));
    if (!std::holds_alternative<double>(v.v)) throw ConfigError("'" + key + "' must be a number");
    return std::get<double>(v.v);
  }

  const ConfigTable& t_;
  std::set<std::string> used_;
};

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty()) return p;
  fs::path path(p);
  if (path.is_absolute() || base.empty()) return path.lexically_normal().string();
  return (fs::path(base) / path).lexically_normal().string();
}

void require_path(const std::string& what, const std::string& p) {
  if (p.empty()) throw ConfigError(what + " is not set");
  if (!fs::exists(p)) throw ConfigError(what + " does not exist: " + p);
}

}  // namespace

ConfigTable parse_toml(const std::string& text) { return TomlReader(text).run(); }

std::vector<Language> RunConfig::languages() const {
  std::vector<Language> out;
  for (const auto& c : corpora) out.push_back(c.language);
  return out;
}

std::vector<std::string> RunConfig::layers() const {
  std::vector<std::string> out;
  for (const auto& f : features)
    if (probes::feature_kind(f) == probes::FeatureKind::embedding) out.push_back(f);
  return out;
}

const LanguageInputs& RunConfig::inputs(Language l) const {
  for (const auto& c : corpora)
    if (c.language == l) return c;
  throw ConfigError("no corpus configured for language " + std::string(to_string(l)));
}

void RunConfig::validate() const {
  if (corpora.empty()) throw ConfigError("config lists no corpora");
  if (k < 2) throw ConfigError("k must be at least 2");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train_fraction must lie in (0, 1)");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  if (features.empty()) throw ConfigError("config lists no features");
  for (const auto& f : features) probes::feature_kind(f);
  if (output.empty()) throw ConfigError("output is not set");
  scoring.validate();
  timing.validate();
  if (!(ci.level > 0.0 && ci.level < 1.0)) throw ConfigError("ci.level must lie in (0, 1)");
  if (ci.resamples < 10) throw ConfigError("ci.resamples must be at least 10");
  for (const auto& c : corpora) {
    const std::string lang(to_string(c.language));
    require_path("corpus." + lang + ".alignments", c.alignments);
    require_path("corpus." + lang + ".audio_root", c.audio_root);
    require_path("corpus." + lang + ".inventory", c.inventory);
    if (!is_fixed_stress(c.language)) require_path("corpus." + lang + ".lexicon", c.lexicon);
    if (!c.symbol_map.empty()) require_path("corpus." + lang + ".symbol_map", c.symbol_map);
  }
  if (!layers().empty()) require_path("embeddings", embeddings);
  if (!best_acoustic.empty() && !probes::is_acoustic(best_acoustic))
    throw ConfigError("cluster.best_acoustic must name an acoustic feature");
  if (!best_layer.empty() && probes::is_acoustic(best_layer))
    throw ConfigError("cluster.best_layer must name a layer");
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  const ConfigTable table = parse_toml(text);
  Fields f(table);
  RunConfig cfg;
  for (auto name : probes::kFeatureOrder) cfg.features.emplace_back(name);

  f.get("output", cfg.output);
  f.get("embeddings", cfg.embeddings);
  f.get("features", cfg.features);
  f.get("k", cfg.k);
  f.get("train_fraction", cfg.train_fraction);
  f.get("seed", cfg.seed);
  f.get("jobs", cfg.jobs);
  f.get("strict_selection", cfg.strict_selection);
  f.get("save_probes", cfg.save_probes);
  cfg.output = resolve(base_dir, cfg.output);
  cfg.embeddings = resolve(base_dir, cfg.embeddings);

  // Features always run in report order, without duplicates.
  for (const auto& name : cfg.features) probes::feature_kind(name);
  std::sort(cfg.features.begin(), cfg.features.end(), [](const auto& a, const auto& b) {
    return probes::feature_rank(a) < probes::feature_rank(b);
  });
  cfg.features.erase(std::unique(cfg.features.begin(), cfg.features.end()), cfg.features.end());

  for (Language l : kAllLanguages) {
    const std::string p = "corpus." + std::string(to_string(l)) + ".";
    LanguageInputs in;
    in.language = l;
    bool any = false;
    for (auto [key, dst] : {std::pair{"alignments", &in.alignments},
                            {"audio_root", &in.audio_root},
                            {"inventory", &in.inventory},
                            {"lexicon", &in.lexicon},
                            {"symbol_map", &in.symbol_map}}) {
      if (f.find(p + key)) any = true;
      f.get(p + key, *dst);
      *dst = resolve(base_dir, *dst);
    }
    if (any) cfg.corpora.push_back(std::move(in));
  }

  f.get("scoring.match", cfg.scoring.match);
  f.get("scoring.mismatch", cfg.scoring.mismatch);
  f.get("scoring.gap", cfg.scoring.gap);

  auto& ac = cfg.acoustic;
  f.get("pitch.frame_s", ac.pitch.frame_s);
  f.get("pitch.hop_s", ac.pitch.hop_s);
  f.get("pitch.fmin", ac.pitch.fmin);
  f.get("pitch.fmax", ac.pitch.fmax);
  f.get("pitch.threshold", ac.pitch.threshold);
  f.get("spectrum.window_s", ac.spectrum.window_s);
  f.get("spectrum.hop_s", ac.spectrum.hop_s);
  f.get("formant.preemphasis", ac.formant.preemphasis);
  f.get("formant.window_s", ac.formant.window_s);
  f.get("formant.hop_s", ac.formant.hop_s);
  f.get("formant.order", ac.formant.order);
  f.get("formant.max_bandwidth", ac.formant.max_bandwidth);
  f.get("formant.min_frequency", ac.formant.min_frequency);

  f.get("frames.window", cfg.timing.window);
  f.get("frames.stride", cfg.timing.stride);
  f.get("frames.min_overlap_fraction", cfg.timing.min_overlap_fraction);

  auto& pc = cfg.probe;
  f.get("probe.bandwidth_floor", pc.bandwidth_floor);
  f.get("probe.discriminant_ridge", pc.discriminant_ridge);
  f.get("perceptron.hidden_units", pc.perceptron.hidden_units);
  f.get("perceptron.learning_rate", pc.perceptron.learning_rate);
  f.get("perceptron.l2", pc.perceptron.l2);
  f.get("perceptron.batch_size", pc.perceptron.batch_size);
  f.get("perceptron.max_epochs", pc.perceptron.max_epochs);
  f.get("perceptron.tolerance", pc.perceptron.tolerance);
  f.get("perceptron.patience", pc.perceptron.patience);
  if (pc.perceptron.hidden_units < 1 || pc.perceptron.batch_size < 1 ||
      pc.perceptron.max_epochs < 1 || !(pc.perceptron.learning_rate > 0))
    throw ConfigError("perceptron settings must be positive");

  f.get("ci.level", cfg.ci.level);
  f.get("ci.resamples", cfg.ci.resamples);
  f.get("ci.macro_cross", cfg.macro_cross);
  std::string method = "t";
  f.get("ci.method", method);
  if (method == "t") cfg.ci.method = eval::CiMethod::student_t;
  else if (method == "bca") cfg.ci.method = eval::CiMethod::bca_bootstrap;
  else throw ConfigError("ci.method must be \"t\" or \"bca\"");

  std::string linkage = "ward";
  f.get("cluster.linkage", linkage);
  try {
    cfg.linkage = cluster::parse_linkage(linkage);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  f.get("cluster.best_acoustic", cfg.best_acoustic);
  f.get("cluster.best_layer", cfg.best_layer);

  auto extra = f.unused();
  if (!extra.empty()) throw ConfigError("unknown config key '" + extra.front() + "'");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
  RunConfig cfg = parse_config(read_file(path), fs::path(path).parent_path().string());
  cfg.config_path = path;
  return cfg;
}

std::string config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["k"] = c.k;
  j["train_fraction"] = c.train_fraction;
  j["seed"] = c.seed;
  j["features"] = c.features;
  j["layers"] = c.layers();
  std::vector<std::string> langs;
  for (auto l : c.languages()) langs.emplace_back(to_string(l));
  j["languages"] = langs;
  j["embeddings"] = c.embeddings;
  j["output"] = c.output;
  auto& corpora = j["corpora"];
  corpora = nlohmann::ordered_json::object();
  for (const auto& in : c.corpora) {
    corpora[std::string(to_string(in.language))] = {
        {"alignments", in.alignments}, {"audio_root", in.audio_root},
        {"inventory", in.inventory},   {"lexicon", in.lexicon},
        {"symbol_map", in.symbol_map}};
  }
  j["scoring"] = {{"match", c.scoring.match}, {"mismatch", c.scoring.mismatch}, {"gap", c.scoring.gap}};
  const auto& a = c.acoustic;
  j["pitch"] = {{"frame_s", a.pitch.frame_s}, {"hop_s", a.pitch.hop_s}, {"fmin", a.pitch.fmin},
                {"fmax", a.pitch.fmax}, {"threshold", a.pitch.threshold}};
  j["spectrum"] = {{"window_s", a.spectrum.window_s}, {"hop_s", a.spectrum.hop_s}};
  j["formant"] = {{"preemphasis", a.formant.preemphasis}, {"window_s", a.formant.window_s},
                  {"hop_s", a.formant.hop_s}, {"order", a.formant.order},
                  {"max_bandwidth", a.formant.max_bandwidth},
                  {"min_frequency", a.formant.min_frequency}};
  j["frames"] = {{"window", c.timing.window}, {"stride", c.timing.stride},
                 {"min_overlap_fraction", c.timing.min_overlap_fraction}};
  const auto& p = c.probe.perceptron;
  j["probe"] = {{"bandwidth_floor", c.probe.bandwidth_floor},
                {"discriminant_ridge", c.probe.discriminant_ridge}};
  j["perceptron"] = {{"hidden_units", p.hidden_units}, {"learning_rate", p.learning_rate},
                     {"l2", p.l2}, {"batch_size", p.batch_size}, {"max_epochs", p.max_epochs},
                     {"tolerance", p.tolerance}, {"patience", p.patience}};
  j["ci"] = {{"level", c.ci.level},
             {"method", c.ci.method == eval::CiMethod::student_t ? "t" : "bca"},
             {"resamples", c.ci.resamples}, {"macro_cross", c.macro_cross}};
  j["cluster"] = {{"linkage", std::string(cluster::to_string(c.linkage))},
                  {"best_acoustic", c.best_acoustic}, {"best_layer", c.best_layer}};
  return j.dump(2);
}

}  // namespace stressprobe
