// include/stressprobe/config.hpp

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

#ifndef STRESSPROBE_CONFIG_HPP_
#define STRESSPROBE_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "stressprobe/acoustic.hpp"
#include "stressprobe/clustering.hpp"
#include "stressprobe/embedpool.hpp"
#include "stressprobe/evaluation.hpp"
#include "stressprobe/probes.hpp"
#include "stressprobe/stresslabel.hpp"

namespace stressprobe {

// A small TOML subset: [table] and [table.sub] headers, key = value with
// strings, integers, floats, booleans and (possibly multi-line) arrays of
// those, and # comments. Keys are flattened to "table.sub.key".
struct ConfigValue;
using ConfigArray = std::vector<ConfigValue>;
struct ConfigValue {
  std::variant<std::string, std::int64_t, double, bool, ConfigArray> v;
};
using ConfigTable = std::map<std::string, ConfigValue>;

ConfigTable parse_toml(const std::string& text);

struct LanguageInputs {
  Language language = Language::nl;
  std::string alignments;   // file or directory of *.json / *.jsonl
  std::string audio_root;   // audio paths in alignments resolve against this
  std::string inventory;
  std::string lexicon;      // required for variable-stress languages
  std::string symbol_map;   // optional
};

struct RunConfig {
  std::string config_path;
  std::vector<LanguageInputs> corpora;  // in canonical language order
  std::string embeddings;
  std::vector<std::string> features;    // in report order
  std::string output = "stressprobe_out";
  int k = 20;
  double train_fraction = 2.0 / 3.0;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool strict_selection = false;
  bool save_probes = false;

  label::ScoringScheme scoring;
  acoustic::FeatureConfig acoustic;
  embed::FrameTiming timing;
  probes::ProbeConfig probe;
  eval::CiOptions ci;
  bool macro_cross = false;
  cluster::Linkage linkage = cluster::Linkage::ward;
  std::string best_acoustic;  // empty: argmax of pooled target MCC
  std::string best_layer;

  std::vector<Language> languages() const;
  std::vector<std::string> layers() const;  // embedding features
  const LanguageInputs& inputs(Language l) const;

  // Throws ConfigError: no corpora, k < 2, unknown names, or a referenced
  // path that does not exist.
  void validate() const;
};

// Relative paths are resolved against `base_dir`.
RunConfig parse_config(const std::string& text, const std::string& base_dir);
RunConfig load_config(const std::string& path);

// Resolved configuration as JSON, for the run manifest.
std::string config_json(const RunConfig& cfg);

}  // namespace stressprobe

#endif  // STRESSPROBE_CONFIG_HPP_
