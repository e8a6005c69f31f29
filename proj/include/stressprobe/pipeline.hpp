// include/stressprobe/pipeline.hpp

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

#ifndef STRESSPROBE_PIPELINE_HPP_
#define STRESSPROBE_PIPELINE_HPP_

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "stressprobe/acoustic.hpp"
#include "stressprobe/config.hpp"
#include "stressprobe/corpus.hpp"
#include "stressprobe/embedpool.hpp"
#include "stressprobe/evaluation.hpp"
#include "stressprobe/stresslabel.hpp"
#include "stressprobe/testkit.hpp"

namespace stressprobe::pipeline {

// One labeled vowel plus where its audio lives.
struct TokenRow {
  corpus::VowelToken token;
  std::string orthography;
  std::string audio_path;  // resolved
};

std::string tokens_csv(const std::vector<TokenRow>& rows);
std::vector<TokenRow> parse_tokens(const std::string& csv_text);

struct UnlabeledWord {
  Language language = Language::nl;
  std::string utterance_id;
  std::size_t word_index = 0;
  std::string orthography;
  std::string reason;  // an UnlabeledReason name, or "selection"
  std::string detail;
};

struct IngestResult {
  std::vector<TokenRow> tokens;
  std::vector<UnlabeledWord> unlabeled;
  // language -> reason -> count; "labeled" counts labeled words.
  std::map<Language, std::map<std::string, std::size_t>> report;
  std::vector<std::string> inputs;  // every file read, for hashing
};

IngestResult ingest(const RunConfig& cfg);
std::string labeling_report_csv(const IngestResult& r);
std::string unlabeled_csv(const std::vector<UnlabeledWord>& rows);

// Measures every token; peripherality is filled in from per-language formant
// means over all tokens with valid formants.
std::vector<acoustic::FeatureRow> extract_features(const std::vector<TokenRow>& tokens,
                                                   const acoustic::FeatureConfig& cfg,
                                                   int jobs = 1);

struct PoolResult {
  std::vector<embed::PooledEmbedding> pooled;
  std::vector<std::string> no_frames;  // token ids
};

PoolResult pool_layer(const std::vector<TokenRow>& tokens, const std::string& embeddings_dir,
                      const std::string& layer, const embed::FrameTiming& timing,
                      int jobs = 1);
std::string pooled_table_csv(const std::vector<embed::PooledEmbedding>& rows);
std::vector<embed::PooledEmbedding> parse_pooled_table(const std::string& csv_text,
                                                       const std::string& layer);

struct Exclusion {
  std::string word_id;
  std::string feature_name;
  std::string reason;
};

// Feature matrices per language. A word enters only when both of its vowels
// have the feature, so every dataset is exactly balanced. `features` is used
// for acoustic names, `pooled` for layers.
eval::DatasetMap build_datasets(const std::string& feature_name,
                                const std::vector<TokenRow>& tokens,
                                const std::vector<acoustic::FeatureRow>* features,
                                const std::vector<embed::PooledEmbedding>* pooled,
                                std::vector<Exclusion>* exclusions = nullptr);

// Folds for one language's dataset, seeded per language.
std::vector<eval::FoldPlan> folds_for(const probes::Dataset& d, const RunConfig& cfg);

enum class Stage { ingest, features, pool, evaluate, cluster, report };
std::string_view to_string(Stage s);
Stage parse_stage(std::string_view name);

struct StageOptions {
  bool force = false;
  std::ostream* log = nullptr;
};

struct StageOutcome {
  bool skipped = false;
  std::vector<std::string> outputs;
};

// Runs one stage, unless the manifest shows its inputs and outputs unchanged.
// Throws MissingStageError when a prerequisite stage has not produced output.
StageOutcome run_stage(Stage stage, const RunConfig& cfg, const StageOptions& opts = {});

std::string stage_dir(const RunConfig& cfg, Stage s);

struct SynthOptions {
  std::string dir;
  std::string config_path;  // empty: <dir>/stressprobe.toml
  std::vector<Language> languages{Language::nl, Language::pl};
  testkit::CueSpec cues;
  // Languages whose cues sit on the unstressed vowel.
  std::vector<Language> inverted;
  bool embeddings = true;
  testkit::EmbeddingSpec embedding;
  int k = 20;
};

// Writes one synthetic corpus per language (plus embeddings) and a config
// that runs the whole pipeline on them. Returns the config path.
std::string write_synthetic_project(const SynthOptions& opts);

}  // namespace stressprobe::pipeline

#endif  // STRESSPROBE_PIPELINE_HPP_
