// tools/stressprobe.cpp

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

// Command-line driver: one subcommand per pipeline stage, plus `synth` to
// generate a synthetic project and `run` for all stages in order.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stressprobe/config.hpp"
#include "stressprobe/pipeline.hpp"

namespace {

using namespace stressprobe;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  bool force = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "run configuration (TOML)");
  if (config_required) opt->required();
  cmd->add_option("--seed", f.seed, "override the configured seed");
  cmd->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--force", f.force, "rerun even when outputs are up to date");
}

RunConfig resolve_config(const CommonFlags& f) {
  RunConfig cfg = load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.jobs) cfg.jobs = *f.jobs;
  return cfg;
}

void run_stages(const std::vector<pipeline::Stage>& stages, const CommonFlags& f) {
  RunConfig cfg = resolve_config(f);
  pipeline::StageOptions opts{f.force, &std::cerr};
  for (auto s : stages) {
    auto outcome = pipeline::run_stage(s, cfg, opts);
    for (const auto& p : outcome.outputs) std::cout << p << "\n";
  }
}

std::vector<Language> parse_languages(const std::string& csv) {
  std::vector<Language> out;
  for (const auto& part : split(csv, ','))
    if (!trim(part).empty()) out.push_back(parse_language(trim(part)));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word-stress probing pipeline"};
  app.require_subcommand(1);

  const std::vector<std::pair<const char*, pipeline::Stage>> stage_cmds = {
      {"ingest", pipeline::Stage::ingest},     {"features", pipeline::Stage::features},
      {"pool", pipeline::Stage::pool},         {"evaluate", pipeline::Stage::evaluate},
      {"cluster", pipeline::Stage::cluster},   {"report", pipeline::Stage::report}};
  const char* help[] = {"read alignments and label stress",  "measure acoustic correlates",
                        "pool frame embeddings per vowel",   "train and score probes",
                        "LDA projection and dendrograms",    "write figures and tables"};

  CommonFlags flags;
  std::vector<std::pair<CLI::App*, pipeline::Stage>> stage_apps;
  for (std::size_t i = 0; i < stage_cmds.size(); ++i) {
    auto* cmd = app.add_subcommand(stage_cmds[i].first, help[i]);
    add_common(cmd, flags, true);
    stage_apps.emplace_back(cmd, stage_cmds[i].second);
  }
  auto* run_cmd = app.add_subcommand("run", "all stages in order");
  add_common(run_cmd, flags, true);

  auto* synth = app.add_subcommand("synth", "write a synthetic corpus and its config");
  add_common(synth, flags, false);
  pipeline::SynthOptions so;
  std::string langs = "nl,pl", inverted;
  bool no_embeddings = false;
  synth->add_option("--out", so.dir, "output directory")->required();
  synth->add_option("--languages", langs, "comma-separated language codes");
  synth->add_option("--words", so.cues.n_words, "words per language");
  synth->add_option("--duration-ratio", so.cues.duration_ratio, "stressed/unstressed duration");
  synth->add_option("--intensity-delta", so.cues.intensity_delta, "dB added to stressed vowels");
  synth->add_option("--pitch-delta", so.cues.pitch_delta, "Hz added to stressed vowels");
  synth->add_option("--tilt-delta", so.cues.tilt_delta, "dB added above 500 Hz");
  synth->add_option("--noise", so.cues.noise_level, "noise level relative to vowel RMS");
  synth->add_option("--inverted", inverted, "languages with cues on the unstressed vowel");
  synth->add_option("--k", so.k, "folds written to the config");
  synth->add_flag("--no-embeddings", no_embeddings, "skip synthetic layer embeddings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    for (const auto& [cmd, stage] : stage_apps)
      if (cmd->parsed()) run_stages({stage}, flags);
    if (run_cmd->parsed())
      run_stages({pipeline::Stage::ingest, pipeline::Stage::features, pipeline::Stage::pool,
                  pipeline::Stage::evaluate, pipeline::Stage::cluster, pipeline::Stage::report},
                 flags);
    if (synth->parsed()) {
      so.languages = parse_languages(langs);
      so.inverted = parse_languages(inverted);
      so.embeddings = !no_embeddings;
      so.config_path = flags.config;
      if (flags.seed) so.cues.seed = so.embedding.seed = *flags.seed;
      std::cout << pipeline::write_synthetic_project(so) << "\n";
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
