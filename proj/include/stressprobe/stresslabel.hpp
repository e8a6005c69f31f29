// include/stressprobe/stresslabel.hpp

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

#ifndef STRESSPROBE_STRESSLABEL_HPP_
#define STRESSPROBE_STRESSLABEL_HPP_

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "stressprobe/common.hpp"
#include "stressprobe/corpus.hpp"

namespace stressprobe::label {

struct LexiconEntry {
  std::string orthography;
  std::vector<std::string> phones;
  // Phone index at which each syllable after the first begins.
  std::vector<std::size_t> syllable_breaks;
  std::size_t stressed_syllable = 0;

  std::size_t num_syllables() const { return syllable_breaks.size() + 1; }
  std::size_t syllable_of(std::size_t phone_index) const;
  // Throws ValidationError when an invariant does not hold.
  void validate() const;
};

class Lexicon {
 public:
  void add(LexiconEntry entry);
  // Exact match first, then an ASCII-lowercased lookup.
  const std::vector<LexiconEntry>* find(const std::string& orthography) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::vector<LexiconEntry>> entries_;
  std::unordered_map<std::string, std::string> lowered_;
};

// One variant per line: "orth<TAB>phones", phones separated by spaces, "-"
// between syllables, a "'" prefix on the first phone of the stressed syllable.
Lexicon parse_lexicon(const std::string& tsv_text);
Lexicon load_lexicon(const std::string& path);
LexiconEntry parse_pronunciation(const std::string& orthography,
                                 const std::string& transcription);
std::string format_pronunciation(const LexiconEntry& entry);

// Corpus phone symbol -> lexicon phone symbol. Unmapped symbols pass through.
class SymbolMap {
 public:
  void add(std::string from, std::string to);
  const std::string& map(const std::string& symbol) const;
  std::vector<std::string> map(const std::vector<std::string>& symbols) const;

 private:
  std::unordered_map<std::string, std::string> table_;
};

SymbolMap parse_symbol_map(const std::string& tsv_text);
SymbolMap load_symbol_map(const std::string& path);

struct ScoringScheme {
  double match = 1.0;
  double mismatch = -1.0;
  double gap = -1.0;

  void validate() const;
};

struct AlignedPair {
  std::optional<std::size_t> a;  // nullopt = gap
  std::optional<std::size_t> b;
  friend bool operator==(const AlignedPair&, const AlignedPair&) = default;
};

struct AlignmentResult {
  std::vector<AlignedPair> pairs;
  double score = 0.0;
};

// Global (Needleman-Wunsch) alignment with linear gap cost. Among optimal
// tracebacks, prefers match/mismatch, then a gap in `a`, then a gap in `b`.
AlignmentResult nw_align(const std::vector<std::string>& a,
                         const std::vector<std::string>& b,
                         const ScoringScheme& scheme = {});

double pair_score(const std::vector<std::string>& a,
                  const std::vector<std::string>& b, const AlignedPair& p,
                  const ScoringScheme& scheme);

struct StressLabels {
  Stress first = Stress::unknown;
  Stress second = Stress::unknown;
};

enum class UnlabeledReason {
  missing_entry,
  nucleus_gap,
  both_stressed,
  neither_stressed,
  not_bisyllabic,
};

std::string_view to_string(UnlabeledReason r);

struct Unlabeled {
  UnlabeledReason reason;
};

using LabelOutcome = std::variant<StressLabels, Unlabeled>;

LabelOutcome label_lexical(const corpus::WordToken& word, const Lexicon& lexicon,
                           const ScoringScheme& scheme = {},
                           const SymbolMap* symbols = nullptr);

// Fixed-stress rule: first syllable for Hungarian (initial stress) and for
// Polish (penultimate, which is the first syllable of a bisyllabic word).
StressLabels label_fixed(const corpus::WordToken& word, Language language);

}  // namespace stressprobe::label

#endif  // STRESSPROBE_STRESSLABEL_HPP_
