// include/stressprobe/corpus.hpp

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

#ifndef STRESSPROBE_CORPUS_HPP_
#define STRESSPROBE_CORPUS_HPP_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stressprobe/common.hpp"

namespace stressprobe::corpus {

struct PhoneSegment {
  std::string label;
  Interval interval;
  bool is_vowel = false;
};

// Contiguous range [first, first + count) into the word's phone list.
struct Syllable {
  std::size_t first = 0;
  std::size_t count = 0;
  std::size_t nucleus_index = 0;
};

struct WordToken {
  std::string orthography;
  Interval interval;
  std::vector<PhoneSegment> phones;
  std::vector<Syllable> syllables;

  std::vector<std::string> phone_labels() const;
};

struct Utterance {
  std::string id;
  Language language = Language::nl;
  std::string audio_path;
  int sample_rate = 16000;
  std::vector<WordToken> words;
};

struct VowelToken {
  std::string utterance_id;
  std::size_t word_index = 0;
  int syllable_index = 0;
  std::string phone_label;
  Interval interval;
  Interval word_interval;
  Language language = Language::nl;
  Stress stress = Stress::unknown;

  std::string token_id() const;
  std::string word_id() const;
};

std::string make_word_id(const std::string& utterance_id,
                         std::size_t word_index);

struct PhoneInventory {
  Language language = Language::nl;
  std::set<std::string> vowels;
  std::set<std::string> diphthongs;

  bool is_vowel(const std::string& s) const { return vowels.count(s) > 0; }
  bool is_diphthong(const std::string& s) const {
    return diphthongs.count(s) > 0;
  }
};

PhoneInventory parse_inventory(const std::string& json_text);
PhoneInventory load_inventory(const std::string& path);
std::string serialize_inventory(const PhoneInventory& inv);

// Parses one alignment document. `audio_duration`, when given, adds the
// end <= duration check. Throws ParseError (with the JSON path of the
// offending field) or ValidationError.
Utterance parse_alignment(const std::string& json_text,
                          std::optional<double> audio_duration = {});

// Accepts either one JSON document or JSON-lines (one utterance per line).
std::vector<Utterance> parse_alignment_file(const std::string& path);

std::string serialize_alignment(const Utterance& utt);

// Re-checks all Utterance invariants; throws ValidationError naming the
// offending segment.
void validate(const Utterance& utt, std::optional<double> audio_duration = {});

struct SelectedWord {
  std::size_t word_index = 0;
  const WordToken* word = nullptr;
  VowelToken first;
  VowelToken second;
};

struct SelectionIssue {
  std::string utterance_id;
  std::size_t word_index = 0;
  std::string message;
};

struct Selection {
  std::vector<SelectedWord> words;
  std::vector<SelectionIssue> issues;
};

// Keeps bisyllabic words whose two nuclei are monophthong vowels of the
// inventory. Nuclei outside the vowel set are data-consistency problems:
// recorded in `issues` and the word is dropped, or thrown as
// DataConsistencyError when `strict`. The returned pointers refer into `utt`.
Selection select_bisyllabic(const Utterance& utt, const PhoneInventory& inv,
                            bool strict = false);

struct LanguageStats {
  std::size_t word_count = 0;
  double hours = 0.0;
  double pct_stress_first_syllable = 0.0;
};

std::map<Language, LanguageStats> corpus_stats(
    const std::vector<VowelToken>& tokens);

}  // namespace stressprobe::corpus

#endif  // STRESSPROBE_CORPUS_HPP_
