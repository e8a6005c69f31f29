// src/stresslabel.cpp

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

#include "stressprobe/stresslabel.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace stressprobe::label {

namespace {

std::string ascii_lower(std::string s) {
  for (char& c : s)
    if (static_cast<unsigned char>(c) < 0x80)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> whitespace_tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

std::size_t LexiconEntry::syllable_of(std::size_t phone_index) const {
  auto it = std::upper_bound(syllable_breaks.begin(), syllable_breaks.end(),
                             phone_index);
  return static_cast<std::size_t>(it - syllable_breaks.begin());
}

void LexiconEntry::validate() const {
  if (phones.empty())
    throw ValidationError("lexicon entry '" + orthography + "' has no phones");
  for (std::size_t i = 0; i < syllable_breaks.size(); ++i) {
    std::size_t b = syllable_breaks[i];
    if (b == 0 || b >= phones.size() ||
        (i > 0 && b <= syllable_breaks[i - 1]))
      throw ValidationError("lexicon entry '" + orthography +
                            "': syllable breaks must be strictly increasing "
                            "and inside the phone sequence");
  }
  if (stressed_syllable >= num_syllables())
    throw ValidationError("lexicon entry '" + orthography + "': stress index " +
                          std::to_string(stressed_syllable) + " but only " +
                          std::to_string(num_syllables()) + " syllables");
}

void Lexicon::add(LexiconEntry entry) {
  entry.validate();
  std::string key = entry.orthography;
  lowered_.try_emplace(ascii_lower(key), key);
  entries_[key].push_back(std::move(entry));
}

const std::vector<LexiconEntry>* Lexicon::find(
    const std::string& orthography) const {
  if (auto it = entries_.find(orthography); it != entries_.end())
    return &it->second;
  if (auto lt = lowered_.find(ascii_lower(orthography)); lt != lowered_.end())
    return &entries_.at(lt->second);
  return nullptr;
}

LexiconEntry parse_pronunciation(const std::string& orthography,
                                 const std::string& transcription) {
  LexiconEntry e;
  e.orthography = orthography;
  std::size_t syllable = 0;
  std::size_t in_syllable = 0;
  std::optional<std::size_t> stressed;
  auto mark = [&] {
    if (stressed)
      throw ValidationError("lexicon entry '" + orthography +
                            "' marks more than one stressed syllable");
    stressed = syllable;
  };
  for (std::string tok : whitespace_tokens(transcription)) {
    if (tok == "-") {
      if (in_syllable == 0)
        throw ValidationError("lexicon entry '" + orthography +
                              "' has an empty syllable");
      ++syllable;
      in_syllable = 0;
      continue;
    }
    if (tok[0] == '\'') {
      mark();
      tok.erase(0, 1);
      if (tok.empty()) continue;
    }
    if (in_syllable == 0 && syllable > 0) e.syllable_breaks.push_back(e.phones.size());
    e.phones.push_back(tok);
    ++in_syllable;
  }
  if (!stressed)
    throw ValidationError("lexicon entry '" + orthography +
                          "' has no stressed syllable");
  e.stressed_syllable = *stressed;
  e.validate();
  return e;
}

std::string format_pronunciation(const LexiconEntry& e) {
  std::string out;
  for (std::size_t i = 0; i < e.phones.size(); ++i) {
    bool starts = i == 0 || std::binary_search(e.syllable_breaks.begin(),
                                               e.syllable_breaks.end(), i);
    if (i > 0) out += starts ? " - " : " ";
    if (starts && e.syllable_of(i) == e.stressed_syllable) out += "'";
    out += e.phones[i];
  }
  return out;
}

Lexicon parse_lexicon(const std::string& tsv_text) {
  Lexicon lex;
  std::istringstream in(tsv_text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() < 2)
      throw ParseError("lexicon line " + std::to_string(lineno) +
                       ": expected orthography<TAB>transcription");
    try {
      lex.add(parse_pronunciation(trim(cols[0]), cols[1]));
    } catch (const ValidationError& e) {
      throw ValidationError("lexicon line " + std::to_string(lineno) + ": " +
                            e.what());
    }
  }
  return lex;
}

Lexicon load_lexicon(const std::string& path) {
  try {
    return parse_lexicon(read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void SymbolMap::add(std::string from, std::string to) {
  table_[std::move(from)] = std::move(to);
}

const std::string& SymbolMap::map(const std::string& symbol) const {
  auto it = table_.find(symbol);
  return it == table_.end() ? symbol : it->second;
}

std::vector<std::string> SymbolMap::map(
    const std::vector<std::string>& symbols) const {
  std::vector<std::string> out;
  out.reserve(symbols.size());
  for (const auto& s : symbols) out.push_back(map(s));
  return out;
}

SymbolMap parse_symbol_map(const std::string& tsv_text) {
  SymbolMap m;
  std::istringstream in(tsv_text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2 || trim(cols[0]).empty() || trim(cols[1]).empty())
      throw ParseError("symbol map line " + std::to_string(lineno) +
                       ": expected corpus_symbol<TAB>lexicon_symbol");
    m.add(trim(cols[0]), trim(cols[1]));
  }
  return m;
}

SymbolMap load_symbol_map(const std::string& path) {
  try {
    return parse_symbol_map(read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void ScoringScheme::validate() const {
  if (!(match > mismatch) || !(gap < match))
    throw ConfigError("scoring scheme needs match > mismatch and gap < match");
}

double pair_score(const std::vector<std::string>& a,
                  const std::vector<std::string>& b, const AlignedPair& p,
                  const ScoringScheme& s) {
  if (!p.a || !p.b) return s.gap;
  return a[*p.a] == b[*p.b] ? s.match : s.mismatch;
}

AlignmentResult nw_align(const std::vector<std::string>& a,
                         const std::vector<std::string>& b,
                         const ScoringScheme& s) {
  if (a.empty() || b.empty())
    throw ContractError("nw_align needs two non-empty sequences");
  const std::size_t n = a.size(), m = b.size();
  const std::size_t w = m + 1;
  std::vector<double> h((n + 1) * w);
  for (std::size_t i = 0; i <= n; ++i) h[i * w] = s.gap * static_cast<double>(i);
  for (std::size_t j = 0; j <= m; ++j) h[j] = s.gap * static_cast<double>(j);
  auto sub = [&](std::size_t i, std::size_t j) {
    return a[i - 1] == b[j - 1] ? s.match : s.mismatch;
  };
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      double diag = h[(i - 1) * w + j - 1] + sub(i, j);
      double up = h[(i - 1) * w + j] + s.gap;
      double left = h[i * w + j - 1] + s.gap;
      h[i * w + j] = std::max({diag, up, left});
    }
  }

  AlignmentResult res;
  res.score = h[n * w + m];
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    double here = h[i * w + j];
    if (i > 0 && j > 0 && here == h[(i - 1) * w + j - 1] + sub(i, j)) {
      res.pairs.push_back({i - 1, j - 1});
      --i;
      --j;
    } else if (j > 0 && here == h[i * w + j - 1] + s.gap) {
      res.pairs.push_back({std::nullopt, j - 1});
      --j;
    } else {
      res.pairs.push_back({i - 1, std::nullopt});
      --i;
    }
  }
  std::reverse(res.pairs.begin(), res.pairs.end());
  return res;
}

std::string_view to_string(UnlabeledReason r) {
  switch (r) {
    case UnlabeledReason::missing_entry: return "missing_entry";
    case UnlabeledReason::nucleus_gap: return "nucleus_gap";
    case UnlabeledReason::both_stressed: return "both_stressed";
    case UnlabeledReason::neither_stressed: return "neither_stressed";
    case UnlabeledReason::not_bisyllabic: return "not_bisyllabic";
  }
  return "unknown";
}

LabelOutcome label_lexical(const corpus::WordToken& word, const Lexicon& lexicon,
                           const ScoringScheme& scheme,
                           const SymbolMap* symbols) {
  if (word.syllables.size() != 2) return Unlabeled{UnlabeledReason::not_bisyllabic};
  const auto* variants = lexicon.find(word.orthography);
  if (!variants || variants->empty())
    return Unlabeled{UnlabeledReason::missing_entry};

  std::vector<std::string> phones = word.phone_labels();
  if (symbols) phones = symbols->map(phones);

  const LexiconEntry* best = nullptr;
  AlignmentResult best_alignment;
  for (const auto& v : *variants) {
    AlignmentResult r = nw_align(phones, v.phones, scheme);
    // Strict comparison keeps the earliest variant on ties.
    if (!best || r.score > best_alignment.score) {
      best = &v;
      best_alignment = std::move(r);
    }
  }

  Stress out[2];
  for (int k = 0; k < 2; ++k) {
    std::size_t nucleus = word.syllables[k].nucleus_index;
    auto it = std::find_if(best_alignment.pairs.begin(), best_alignment.pairs.end(),
                           [&](const AlignedPair& p) { return p.a == nucleus; });
    if (it == best_alignment.pairs.end() || !it->b)
      return Unlabeled{UnlabeledReason::nucleus_gap};
    out[k] = best->syllable_of(*it->b) == best->stressed_syllable
                 ? Stress::stressed
                 : Stress::unstressed;
  }
  if (out[0] == Stress::stressed && out[1] == Stress::stressed)
    return Unlabeled{UnlabeledReason::both_stressed};
  if (out[0] == Stress::unstressed && out[1] == Stress::unstressed)
    return Unlabeled{UnlabeledReason::neither_stressed};
  return StressLabels{out[0], out[1]};
}

StressLabels label_fixed(const corpus::WordToken& word, Language language) {
  if (!is_fixed_stress(language))
    throw ContractError("fixed-stress rule applied to " +
                        std::string(to_string(language)) +
                        ", which is a variable-stress language");
  if (word.syllables.size() != 2)
    throw ContractError("fixed-stress rule needs a bisyllabic word, '" +
                        word.orthography + "' has " +
                        std::to_string(word.syllables.size()) + " syllables");
  return {Stress::stressed, Stress::unstressed};
}

}  // namespace stressprobe::label
