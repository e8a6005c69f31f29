// src/corpus.cpp

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

#include "stressprobe/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace stressprobe::corpus {

using nlohmann::json;

namespace {

// Walks a JSON document while remembering where it is, so that every error
// can name the offending field.
struct Cursor {
  const json& node;
  std::string path;

  Cursor at(const char* key) const {
    if (!node.is_object())
      throw ParseError(path + ": expected an object");
    auto it = node.find(key);
    if (it == node.end())
      throw ParseError(path + ": missing field \"" + key + "\"");
    return {*it, path + "/" + key};
  }
  Cursor at(std::size_t i) const { return {node[i], path + "/" + std::to_string(i)}; }

  const json& array() const {
    if (!node.is_array()) throw ParseError(path + ": expected an array");
    return node;
  }
  std::string str() const {
    if (!node.is_string()) throw ParseError(path + ": expected a string");
    return node.get<std::string>();
  }
  double num() const {
    if (!node.is_number()) throw ParseError(path + ": expected a number");
    double v = node.get<double>();
    if (!std::isfinite(v)) throw ParseError(path + ": non-finite number");
    return v;
  }
  bool boolean() const {
    if (!node.is_boolean()) throw ParseError(path + ": expected a boolean");
    return node.get<bool>();
  }
};

json parse_json_text(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(e.byte, text.size()); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream msg;
    msg << where << ": malformed JSON at line " << line << ", column " << col
        << ": " << e.what();
    throw ParseError(msg.str());
  }
}

Utterance utterance_from_json(const json& doc, const std::string& where) {
  Cursor root{doc, where + "#"};
  Utterance utt;
  utt.id = root.at("id").str();
  try {
    utt.language = parse_language(root.at("language").str());
  } catch (const ValidationError& e) {
    throw ParseError(root.path + "/language: " + e.what());
  }
  utt.audio_path = root.at("audio").str();
  double sr = root.at("sample_rate").num();
  if (sr <= 0 || sr != std::floor(sr))
    throw ParseError(root.path + "/sample_rate: must be a positive integer");
  utt.sample_rate = static_cast<int>(sr);

  Cursor words = root.at("words");
  for (std::size_t wi = 0; wi < words.array().size(); ++wi) {
    Cursor w = words.at(wi);
    WordToken word;
    word.orthography = w.at("orth").str();
    word.interval = {w.at("start").num(), w.at("end").num()};
    Cursor syls = w.at("syllables");
    for (std::size_t si = 0; si < syls.array().size(); ++si) {
      Cursor s = syls.at(si);
      Cursor phones = s.at("phones");
      Syllable syl;
      syl.first = word.phones.size();
      std::size_t vowels = 0;
      for (std::size_t pi = 0; pi < phones.array().size(); ++pi) {
        Cursor p = phones.at(pi);
        PhoneSegment seg;
        seg.label = p.at("label").str();
        seg.interval = {p.at("start").num(), p.at("end").num()};
        seg.is_vowel = p.at("is_vowel").boolean();
        if (seg.is_vowel) {
          syl.nucleus_index = word.phones.size();
          ++vowels;
        }
        word.phones.push_back(std::move(seg));
      }
      syl.count = word.phones.size() - syl.first;
      if (syl.count == 0)
        throw ValidationError(s.path + ": syllable has no phones");
      if (vowels != 1)
        throw ValidationError(s.path + ": syllable must contain exactly one "
                              "vowel nucleus, found " + std::to_string(vowels));
      word.syllables.push_back(syl);
    }
    utt.words.push_back(std::move(word));
  }
  validate(utt);
  return utt;
}

std::string describe_segment(const Utterance& utt, std::size_t wi,
                             std::optional<std::size_t> pi) {
  std::ostringstream s;
  s << "utterance '" << utt.id << "' word " << wi << " ('"
    << utt.words[wi].orthography << "')";
  if (pi) s << " phone " << *pi << " ('" << utt.words[wi].phones[*pi].label << "')";
  return s.str();
}

}  // namespace

std::vector<std::string> WordToken::phone_labels() const {
  std::vector<std::string> out;
  out.reserve(phones.size());
  for (const auto& p : phones) out.push_back(p.label);
  return out;
}

std::string make_word_id(const std::string& utterance_id,
                         std::size_t word_index) {
  return utterance_id + ":" + std::to_string(word_index);
}

std::string VowelToken::word_id() const {
  return make_word_id(utterance_id, word_index);
}

std::string VowelToken::token_id() const {
  return word_id() + ":" + std::to_string(syllable_index);
}

void validate(const Utterance& utt, std::optional<double> audio_duration) {
  constexpr double kSlack = 1e-6;
  auto check_interval = [&](const Interval& iv, const std::string& what) {
    if (!(iv.start < iv.end))
      throw ValidationError(what + ": end (" + format_double(iv.end) +
                            ") must be greater than start (" +
                            format_double(iv.start) + ")");
    if (iv.start < 0)
      throw ValidationError(what + ": negative start time");
    if (audio_duration && iv.end > *audio_duration + kSlack)
      throw ValidationError(what + ": ends at " + format_double(iv.end) +
                            " s, past the audio duration " +
                            format_double(*audio_duration) + " s");
  };
  for (std::size_t wi = 0; wi < utt.words.size(); ++wi) {
    const WordToken& w = utt.words[wi];
    check_interval(w.interval, describe_segment(utt, wi, {}));
    if (wi > 0 && w.interval.start < utt.words[wi - 1].interval.end)
      throw ValidationError(describe_segment(utt, wi, {}) +
                            ": overlaps or precedes the previous word");
    for (std::size_t pi = 0; pi < w.phones.size(); ++pi) {
      const auto& p = w.phones[pi];
      std::string what = describe_segment(utt, wi, pi);
      check_interval(p.interval, what);
      if (p.interval.start < w.interval.start - kSlack ||
          p.interval.end > w.interval.end + kSlack)
        throw ValidationError(what + ": lies outside its word interval");
      if (pi > 0 && p.interval.start < w.phones[pi - 1].interval.end - kSlack)
        throw ValidationError(what + ": overlaps the previous phone");
    }
    std::size_t next = 0;
    for (const auto& s : w.syllables) {
      if (s.first != next || s.count == 0)
        throw ValidationError(describe_segment(utt, wi, {}) +
                              ": syllables do not partition the phone list");
      if (s.nucleus_index < s.first || s.nucleus_index >= s.first + s.count ||
          !w.phones[s.nucleus_index].is_vowel)
        throw ValidationError(describe_segment(utt, wi, {}) +
                              ": syllable nucleus is not a vowel inside it");
      next = s.first + s.count;
    }
    if (next != w.phones.size())
      throw ValidationError(describe_segment(utt, wi, {}) +
                            ": syllables do not cover all phones");
  }
}

Utterance parse_alignment(const std::string& json_text,
                          std::optional<double> audio_duration) {
  Utterance utt = utterance_from_json(parse_json_text(json_text, "alignment"),
                                      "alignment");
  if (audio_duration) validate(utt, audio_duration);
  return utt;
}

std::vector<Utterance> parse_alignment_file(const std::string& path) {
  std::string text = read_file(path);
  std::vector<Utterance> out;
  bool single = true;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error&) {
    single = false;
  }
  if (single) {
    if (doc.is_array()) {
      for (std::size_t i = 0; i < doc.size(); ++i)
        out.push_back(
            utterance_from_json(doc[i], path + "[" + std::to_string(i) + "]"));
    } else {
      out.push_back(utterance_from_json(doc, path));
    }
    return out;
  }
  std::istringstream lines(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::string where = path + ":" + std::to_string(lineno);
    out.push_back(utterance_from_json(parse_json_text(line, where), where));
  }
  return out;
}

std::string serialize_alignment(const Utterance& utt) {
  json doc;
  doc["id"] = utt.id;
  doc["language"] = std::string(to_string(utt.language));
  doc["audio"] = utt.audio_path;
  doc["sample_rate"] = utt.sample_rate;
  doc["words"] = json::array();
  for (const auto& w : utt.words) {
    json jw;
    jw["orth"] = w.orthography;
    jw["start"] = w.interval.start;
    jw["end"] = w.interval.end;
    jw["syllables"] = json::array();
    for (const auto& s : w.syllables) {
      json js;
      js["phones"] = json::array();
      for (std::size_t i = s.first; i < s.first + s.count; ++i) {
        const auto& p = w.phones[i];
        js["phones"].push_back({{"label", p.label},
                                {"start", p.interval.start},
                                {"end", p.interval.end},
                                {"is_vowel", p.is_vowel}});
      }
      jw["syllables"].push_back(std::move(js));
    }
    doc["words"].push_back(std::move(jw));
  }
  return doc.dump();
}

PhoneInventory parse_inventory(const std::string& json_text) {
  json doc = parse_json_text(json_text, "inventory");
  Cursor root{doc, "inventory#"};
  PhoneInventory inv;
  try {
    inv.language = parse_language(root.at("language").str());
  } catch (const ValidationError& e) {
    throw ParseError(std::string("inventory#/language: ") + e.what());
  }
  Cursor vowels = root.at("vowels");
  for (std::size_t i = 0; i < vowels.array().size(); ++i)
    inv.vowels.insert(vowels.at(i).str());
  if (doc.contains("diphthongs")) {
    Cursor d = root.at("diphthongs");
    for (std::size_t i = 0; i < d.array().size(); ++i)
      inv.diphthongs.insert(d.at(i).str());
  }
  for (const auto& d : inv.diphthongs)
    if (!inv.vowels.count(d))
      throw ValidationError("inventory: diphthong '" + d +
                            "' is not listed among the vowels");
  return inv;
}

PhoneInventory load_inventory(const std::string& path) {
  try {
    return parse_inventory(read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::string serialize_inventory(const PhoneInventory& inv) {
  json doc;
  doc["language"] = std::string(to_string(inv.language));
  doc["vowels"] = std::vector<std::string>(inv.vowels.begin(), inv.vowels.end());
  doc["diphthongs"] =
      std::vector<std::string>(inv.diphthongs.begin(), inv.diphthongs.end());
  return doc.dump(2);
}

Selection select_bisyllabic(const Utterance& utt, const PhoneInventory& inv,
                            bool strict) {
  if (inv.language != utt.language)
    throw ContractError("inventory for " + std::string(to_string(inv.language)) +
                        " applied to " + std::string(to_string(utt.language)) +
                        " utterance '" + utt.id + "'");
  Selection sel;
  for (std::size_t wi = 0; wi < utt.words.size(); ++wi) {
    const WordToken& w = utt.words[wi];
    if (w.syllables.size() != 2) continue;
    bool keep = true;
    for (const auto& s : w.syllables) {
      const std::string& nucleus = w.phones[s.nucleus_index].label;
      if (!inv.is_vowel(nucleus)) {
        std::string msg = "nucleus '" + nucleus + "' of word '" +
                          w.orthography + "' is not in the " +
                          std::string(to_string(inv.language)) +
                          " vowel inventory";
        if (strict)
          throw DataConsistencyError("utterance '" + utt.id + "': " + msg);
        sel.issues.push_back({utt.id, wi, msg});
        keep = false;
        break;
      }
      if (inv.is_diphthong(nucleus)) keep = false;
    }
    if (!keep) continue;
    SelectedWord sw;
    sw.word_index = wi;
    sw.word = &w;
    VowelToken* targets[2] = {&sw.first, &sw.second};
    for (int k = 0; k < 2; ++k) {
      const auto& nucleus = w.phones[w.syllables[k].nucleus_index];
      VowelToken& t = *targets[k];
      t.utterance_id = utt.id;
      t.word_index = wi;
      t.syllable_index = k;
      t.phone_label = nucleus.label;
      t.interval = nucleus.interval;
      t.word_interval = w.interval;
      t.language = utt.language;
      t.stress = Stress::unknown;
    }
    sel.words.push_back(std::move(sw));
  }
  return sel;
}

std::map<Language, LanguageStats> corpus_stats(
    const std::vector<VowelToken>& tokens) {
  struct WordInfo {
    Language language;
    double duration;
    bool first_stressed = false;
  };
  std::map<std::string, WordInfo> words;
  for (const auto& t : tokens) {
    auto [it, inserted] = words.try_emplace(
        t.word_id(), WordInfo{t.language, t.word_interval.length()});
    if (t.syllable_index == 0 && t.stress == Stress::stressed)
      it->second.first_stressed = true;
  }
  std::map<Language, LanguageStats> out;
  std::map<Language, std::size_t> first;
  for (const auto& [id, info] : words) {
    auto& s = out[info.language];
    s.word_count += 1;
    s.hours += info.duration / 3600.0;
    if (info.first_stressed) first[info.language] += 1;
  }
  for (auto& [lang, s] : out)
    s.pct_stress_first_syllable =
        s.word_count ? 100.0 * static_cast<double>(first[lang]) /
                           static_cast<double>(s.word_count)
                     : 0.0;
  return out;
}

}  // namespace stressprobe::corpus
