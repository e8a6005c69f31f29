// tests/test_corpus.cpp

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "json.hpp"
#include "stressprobe/corpus.hpp"

using namespace stressprobe;
using namespace stressprobe::corpus;
using nlohmann::json;

namespace {

// A syllable "C V" at [t, t + 0.2), consonant 0.05 s.
json syllable(const std::string& c, const std::string& v, double t) {
  return {{"phones",
           {{{"label", c}, {"start", t}, {"end", t + 0.05}, {"is_vowel", false}},
            {{"label", v}, {"start", t + 0.05}, {"end", t + 0.2}, {"is_vowel", true}}}}};
}

json word(const std::string& orth, std::vector<std::pair<std::string, std::string>> syls,
          double t) {
  json w = {{"orth", orth}, {"start", t}, {"end", t + 0.2 * syls.size()}};
  w["syllables"] = json::array();
  for (std::size_t i = 0; i < syls.size(); ++i)
    w["syllables"].push_back(syllable(syls[i].first, syls[i].second, t + 0.2 * i));
  return w;
}

json utterance(std::vector<json> words, const std::string& lang = "nl") {
  return {{"id", "u1"}, {"language", lang}, {"audio", "u1.wav"}, {"sample_rate", 16000},
          {"words", words}};
}

PhoneInventory dutch() {
  PhoneInventory inv;
  inv.language = Language::nl;
  inv.vowels = {"a", "e", "i", "o", "u", "ei"};
  inv.diphthongs = {"ei"};
  return inv;
}

}  // namespace

TEST_CASE("minimal document: one bisyllabic word with four phones") {
  auto utt = parse_alignment(utterance({word("kano", {{"k", "a"}, {"n", "o"}}, 0.0)}).dump());
  REQUIRE(utt.words.size() == 1);
  CHECK(utt.words[0].syllables.size() == 2);
  CHECK(utt.words[0].phones.size() == 4);
  CHECK(utt.language == Language::nl);
  CHECK(utt.words[0].phone_labels() == std::vector<std::string>{"k", "a", "n", "o"});
}

TEST_CASE("three words with 7 syllables") {
  auto utt = parse_alignment(utterance({word("a", {{"k", "a"}, {"n", "o"}}, 0.0),
                                        word("b", {{"t", "e"}, {"m", "i"}}, 0.5),
                                        word("c", {{"s", "a"}, {"p", "u"}, {"l", "e"}}, 1.0)})
                                 .dump());
  REQUIRE(utt.words.size() == 3);
  std::vector<std::size_t> counts;
  std::size_t total = 0;
  for (const auto& w : utt.words) {
    counts.push_back(w.syllables.size());
    total += w.syllables.size();
  }
  CHECK(counts == std::vector<std::size_t>{2, 2, 3});
  CHECK(total == 7);
}

TEST_CASE("interval violations are validation errors naming the segment") {
  json doc = utterance({word("kano", {{"k", "a"}, {"n", "o"}}, 0.0)});
  doc["words"][0]["syllables"][1]["phones"][0]["end"] = 0.19;  // end < start
  try {
    parse_alignment(doc.dump());
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("kano") != std::string::npos);
  }

  json overlap = utterance({word("a", {{"k", "a"}, {"n", "o"}}, 0.0),
                            word("b", {{"t", "e"}, {"m", "i"}}, 0.3)});
  CHECK_THROWS_AS(parse_alignment(overlap.dump()), ValidationError);

  json ok = utterance({word("kano", {{"k", "a"}, {"n", "o"}}, 0.0)});
  CHECK_THROWS_AS(parse_alignment(ok.dump(), 0.3), ValidationError);
  CHECK_NOTHROW(parse_alignment(ok.dump(), 0.4));
}

TEST_CASE("malformed documents are parse errors with context") {
  try {
    parse_alignment("{\"id\": \"u1\",\n \"language\": }");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  json doc = utterance({word("kano", {{"k", "a"}, {"n", "o"}}, 0.0)});
  doc["words"][0].erase("orth");
  try {
    parse_alignment(doc.dump());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("/words/0") != std::string::npos);
  }
  doc = utterance({word("kano", {{"k", "a"}, {"n", "o"}}, 0.0)});
  doc["words"][0]["start"] = "zero";
  CHECK_THROWS_AS(parse_alignment(doc.dump()), ParseError);
  doc = utterance({word("kano", {{"k", "a"}, {"n", "o"}}, 0.0)}, "xx");
  CHECK_THROWS_AS(parse_alignment(doc.dump()), ValidationError);
}

TEST_CASE("syllables need exactly one vowel nucleus") {
  json doc = utterance({word("kano", {{"k", "a"}, {"n", "o"}}, 0.0)});
  doc["words"][0]["syllables"][1]["phones"][1]["is_vowel"] = false;
  CHECK_THROWS_AS(parse_alignment(doc.dump()), ValidationError);
}

TEST_CASE("serialization round-trips intervals bit-exactly") {
  json doc = utterance({word("kano", {{"k", "a"}, {"n", "o"}}, 0.1 + 0.2),
                        word("b", {{"t", "e"}, {"m", "i"}}, 1.0 / 3.0 + 0.5)});
  auto a = parse_alignment(doc.dump());
  auto b = parse_alignment(serialize_alignment(a));
  REQUIRE(a.words.size() == b.words.size());
  for (std::size_t w = 0; w < a.words.size(); ++w) {
    CHECK(a.words[w].interval == b.words[w].interval);
    for (std::size_t p = 0; p < a.words[w].phones.size(); ++p)
      CHECK(a.words[w].phones[p].interval == b.words[w].phones[p].interval);
  }
  CHECK(serialize_alignment(a) == serialize_alignment(b));
}

TEST_CASE("JSON-lines files hold several utterances") {
  auto dir = std::filesystem::temp_directory_path() / "stressprobe_corpus_test";
  std::filesystem::create_directories(dir);
  json u1 = utterance({word("kano", {{"k", "a"}, {"n", "o"}}, 0.0)});
  json u2 = u1;
  u2["id"] = "u2";
  write_file((dir / "x.jsonl").string(), u1.dump() + "\n" + u2.dump() + "\n");
  auto utts = parse_alignment_file((dir / "x.jsonl").string());
  REQUIRE(utts.size() == 2);
  CHECK(utts[1].id == "u2");
  write_file((dir / "y.json").string(), u1.dump(2));
  CHECK(parse_alignment_file((dir / "y.json").string()).size() == 1);
}

TEST_CASE("select_bisyllabic keeps words with two monophthong nuclei") {
  auto utt = parse_alignment(utterance({word("kano", {{"k", "a"}, {"n", "o"}}, 0.0),
                                        word("klei", {{"k", "ei"}, {"n", "o"}}, 0.5),
                                        word("tri", {{"s", "a"}, {"p", "u"}, {"l", "e"}}, 1.0),
                                        word("mono", {{"m", "a"}}, 1.7)})
                                 .dump());
  auto sel = select_bisyllabic(utt, dutch());
  REQUIRE(sel.words.size() == 1);
  CHECK(sel.issues.empty());
  const auto& w = sel.words[0];
  CHECK(w.word->orthography == "kano");
  CHECK(w.first.stress == Stress::unknown);
  CHECK(w.second.stress == Stress::unknown);
  CHECK(w.first.phone_label == "a");
  CHECK(w.second.phone_label == "o");
  CHECK(w.first.interval.end <= w.second.interval.start);
  CHECK(w.first.token_id() == "u1:0:0");
  CHECK(w.second.word_id() == "u1:0");
}

TEST_CASE("nucleus outside the vowel set: recorded issue, or error when strict") {
  auto utt = parse_alignment(utterance({word("kany", {{"k", "a"}, {"n", "y"}}, 0.0),
                                        word("kano", {{"k", "a"}, {"n", "o"}}, 0.5)})
                                 .dump());
  auto sel = select_bisyllabic(utt, dutch());
  CHECK(sel.words.size() == 1);
  REQUIRE(sel.issues.size() == 1);
  CHECK(sel.issues[0].word_index == 0);
  CHECK_THROWS_AS(select_bisyllabic(utt, dutch(), true), DataConsistencyError);
}

TEST_CASE("inventory language must match") {
  auto utt = parse_alignment(utterance({word("kano", {{"k", "a"}, {"n", "o"}}, 0.0)}, "de").dump());
  CHECK_THROWS_AS(select_bisyllabic(utt, dutch()), ContractError);
}

TEST_CASE("select_bisyllabic is idempotent and order-preserving") {
  auto utt = parse_alignment(utterance({word("a", {{"k", "a"}, {"n", "o"}}, 0.0),
                                        word("b", {{"t", "e"}, {"m", "i"}}, 0.5),
                                        word("c", {{"s", "u"}, {"p", "a"}}, 1.0)})
                                 .dump());
  auto s1 = select_bisyllabic(utt, dutch());
  auto s2 = select_bisyllabic(utt, dutch());
  REQUIRE(s1.words.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(s1.words[i].word_index == i);
    CHECK(s1.words[i].first.token_id() == s2.words[i].first.token_id());
  }
}

TEST_CASE("inventory JSON") {
  auto inv = parse_inventory(R"({"language":"hu","vowels":["a","e:"],"diphthongs":[]})");
  CHECK(inv.language == Language::hu);
  CHECK(inv.is_vowel("e:"));
  CHECK_FALSE(inv.is_diphthong("a"));
  auto back = parse_inventory(serialize_inventory(inv));
  CHECK(back.vowels == inv.vowels);
  CHECK_THROWS_AS(parse_inventory(R"({"language":"hu","vowels":["a"],"diphthongs":["ai"]})"),
                  ValidationError);
}

namespace {
std::vector<VowelToken> words_with_first_stress(int n, int first_stressed, Language lang) {
  std::vector<VowelToken> out;
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s < 2; ++s) {
      VowelToken t;
      t.utterance_id = "u";
      t.word_index = static_cast<std::size_t>(i);
      t.syllable_index = s;
      t.language = lang;
      t.word_interval = {0.0, 0.36};
      bool first = i < first_stressed;
      t.stress = (s == 0) == first ? Stress::stressed : Stress::unstressed;
      out.push_back(t);
    }
  }
  return out;
}
}  // namespace

TEST_CASE("corpus_stats") {
  auto four = corpus_stats(words_with_first_stress(4, 4, Language::hu));
  CHECK(four.at(Language::hu).pct_stress_first_syllable == 100.0);
  auto ten = words_with_first_stress(10, 7, Language::nl);
  auto st = corpus_stats(ten);
  CHECK(st.at(Language::nl).word_count == ten.size() / 2);
  CHECK(st.at(Language::nl).pct_stress_first_syllable == doctest::Approx(70.0));
  CHECK(st.at(Language::nl).hours == doctest::Approx(10 * 0.36 / 3600.0));
  CHECK(corpus_stats({}).empty());
}

TEST_CASE("shipped inventories load for every language") {
  for (Language l : kAllLanguages) {
    auto inv = load_inventory(std::string(STRESSPROBE_INVENTORY_DIR) + "/" +
                              std::string(to_string(l)) + ".json");
    CHECK(inv.language == l);
    CHECK(inv.vowels.size() >= 6);
    for (const auto& d : inv.diphthongs) CHECK(inv.is_vowel(d));
  }
}
