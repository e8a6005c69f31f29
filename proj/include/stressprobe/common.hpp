// include/stressprobe/common.hpp

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

#ifndef STRESSPROBE_COMMON_HPP_
#define STRESSPROBE_COMMON_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stressprobe {

// Error hierarchy. Everything derived from ValidationError maps to CLI exit
// code 2; everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Violated precondition of an operation.
class ContractError : public Error {
 public:
  using Error::Error;
};

class DataConsistencyError : public Error {
 public:
  using Error::Error;
};

class UnsupportedFormatError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class CorruptTensorError : public Error {
 public:
  using Error::Error;
};

// A feature value that cannot be computed for a token (silent vowel, no
// voiced frame, ...). Callers usually turn this into an exclusion.
class UndefinedFeatureError : public Error {
 public:
  using Error::Error;
};

class MissingStageError : public Error {
 public:
  using Error::Error;
};

enum class Language { nl, en, de, pl, hu };

inline constexpr std::array<Language, 5> kAllLanguages = {
    Language::nl, Language::en, Language::de, Language::pl, Language::hu};

std::string_view to_string(Language lang);
Language parse_language(std::string_view code);
bool is_fixed_stress(Language lang);

enum class Stress { unknown, stressed, unstressed };

std::string_view to_string(Stress s);
Stress parse_stress(std::string_view s);

struct Interval {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

double overlap(const Interval& a, const Interval& b);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
// Empty string for nullopt (the "undefined" cell in CSV outputs).
std::string format_optional(const std::optional<double>& v);

std::vector<std::string> split(std::string_view s, char sep);
std::string trim(std::string_view s);

// Stable 64-bit FNV-1a hash, used for seed derivation and content hashes.
std::uint64_t fnv1a(std::string_view bytes,
                    std::uint64_t h = 0xcbf29ce484222325ULL);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace stressprobe

#endif  // STRESSPROBE_COMMON_HPP_
