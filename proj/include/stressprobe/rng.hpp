// include/stressprobe/rng.hpp

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

#ifndef STRESSPROBE_RNG_HPP_
#define STRESSPROBE_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace stressprobe {

std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent stream seed from a global seed and a list of
// provenance tags. Order of tags matters.
std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::string_view> tags);

// mt19937_64 output is fixed by the standard, but the <random> distributions
// are not, so every draw goes through the helpers below to stay bit-identical
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace stressprobe

#endif  // STRESSPROBE_RNG_HPP_
