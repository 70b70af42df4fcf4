// Copyright 2026 The dbnsmooth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DBN_RNG_HPP_
#define DBN_RNG_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace dbn {

// Seeded generator with a fully specified algorithm so that draws reproduce
// across platforms: std::mt19937_64 (whose output sequence is fixed by the
// standard), uniform doubles taken as the top 53 bits times 2^-53.
//
// Sub-streams are derived from a root seed and a stream name with FNV-1a
// followed by a splitmix64 finalizer, so "model" and "evidence" draws never
// interfere with each other.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t root_seed, std::string_view stream)
      : engine_(derive_seed(root_seed, stream)) {}

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Index drawn from an unnormalized nonnegative weight vector.
  int categorical(std::span<const double> weights);

  static std::uint64_t derive_seed(std::uint64_t root_seed, std::string_view stream);

 private:
  std::mt19937_64 engine_;
};

}  // namespace dbn

#endif  // DBN_RNG_HPP_
