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

#ifndef DBN_FACTOR_HPP_
#define DBN_FACTOR_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace dbn {

// Dense nonnegative table over a list of discrete variables, mixed radix with
// the first variable most significant. Variable ids are caller-defined.
class Factor {
 public:
  // The empty-scope factor with value 1.
  Factor() : values_{1.0} {}
  Factor(std::vector<int> vars, std::vector<int> cards, std::vector<double> values);

  const std::vector<int>& vars() const { return vars_; }
  const std::vector<int>& cards() const { return cards_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  std::size_t size() const { return values_.size(); }

  bool contains(int var) const;
  int card_of(int var) const;

  Factor product(const Factor& other) const;
  Factor sum_out(int var) const;
  // Sum onto keep (every id must be in scope); result vars ordered as keep.
  Factor marginal(std::span<const int> keep) const;
  // Divides by the total mass and returns it. Zero-mass factors are untouched.
  double normalize();
  double total() const;

 private:
  std::vector<int> vars_;
  std::vector<int> cards_;
  std::vector<double> values_;
};

// Number of entries of a factor over the union of the two scopes.
std::size_t joint_size(const Factor& a, const Factor& b);

struct EliminationOptions {
  std::size_t max_factor_entries = std::size_t{1} << 24;
};

// Sum-product variable elimination of every variable outside `query`, in
// greedy min-fill order (ties to the lowest variable id). Returns the
// unnormalized factor over query in the given order. Throws CapExceeded
// naming the first intermediate factor that exceeds the cap.
Factor eliminate_to(std::vector<Factor> factors, std::span<const int> query,
                    const EliminationOptions& options = {});

// Greedy min-fill ordering of the vertices flagged in `eliminable` on an
// undirected graph given as adjacency lists; ties to the lowest vertex.
std::vector<int> min_fill_order(std::vector<std::vector<int>> adjacency,
                                const std::vector<bool>& eliminable);

}  // namespace dbn

#endif  // DBN_FACTOR_HPP_
