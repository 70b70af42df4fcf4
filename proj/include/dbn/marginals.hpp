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

#ifndef DBN_MARGINALS_HPP_
#define DBN_MARGINALS_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dbn/model.hpp"

namespace dbn {

// Per (t, hidden node) smoothed distributions P(X_t^h | y_{1:T}).
class SmoothedMarginals {
 public:
  SmoothedMarginals() = default;
  SmoothedMarginals(int horizon, std::vector<int> arities);
  static SmoothedMarginals for_model(const DiscreteDbn& dbn, int horizon);

  int horizon() const { return horizon_; }
  int num_hidden() const { return static_cast<int>(arities_.size()); }
  int arity(int h) const { return arities_[h]; }
  const std::vector<int>& arities() const { return arities_; }

  std::span<double> at(int t, int h) { return values_[t * num_hidden() + h]; }
  std::span<const double> at(int t, int h) const { return values_[t * num_hidden() + h]; }

  // log P(y_{1:T}) when the producing route computes it.
  std::optional<double> log_evidence;

 private:
  int horizon_ = 0;
  std::vector<int> arities_;
  std::vector<std::vector<double>> values_;
};

// Largest absolute difference over all (t, h, state). Throws InvalidArgument
// when the index sets differ.
double max_abs_difference(const SmoothedMarginals& a, const SmoothedMarginals& b);

// Normalizes v in place; returns the previous sum. A zero vector is left as is.
double normalize(std::span<double> v);

// CSV with header t,node,state,probability; t and state are 1- and 0-based.
std::string marginals_to_csv(const SmoothedMarginals& marginals, const DiscreteDbn& dbn);

}  // namespace dbn

#endif  // DBN_MARGINALS_HPP_
