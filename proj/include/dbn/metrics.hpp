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

#ifndef DBN_METRICS_HPP_
#define DBN_METRICS_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dbn/marginals.hpp"

namespace dbn {

// L1 error per slice: delta_t = sum_i sum_s |P(X_t^i=s|y) - Q(X_t^i=s|y)|.
struct L1Report {
  std::vector<double> per_t;
  std::vector<std::vector<double>> per_node;  // [t][h]
  double total = 0.0;
};

// Throws InvalidArgument naming the first (t, node[, state]) key present in
// one input but not the other.
L1Report l1_error(const SmoothedMarginals& exact, const SmoothedMarginals& approx);

// Period p such that marginals at iterations k and k+p agree within
// match_tol while consecutive iterations differ by more than change_tol, for
// every k from burn_in on. Needs at least 6 recorded iterations; returns
// nullopt when there is no such period (including converged runs).
struct OscillationOptions {
  double match_tol = 1e-6;
  double change_tol = 1e-3;
  int max_period = 4;
  // -1: half of the recorded iterations.
  int burn_in = -1;
};
std::optional<int> oscillation_period(std::span<const SmoothedMarginals> history,
                                      const OscillationOptions& options = {});

struct TimingRecord {
  std::string model;
  std::string algorithm;
  int num_chains = 0;
  int arity = 0;
  int horizon = 0;
  int iterations = 1;
  int repeat = 0;
  double seconds = 0.0;
  double seconds_per_slice = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
// Ordinary least squares y = slope * x + intercept.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> values);

}  // namespace dbn

#endif  // DBN_METRICS_HPP_
