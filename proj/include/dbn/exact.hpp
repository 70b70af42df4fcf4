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

#ifndef DBN_EXACT_HPP_
#define DBN_EXACT_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dbn/factor.hpp"
#include "dbn/marginals.hpp"
#include "dbn/model.hpp"

namespace dbn {

enum class Parallelism { kSerial, kOpenMp };

struct ExactOptions {
  std::size_t max_flat_states = 4096;
  std::size_t max_frontier_entries = std::size_t{1} << 22;
  std::size_t max_brute_force_states = std::size_t{1} << 24;
};

// ---------------------------------------------------------------------------
// Flattened HMM. Joint hidden states are encoded mixed radix over the hidden
// nodes in declaration order, first node most significant.

struct FlatHmm {
  int num_states = 0;
  std::vector<double> prior;       // pi(s)
  std::vector<double> transition;  // row-major, M(i, j) = P(X_{t+1}=j | X_t=i)

  double at(int i, int j) const {
    return transition[static_cast<std::size_t>(i) * num_states + j];
  }
};

// Product of the hidden arities; throws CapExceeded past max_states.
std::size_t flat_state_count(const DiscreteDbn& dbn, std::size_t max_states);
std::vector<int> decode_flat_state(const DiscreteDbn& dbn, std::size_t state);

FlatHmm flatten_to_hmm(const DiscreteDbn& dbn, std::size_t max_states = 4096,
                       Parallelism parallelism = Parallelism::kSerial);

// W_t(s) = P(y_t | X_t = s), one vector per slice.
std::vector<std::vector<double>> flat_likelihoods(const DiscreteDbn& dbn,
                                                  const EvidenceSequence& evidence,
                                                  std::size_t max_states = 4096);

// Row-major [t * num_states + s] tables.
struct FlatSmoothing {
  int num_states = 0;
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> gamma;
  double log_evidence = 0.0;

  std::span<const double> alpha_at(int t) const { return row(alpha, t); }
  std::span<const double> beta_at(int t) const { return row(beta, t); }
  std::span<const double> gamma_at(int t) const { return row(gamma, t); }

 private:
  std::span<const double> row(const std::vector<double>& v, int t) const {
    return {v.data() + static_cast<std::size_t>(t) * num_states, static_cast<std::size_t>(num_states)};
  }
};

// Normalized forwards-backwards: alpha_t ~ W_t M^T alpha_{t-1}, alpha_1 ~ W_1 pi,
// beta_t ~ M W_{t+1} beta_{t+1}, beta_T = 1, gamma_t ~ alpha_t .* beta_t.
// Throws ZeroProbabilityEvidence when an alpha normalizer vanishes.
FlatSmoothing hmm_forwards_backwards(const FlatHmm& hmm,
                                     std::span<const std::vector<double>> likelihoods,
                                     Parallelism parallelism = Parallelism::kSerial);

// flatten + forwards-backwards + per-node marginalization.
SmoothedMarginals flat_smoother(const DiscreteDbn& dbn, const EvidenceSequence& evidence,
                                const ExactOptions& options = {},
                                Parallelism parallelism = Parallelism::kSerial);

namespace kernels {

// out = M^T alpha.
void predict_serial(const FlatHmm& hmm, std::span<const double> alpha, std::span<double> out);
void predict_parallel(const FlatHmm& hmm, std::span<const double> alpha, std::span<double> out);
// out = M v.
void back_project_serial(const FlatHmm& hmm, std::span<const double> v, std::span<double> out);
void back_project_parallel(const FlatHmm& hmm, std::span<const double> v, std::span<double> out);

}  // namespace kernels

// ---------------------------------------------------------------------------
// Frontier algorithm

struct FrontierAction {
  enum class Kind { kAdd, kRemove };
  Kind kind = Kind::kAdd;
  // Hidden position; adds refer to slice t, removes to slice t-1.
  int hidden = 0;
  int members_after = 0;
  std::size_t entries_after = 0;
};

// The add/remove sequence that advances the frontier from slice t-1 to t.
struct FrontierSchedule {
  std::vector<FrontierAction> actions;
  int max_members = 0;
  std::size_t max_entries = 0;
};

// Greedy schedule: remove whenever some slice t-1 node has all its children
// in the frontier (lowest index first); otherwise add the slice t node whose
// parents are all present and that gives the smallest joint (lowest index on
// ties). Requires a regular DBN.
FrontierSchedule choose_frontier_schedule(const DiscreteDbn& dbn);

// One line per action and slice transition:
// "slice k: +name (frontier size s)" / "slice k: -name (frontier size s)".
std::string frontier_trace(const DiscreteDbn& dbn, const FrontierSchedule& schedule, int horizon);

// Exact smoothing by sweeping the frontier forwards then backwards. Fills
// log_evidence. Throws CapExceeded if the largest frontier joint exceeds
// options.max_frontier_entries.
SmoothedMarginals frontier_smoother(const DiscreteDbn& dbn, const EvidenceSequence& evidence,
                                    const ExactOptions& options = {});

// ---------------------------------------------------------------------------
// Brute-force oracle: enumerates every joint hidden trajectory.

SmoothedMarginals brute_force_joint(const DiscreteDbn& dbn, const EvidenceSequence& evidence,
                                    const ExactOptions& options = {});

}  // namespace dbn

#endif  // DBN_EXACT_HPP_
