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

#ifndef DBN_LBP_HPP_
#define DBN_LBP_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dbn/exact.hpp"
#include "dbn/marginals.hpp"
#include "dbn/network.hpp"

namespace dbn {

enum class Schedule {
  // All pi messages in topological order, then all lambda messages in
  // reverse order. One iteration = one forward + one backward sweep.
  kForwardBackward,
  // Every message recomputed from the previous iteration's store.
  kFlooding,
};

struct LbpConfig {
  Schedule schedule = Schedule::kForwardBackward;
  int max_iterations = 1;
  // Weight of the old message: 0 undamped, 1 frozen.
  double damping = 0.0;
  // Converged once the largest absolute message change drops below this.
  double convergence_tol = 1e-9;

  // Throws InvalidArgument unless 0 <= damping <= 1, max_iterations >= 1 and
  // convergence_tol >= 0.
  void validate() const;
};

// pi (parent -> child) and lambda (child -> parent) messages per network
// edge, both over the parent's states. Initialized uniform.
class MessageStore {
 public:
  MessageStore() = default;
  explicit MessageStore(const Network& net);

  int num_edges() const { return static_cast<int>(pi_.size()); }
  std::vector<double>& pi(int e) { return pi_[e]; }
  const std::vector<double>& pi(int e) const { return pi_[e]; }
  std::vector<double>& lambda(int e) { return lambda_[e]; }
  const std::vector<double>& lambda(int e) const { return lambda_[e]; }

  bool operator==(const MessageStore&) const = default;

 private:
  std::vector<std::vector<double>> pi_;
  std::vector<std::vector<double>> lambda_;
};

struct FixedPointCheck {
  bool converged = false;
  double max_delta = 0.0;
};

// converged iff the largest entrywise change over all messages is < tol.
FixedPointCheck detect_fixed_point(const MessageStore& before, const MessageStore& after, double tol);

// (1 - damping) * computed + damping * old, renormalized.
std::vector<double> damp_message(std::span<const double> old_message, std::span<const double> computed,
                                 double damping);

// Node beliefs b(x) ~ pi(x) lambda(x) and family beliefs
// b(x, u) ~ P(x|u) lambda(x) prod_k pi_k(u_k), laid out like the CPT
// (values[config * arity + x]).
struct BeliefSet {
  std::vector<std::vector<double>> node;
  std::vector<std::vector<double>> family;
};

// Sum-product message passing over a Network with fixed local evidence.
class LbpEngine {
 public:
  LbpEngine(const Network& net, std::vector<std::vector<double>> local_evidence);

  // One iteration; returns the largest message change it caused.
  double iterate(Schedule schedule, double damping, Parallelism parallelism = Parallelism::kSerial);

  // Single-message updates on the current store.
  void send_pi_message(int edge, double damping);
  void send_lambda_message(int edge, double damping);
  std::vector<double> compute_pi_message(int edge) const;
  std::vector<double> compute_lambda_message(int edge) const;

  BeliefSet beliefs() const;
  SmoothedMarginals marginals() const;

  const Network& network() const { return net_; }
  const std::vector<std::vector<double>>& local_evidence() const { return local_; }
  const MessageStore& store() const { return store_; }
  void set_store(MessageStore store) { store_ = std::move(store); }
  // Messages that came out all-zero and were replaced by uniform.
  long zero_message_events() const { return zero_events_; }

 private:
  // pi(x) = sum_u P(x|u) prod_k pi_k(u_k), from the given store.
  std::vector<double> node_pi(const MessageStore& store, int id) const;
  // W(x) prod over out-edges (except `skip`) of lambda_e(x).
  std::vector<double> node_lambda(const MessageStore& store, int id, int skip) const;
  void emit_pi(const MessageStore& from, MessageStore& to, int id, double damping, long& events) const;
  void emit_lambda(const MessageStore& from, MessageStore& to, int id, double damping, long& events) const;
  SmoothedMarginals readout(const std::vector<std::vector<double>>& node_beliefs) const;

  const Network& net_;
  std::vector<std::vector<double>> local_;
  MessageStore store_;
  long zero_events_ = 0;
};

struct IterationRecord {
  int iteration = 0;
  double max_delta = 0.0;
  std::optional<double> l1_total;
  std::vector<double> l1_per_t;
};

struct LbpResult {
  SmoothedMarginals marginals;
  std::vector<IterationRecord> trace;
  bool converged = false;
  int iterations = 0;
  long zero_message_events = 0;
  MessageStore store;
  // Marginals after every iteration, when requested.
  std::vector<SmoothedMarginals> history;
};

struct LbpRunOptions {
  // Exact marginals; when given, each trace row carries the L1 error.
  const SmoothedMarginals* reference = nullptr;
  bool record_history = false;
  Parallelism parallelism = Parallelism::kSerial;
};

// Runs config.schedule until the largest message change is below
// config.convergence_tol or max_iterations is reached. Non-convergence is
// reported in the result, never thrown.
LbpResult lbp_smoother(const Network& net, const DiscreteDbn& dbn, const EvidenceSequence& evidence,
                       const LbpConfig& config, const LbpRunOptions& options = {});

// Beliefs from local evidence alone (all incoming messages uniform), read
// out as marginals. Computed directly from the CPTs.
SmoothedMarginals local_evidence_marginals(const Network& net, const DiscreteDbn& dbn,
                                           const EvidenceSequence& evidence);

// CSV: iteration,max_message_delta,l1_error_total[,l1_t1,...,l1_tT].
std::string trace_to_csv(std::span<const IterationRecord> trace);

// Bethe free energy
//   sum_families sum b_F (ln b_F - ln(P(x|u) W(x))) - sum_i (d_i - 1) sum b_i ln b_i
// with d_i = 1 + number of children. Returns +inf when a belief is positive
// where the family factor is zero.
double bethe_free_energy(const Network& net, const std::vector<std::vector<double>>& local_evidence,
                         const BeliefSet& beliefs);

}  // namespace dbn

#endif  // DBN_LBP_HPP_
