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

#ifndef DBN_MODEL_HPP_
#define DBN_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dbn {

class Rng;

enum class NodeKind { kHidden, kObserved };
enum class CptRole { kPrior, kTransition };

struct NodeSpec {
  std::string name;
  int arity = 2;
  NodeKind kind = NodeKind::kHidden;

  bool operator==(const NodeSpec&) const = default;
};

// Directed edge between node indices of the two-slice template. For inter
// edges the parent lives in slice t-1 and the child in slice t.
struct Edge {
  int parent = 0;
  int child = 0;

  bool operator==(const Edge&) const = default;
  auto operator<=>(const Edge&) const = default;
};

// A CPT parent: template node index and time lag (0 same slice, 1 previous).
struct ParentRef {
  int node = 0;
  int lag = 0;

  bool operator==(const ParentRef&) const = default;
  auto operator<=>(const ParentRef&) const = default;
};

// P(child | parents) as a dense table. Rows are parent configurations in
// mixed radix with the first parent most significant; values are stored
// row-major, i.e. values[config * child_arity + child].
class ConditionalTable {
 public:
  ConditionalTable() = default;
  ConditionalTable(int child_arity, std::vector<int> parent_arities,
                   std::vector<double> values);

  int child_arity() const { return child_arity_; }
  const std::vector<int>& parent_arities() const { return parent_arities_; }
  std::size_t num_configs() const { return num_configs_; }
  const std::vector<double>& values() const { return values_; }

  double at(int child, std::size_t config) const {
    return values_[config * static_cast<std::size_t>(child_arity_) + child];
  }
  std::span<const double> row(std::size_t config) const {
    return {values_.data() + config * child_arity_, static_cast<std::size_t>(child_arity_)};
  }

  std::size_t config_index(std::span<const int> parent_values) const;

  // Throws InvalidArgument naming the first row whose entries leave [0,1]
  // or whose sum misses 1 by more than tol.
  void check_stochastic(double tol = 1e-12) const;

  bool operator==(const ConditionalTable&) const = default;

 private:
  int child_arity_ = 0;
  std::vector<int> parent_arities_;
  std::size_t num_configs_ = 1;
  std::vector<double> values_;
};

struct NodeCpt {
  std::vector<ParentRef> parents;
  ConditionalTable table;

  bool operator==(const NodeCpt&) const = default;
};

// Two-slice discrete DBN template. Immutable after construction; the
// constructor checks every structural invariant and throws InvalidArgument.
class DiscreteDbn {
 public:
  DiscreteDbn() = default;
  DiscreteDbn(std::vector<NodeSpec> nodes, std::vector<Edge> intra_edges,
              std::vector<Edge> inter_edges, std::vector<NodeCpt> prior_cpts,
              std::vector<NodeCpt> transition_cpts);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_hidden() const { return static_cast<int>(hidden_.size()); }
  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  const NodeSpec& node(int i) const { return nodes_[i]; }
  const std::vector<Edge>& intra_edges() const { return intra_; }
  const std::vector<Edge>& inter_edges() const { return inter_; }

  const NodeCpt& cpt(int node, CptRole role) const {
    return role == CptRole::kPrior ? prior_[node] : transition_[node];
  }
  const NodeCpt& prior_cpt(int node) const { return prior_[node]; }
  const NodeCpt& transition_cpt(int node) const { return transition_[node]; }
  // Prior-form CPT for slice 0, transition-form afterwards.
  const NodeCpt& cpt_at(int node, int t) const {
    return t == 0 ? prior_[node] : transition_[node];
  }

  // Template node indices of hidden / observed nodes, in declaration order.
  const std::vector<int>& hidden_nodes() const { return hidden_; }
  const std::vector<int>& observed_nodes() const { return observed_; }
  // Position of a node within hidden_nodes(), or -1.
  int hidden_position(int node) const { return hidden_pos_[node]; }
  int hidden_arity(int h) const { return nodes_[hidden_[h]].arity; }

  const std::vector<int>& intra_children(int node) const { return intra_children_[node]; }
  const std::vector<int>& inter_children(int node) const { return inter_children_[node]; }

  bool operator==(const DiscreteDbn& other) const {
    return nodes_ == other.nodes_ && intra_ == other.intra_ && inter_ == other.inter_ &&
           prior_ == other.prior_ && transition_ == other.transition_;
  }

 private:
  std::vector<NodeSpec> nodes_;
  std::vector<Edge> intra_;
  std::vector<Edge> inter_;
  std::vector<NodeCpt> prior_;
  std::vector<NodeCpt> transition_;
  std::vector<int> hidden_;
  std::vector<int> observed_;
  std::vector<int> hidden_pos_;
  std::vector<std::vector<int>> intra_children_;
  std::vector<std::vector<int>> inter_children_;
};

struct RegularityReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Checks the regular-DBN topology: hidden->hidden edges only from slice t-1
// to t, hidden->observed edges only within a slice, nothing else, and every
// hidden node has a child in the next slice.
RegularityReport validate_regular(const DiscreteDbn& dbn);

// Throws InvalidArgument unless the model is regular and every observed node
// has exactly one (hidden, same-slice) parent. All smoothers require this.
void require_inference_ready(const DiscreteDbn& dbn);

// The DBN unrolled over a fixed horizon. Node id = t * num_nodes + index.
struct UnrolledNetwork {
  struct Node {
    int slice = 0;
    int index = 0;
    std::vector<int> parents;  // unrolled ids, in CPT parent order
    const ConditionalTable* cpt = nullptr;
    CptRole role = CptRole::kPrior;
  };
  int horizon = 0;
  int slice_size = 0;
  std::vector<Node> nodes;
  std::vector<Edge> edges;  // over unrolled ids

  int id(int t, int index) const { return t * slice_size + index; }
};

// The returned network points into dbn's tables; dbn must outlive it.
UnrolledNetwork unroll(const DiscreteDbn& dbn, int horizon);

// True iff the directed graph has a topological order.
bool is_acyclic(int num_nodes, std::span<const Edge> edges);

// ---------------------------------------------------------------------------
// Evidence

inline constexpr int kMissing = -1;

class EvidenceSequence {
 public:
  EvidenceSequence() = default;
  EvidenceSequence(int horizon, int num_nodes);

  int horizon() const { return horizon_; }
  int num_nodes() const { return num_nodes_; }
  // t is 0-based.
  int value(int t, int node) const { return values_[t * num_nodes_ + node]; }
  void set(int t, int node, int value) { values_[t * num_nodes_ + node] = value; }

  // Throws InvalidArgument on values for hidden nodes or outside the arity.
  void check(const DiscreteDbn& dbn) const;

  bool operator==(const EvidenceSequence&) const = default;

 private:
  int horizon_ = 0;
  int num_nodes_ = 0;
  std::vector<int> values_;
};

// Ancestral sample of a full trajectory; only observed values are kept.
EvidenceSequence sample_evidence(const DiscreteDbn& dbn, int horizon, Rng& rng);

// W_t^h(x) = product of P(y | x) over the observed children of hidden node h
// at slice t; missing values contribute 1.
class NodeLikelihoods {
 public:
  NodeLikelihoods(const DiscreteDbn& dbn, const EvidenceSequence& evidence);

  int horizon() const { return horizon_; }
  int num_hidden() const { return num_hidden_; }
  std::span<const double> at(int t, int h) const { return values_[t * num_hidden_ + h]; }

 private:
  int horizon_ = 0;
  int num_hidden_ = 0;
  std::vector<std::vector<double>> values_;
};

// ---------------------------------------------------------------------------
// Builders

struct BuildOptions {
  // Arity of generated observation nodes; 0 means "same as hidden".
  int observed_arity = 0;
  // Each random CPT entry is u^sharpness for u ~ U(0,1) before row
  // normalization. 1 gives plain uniform-then-normalize rows.
  double sharpness = 1.0;
};

// Coupled HMM: hidden chain i depends on chains i-1, i, i+1 of the previous
// slice and emits one private observation.
DiscreteDbn build_chmm(int num_chains, int hidden_arity, std::uint64_t seed,
                       const BuildOptions& options = {});

// Chains with self-transitions only (no coupling), one observation each.
DiscreteDbn build_factorial_hmm(int num_chains, int hidden_arity, std::uint64_t seed,
                                const BuildOptions& options = {});

// Water-treatment DBN: 8 binary hidden nodes per slice with the topology in
// assets/water_topology.json, evidence nodes as listed there.
DiscreteDbn build_water_network(std::uint64_t seed, const BuildOptions& options = {});

// Builds a random-CPT DBN from an explicit topology. Inter parents of hidden
// node h are given by hidden index; observations list the hidden parent of
// each observed node.
struct Topology {
  std::vector<std::string> hidden_names;
  std::vector<std::vector<int>> inter_parents;
  std::vector<std::string> observed_names;
  std::vector<int> observed_parent;
};
DiscreteDbn build_from_topology(const Topology& topology, int hidden_arity,
                                std::uint64_t seed, const BuildOptions& options = {});

Topology water_topology();

// Keeps the listed hidden nodes (and their observations). CPT parents that
// are dropped are averaged out uniformly.
DiscreteDbn restrict_hidden(const DiscreteDbn& dbn, std::span<const int> keep_hidden);

}  // namespace dbn

#endif  // DBN_MODEL_HPP_
