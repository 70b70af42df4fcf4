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

#ifndef DBN_NETWORK_HPP_
#define DBN_NETWORK_HPP_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dbn/model.hpp"

namespace dbn {

// Disjoint partition of a slice's hidden nodes (by hidden position), applied
// identically to every slice. Members are kept sorted; the first member is
// the most significant digit of the cluster state.
struct ClusterSpec {
  std::vector<std::vector<int>> clusters;

  static ClusterSpec per_node(int num_hidden);
  static ClusterSpec whole_slice(int num_hidden);
  // "per-node", "whole-slice", or a JSON list of lists of hidden positions or
  // node names, e.g. [[0,1],[2]] or [["X1","X2"],["X3"]].
  static ClusterSpec parse(const std::string& text, const DiscreteDbn& dbn);

  // Throws InvalidArgument on overlap, gaps, empty clusters or bad indices;
  // sorts members.
  void validate(int num_hidden);
  std::size_t cluster_states(const DiscreteDbn& dbn, int c) const;

  bool operator==(const ClusterSpec&) const = default;
};

// Hidden node h of slice t contributes its likelihood to a network node; its
// value within the node's state s is (s / stride) % arity(h).
struct EvidenceTap {
  int slice = 0;
  int hidden = 0;
  std::size_t stride = 1;
};

struct NetworkNode {
  std::string label;
  int slice = 0;
  int arity = 2;
  std::vector<int> parents;  // network ids, all smaller than this node's id
  std::shared_ptr<const ConditionalTable> cpt;
  std::vector<EvidenceTap> evidence;
};

struct NetworkEdge {
  int parent = 0;
  int child = 0;
  int slot = 0;  // position of parent in the child's parent list
};

// Directed network that belief propagation runs on: the unrolled DBN with
// observations folded into local evidence, or a clustered variant of it.
// Node ids are a topological order.
class Network {
 public:
  Network(const DiscreteDbn& dbn, int horizon);

  int add_node(NetworkNode node);
  // Where the marginal of hidden node h at slice t is read from.
  void set_readout(int t, int h, int node, std::size_t stride);

  int horizon() const { return horizon_; }
  int num_hidden() const { return static_cast<int>(hidden_arities_.size()); }
  const std::vector<int>& hidden_arities() const { return hidden_arities_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const NetworkNode& node(int id) const { return nodes_[id]; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const NetworkEdge& edge(int e) const { return edges_[e]; }
  // Edge ids into the node, in parent-slot order.
  const std::vector<int>& in_edges(int id) const { return in_edges_[id]; }
  // Edge ids out of the node.
  const std::vector<int>& out_edges(int id) const { return out_edges_[id]; }

  struct Readout {
    int node = -1;
    std::size_t stride = 1;
  };
  const Readout& readout(int t, int h) const { return readouts_[t * num_hidden() + h]; }

  // Per-node local likelihood built from the evidence taps.
  std::vector<std::vector<double>> local_evidence(const NodeLikelihoods& w) const;

 private:
  int horizon_;
  std::vector<int> hidden_arities_;
  std::vector<NetworkNode> nodes_;
  std::vector<NetworkEdge> edges_;
  std::vector<std::vector<int>> in_edges_;
  std::vector<std::vector<int>> out_edges_;
  std::vector<Readout> readouts_;
};

// Hidden part of unroll(dbn, horizon); observed leaves become local evidence.
Network unrolled_network(const DiscreteDbn& dbn, int horizon);

struct ClusterCaps {
  std::size_t max_cluster_states = 4096;
  std::size_t max_table_entries = std::size_t{1} << 24;
};

// Each slice's hidden nodes replaced by one node per cluster; cluster CPTs are
// products of member CPTs with parents mapped to the owning clusters. Per-node
// clusters reproduce the unrolled network; a whole-slice cluster gives a chain
// of mega nodes.
Network build_clustered_graph(const DiscreteDbn& dbn, int horizon, const ClusterSpec& clusters,
                              const ClusterCaps& caps = {});

// Mega-node graph for Boyen-Koller: per slice, one mega node over the whole
// slice (all cluster nodes of the previous slice as parents, transition CPT
// Q^N x Q^N, all evidence) followed by one deterministic projection node per
// cluster. Marginals are read from the cluster nodes.
Network build_bk_graph(const DiscreteDbn& dbn, int horizon, const ClusterSpec& clusters,
                       const ClusterCaps& caps = {});

}  // namespace dbn

#endif  // DBN_NETWORK_HPP_
