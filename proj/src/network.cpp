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

#include "dbn/network.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "dbn/error.hpp"
#include "json.hpp"

namespace dbn {

namespace {

std::vector<std::size_t> member_strides(const DiscreteDbn& dbn, const std::vector<int>& members) {
  std::vector<std::size_t> strides(members.size(), 1);
  for (int k = static_cast<int>(members.size()) - 2; k >= 0; --k) {
    strides[k] = strides[k + 1] * dbn.hidden_arity(members[k + 1]);
  }
  return strides;
}

std::size_t group_states(const DiscreteDbn& dbn, const std::vector<int>& members) {
  std::size_t n = 1;
  for (int h : members) n *= dbn.hidden_arity(h);
  return n;
}

// Writes the member values of a group state into values[] (by hidden position).
void decode_group(const DiscreteDbn& dbn, const std::vector<int>& members, std::size_t state, int* values) {
  for (int k = static_cast<int>(members.size()) - 1; k >= 0; --k) {
    const int a = dbn.hidden_arity(members[k]);
    values[members[k]] = static_cast<int>(state % a);
    state /= a;
  }
}

// Joint CPT of `targets` (slice t) given parent groups (slice t-1): rows are
// mixed-radix configurations of the groups in order, columns are target
// group states. Entry = product of member CPT entries; rows renormalized.
std::vector<double> product_cpt(const DiscreteDbn& dbn, CptRole role,
                                const std::vector<std::vector<int>>& parent_groups,
                                const std::vector<int>& targets) {
  const int H = dbn.num_hidden();
  std::vector<std::size_t> group_sizes;
  std::size_t rows = 1;
  for (const auto& g : parent_groups) {
    group_sizes.push_back(group_states(dbn, g));
    rows *= group_sizes.back();
  }
  const std::size_t cols = group_states(dbn, targets);
  std::vector<int> target_digits(cols * targets.size());
  {
    std::vector<int> tmp(H, 0);
    for (std::size_t s = 0; s < cols; ++s) {
      decode_group(dbn, targets, s, tmp.data());
      for (std::size_t k = 0; k < targets.size(); ++k) target_digits[s * targets.size() + k] = tmp[targets[k]];
    }
  }
  std::vector<double> values(rows * cols);
  std::vector<int> prev(H, -1);
  std::vector<std::size_t> config(parent_groups.size(), 0);
  std::vector<std::size_t> member_rows(targets.size());
  std::vector<int> parent_values;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t g = 0; g < parent_groups.size(); ++g) decode_group(dbn, parent_groups[g], config[g], prev.data());
    for (std::size_t k = 0; k < targets.size(); ++k) {
      const NodeCpt& cpt = dbn.cpt(dbn.hidden_nodes()[targets[k]], role);
      parent_values.clear();
      for (const ParentRef& p : cpt.parents) {
        const int ph = dbn.hidden_position(p.node);
        if (p.lag != 1 || ph < 0 || prev[ph] < 0) {
          throw InvalidArgument("cluster CPT assembly: parent of " + dbn.node(p.node).name +
                                " is not covered by the parent clusters");
        }
        parent_values.push_back(prev[ph]);
      }
      member_rows[k] = cpt.table.config_index(parent_values);
    }
    double sum = 0.0;
    for (std::size_t s = 0; s < cols; ++s) {
      double p = 1.0;
      for (std::size_t k = 0; k < targets.size(); ++k) {
        const NodeCpt& cpt = dbn.cpt(dbn.hidden_nodes()[targets[k]], role);
        p *= cpt.table.at(target_digits[s * targets.size() + k], member_rows[k]);
      }
      values[r * cols + s] = p;
      sum += p;
    }
    for (std::size_t s = 0; s < cols; ++s) values[r * cols + s] /= sum;
    for (int g = static_cast<int>(config.size()) - 1; g >= 0; --g) {
      if (++config[g] < group_sizes[g]) break;
      config[g] = 0;
    }
  }
  return values;
}

std::shared_ptr<const ConditionalTable> make_table(int child_arity, std::vector<int> parent_arities,
                                                   std::vector<double> values) {
  return std::make_shared<const ConditionalTable>(child_arity, std::move(parent_arities), std::move(values));
}

void check_states(std::size_t states, std::size_t cap, const std::string& what) {
  if (states > cap) {
    throw CapExceeded(what + " has " + std::to_string(states) + " states (cap " + std::to_string(cap) + ")");
  }
}

}  // namespace

ClusterSpec ClusterSpec::per_node(int num_hidden) {
  ClusterSpec spec;
  for (int h = 0; h < num_hidden; ++h) spec.clusters.push_back({h});
  return spec;
}

ClusterSpec ClusterSpec::whole_slice(int num_hidden) {
  ClusterSpec spec;
  spec.clusters.emplace_back();
  for (int h = 0; h < num_hidden; ++h) spec.clusters.back().push_back(h);
  return spec;
}

ClusterSpec ClusterSpec::parse(const std::string& text, const DiscreteDbn& dbn) {
  ClusterSpec spec;
  if (text == "per-node") {
    spec = per_node(dbn.num_hidden());
  } else if (text == "whole-slice") {
    spec = whole_slice(dbn.num_hidden());
  } else {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception&) {
      throw InvalidArgument("cluster spec must be \"per-node\", \"whole-slice\" or a JSON list of lists");
    }
    if (!doc.is_array()) throw InvalidArgument("cluster spec must be a JSON list of lists");
    for (const auto& cluster : doc) {
      if (!cluster.is_array()) throw InvalidArgument("cluster spec must be a JSON list of lists");
      std::vector<int> members;
      for (const auto& m : cluster) {
        if (m.is_number_integer()) {
          members.push_back(m.get<int>());
        } else if (m.is_string()) {
          int found = -1;
          for (int h = 0; h < dbn.num_hidden(); ++h) {
            if (dbn.node(dbn.hidden_nodes()[h]).name == m.get<std::string>()) found = h;
          }
          if (found < 0) throw InvalidArgument("cluster spec names unknown hidden node " + m.dump());
          members.push_back(found);
        } else {
          throw InvalidArgument("cluster members must be hidden positions or node names");
        }
      }
      spec.clusters.push_back(std::move(members));
    }
  }
  spec.validate(dbn.num_hidden());
  return spec;
}

void ClusterSpec::validate(int num_hidden) {
  std::vector<int> owner(num_hidden, -1);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (clusters[c].empty()) throw InvalidArgument("cluster " + std::to_string(c) + " is empty");
    std::sort(clusters[c].begin(), clusters[c].end());
    for (int h : clusters[c]) {
      if (h < 0 || h >= num_hidden) throw InvalidArgument("cluster member " + std::to_string(h) + " out of range");
      if (owner[h] >= 0) {
        throw InvalidArgument("hidden node " + std::to_string(h) +
                              " is in more than one cluster; overlapping clusters are not supported");
      }
      owner[h] = static_cast<int>(c);
    }
  }
  for (int h = 0; h < num_hidden; ++h) {
    if (owner[h] < 0) throw InvalidArgument("hidden node " + std::to_string(h) + " is in no cluster");
  }
}

std::size_t ClusterSpec::cluster_states(const DiscreteDbn& dbn, int c) const {
  return group_states(dbn, clusters[c]);
}

Network::Network(const DiscreteDbn& dbn, int horizon) : horizon_(horizon) {
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  for (int h = 0; h < dbn.num_hidden(); ++h) hidden_arities_.push_back(dbn.hidden_arity(h));
  readouts_.resize(static_cast<std::size_t>(horizon) * dbn.num_hidden());
}

int Network::add_node(NetworkNode node) {
  const int id = num_nodes();
  if (!node.cpt) throw InvalidArgument("network node " + node.label + " has no CPT");
  if (node.cpt->child_arity() != node.arity || node.cpt->parent_arities().size() != node.parents.size()) {
    throw InvalidArgument("network node " + node.label + " has a CPT of the wrong shape");
  }
  in_edges_.emplace_back();
  out_edges_.emplace_back();
  for (std::size_t k = 0; k < node.parents.size(); ++k) {
    const int p = node.parents[k];
    if (p < 0 || p >= id) throw InvalidArgument("network node " + node.label + " has a parent that is not earlier");
    if (nodes_[p].arity != node.cpt->parent_arities()[k]) {
      throw InvalidArgument("network node " + node.label + ": parent arity mismatch");
    }
    const int e = num_edges();
    edges_.push_back({p, id, static_cast<int>(k)});
    in_edges_[id].push_back(e);
    out_edges_[p].push_back(e);
  }
  nodes_.push_back(std::move(node));
  return id;
}

void Network::set_readout(int t, int h, int node, std::size_t stride) {
  readouts_[t * num_hidden() + h] = {node, stride};
}

std::vector<std::vector<double>> Network::local_evidence(const NodeLikelihoods& w) const {
  if (w.horizon() != horizon_ || w.num_hidden() != num_hidden()) {
    throw InvalidArgument("evidence horizon does not match the network");
  }
  std::vector<std::vector<double>> out(nodes_.size());
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const NetworkNode& n = nodes_[id];
    out[id].assign(n.arity, 1.0);
    for (const EvidenceTap& tap : n.evidence) {
      const auto lik = w.at(tap.slice, tap.hidden);
      const int a = hidden_arities_[tap.hidden];
      for (int s = 0; s < n.arity; ++s) out[id][s] *= lik[(s / tap.stride) % a];
    }
  }
  return out;
}

Network unrolled_network(const DiscreteDbn& dbn, int horizon) {
  require_inference_ready(dbn);
  const UnrolledNetwork unrolled = unroll(dbn, horizon);
  const int H = dbn.num_hidden();
  std::vector<std::shared_ptr<const ConditionalTable>> prior(H);
  std::vector<std::shared_ptr<const ConditionalTable>> transition(H);
  for (int h = 0; h < H; ++h) {
    prior[h] = std::make_shared<const ConditionalTable>(dbn.prior_cpt(dbn.hidden_nodes()[h]).table);
    transition[h] = std::make_shared<const ConditionalTable>(dbn.transition_cpt(dbn.hidden_nodes()[h]).table);
  }
  Network net(dbn, horizon);
  std::vector<int> network_id(unrolled.nodes.size(), -1);
  for (std::size_t u = 0; u < unrolled.nodes.size(); ++u) {
    const auto& src = unrolled.nodes[u];
    const int h = dbn.hidden_position(src.index);
    if (h < 0) continue;
    NetworkNode node;
    node.label = dbn.node(src.index).name + "@" + std::to_string(src.slice + 1);
    node.slice = src.slice;
    node.arity = dbn.hidden_arity(h);
    for (int p : src.parents) node.parents.push_back(network_id[p]);
    node.cpt = src.slice == 0 ? prior[h] : transition[h];
    node.evidence.push_back({src.slice, h, 1});
    network_id[u] = net.add_node(std::move(node));
    net.set_readout(src.slice, h, network_id[u], 1);
  }
  return net;
}

Network build_clustered_graph(const DiscreteDbn& dbn, int horizon, const ClusterSpec& clusters,
                              const ClusterCaps& caps) {
  require_inference_ready(dbn);
  ClusterSpec spec = clusters;
  spec.validate(dbn.num_hidden());
  const int H = dbn.num_hidden();
  const int C = static_cast<int>(spec.clusters.size());
  std::vector<int> owner(H);
  for (int c = 0; c < C; ++c) {
    for (int h : spec.clusters[c]) owner[h] = c;
    check_states(spec.cluster_states(dbn, c), caps.max_cluster_states, "cluster " + std::to_string(c));
  }
  // Parent clusters (in the previous slice) of each cluster.
  std::vector<std::vector<int>> parent_clusters(C);
  for (int c = 0; c < C; ++c) {
    std::set<int> ps;
    for (int h : spec.clusters[c]) {
      for (const ParentRef& p : dbn.transition_cpt(dbn.hidden_nodes()[h]).parents) {
        ps.insert(owner[dbn.hidden_position(p.node)]);
      }
    }
    parent_clusters[c].assign(ps.begin(), ps.end());
  }
  std::vector<std::shared_ptr<const ConditionalTable>> prior(C);
  std::vector<std::shared_ptr<const ConditionalTable>> transition(C);
  for (int c = 0; c < C; ++c) {
    const int arity = static_cast<int>(spec.cluster_states(dbn, c));
    prior[c] = make_table(arity, {}, product_cpt(dbn, CptRole::kPrior, {}, spec.clusters[c]));
    std::vector<std::vector<int>> groups;
    std::vector<int> parent_arities;
    std::size_t entries = static_cast<std::size_t>(arity);
    for (int pc : parent_clusters[c]) {
      groups.push_back(spec.clusters[pc]);
      parent_arities.push_back(static_cast<int>(spec.cluster_states(dbn, pc)));
      entries *= parent_arities.back();
    }
    check_states(entries, caps.max_table_entries, "CPT of cluster " + std::to_string(c));
    transition[c] = make_table(arity, std::move(parent_arities),
                               product_cpt(dbn, CptRole::kTransition, groups, spec.clusters[c]));
  }
  Network net(dbn, horizon);
  std::vector<int> prev_ids(C, -1);
  std::vector<int> cur_ids(C, -1);
  for (int t = 0; t < horizon; ++t) {
    for (int c = 0; c < C; ++c) {
      NetworkNode node;
      node.label = "C" + std::to_string(c + 1) + "@" + std::to_string(t + 1);
      node.slice = t;
      node.arity = static_cast<int>(spec.cluster_states(dbn, c));
      node.cpt = t == 0 ? prior[c] : transition[c];
      if (t > 0) {
        for (int pc : parent_clusters[c]) node.parents.push_back(prev_ids[pc]);
      }
      const auto strides = member_strides(dbn, spec.clusters[c]);
      for (std::size_t k = 0; k < spec.clusters[c].size(); ++k) {
        node.evidence.push_back({t, spec.clusters[c][k], strides[k]});
      }
      cur_ids[c] = net.add_node(std::move(node));
      for (std::size_t k = 0; k < spec.clusters[c].size(); ++k) {
        net.set_readout(t, spec.clusters[c][k], cur_ids[c], strides[k]);
      }
    }
    std::swap(prev_ids, cur_ids);
  }
  return net;
}

Network build_bk_graph(const DiscreteDbn& dbn, int horizon, const ClusterSpec& clusters, const ClusterCaps& caps) {
  require_inference_ready(dbn);
  ClusterSpec spec = clusters;
  spec.validate(dbn.num_hidden());
  const int H = dbn.num_hidden();
  const int C = static_cast<int>(spec.clusters.size());
  std::vector<int> all(H);
  for (int h = 0; h < H; ++h) all[h] = h;
  const std::size_t S = group_states(dbn, all);
  check_states(S, caps.max_cluster_states, "mega node");
  check_states(S * S, caps.max_table_entries, "mega-node transition CPT");
  const auto mega_strides = member_strides(dbn, all);

  auto prior = make_table(static_cast<int>(S), {}, product_cpt(dbn, CptRole::kPrior, {}, all));
  std::vector<int> parent_arities;
  for (int c = 0; c < C; ++c) parent_arities.push_back(static_cast<int>(spec.cluster_states(dbn, c)));
  auto transition = make_table(static_cast<int>(S), parent_arities,
                               product_cpt(dbn, CptRole::kTransition, spec.clusters, all));
  // Deterministic projections mega state -> cluster state.
  std::vector<std::shared_ptr<const ConditionalTable>> projection(C);
  std::vector<std::vector<std::size_t>> strides(C);
  for (int c = 0; c < C; ++c) {
    const std::size_t cs = spec.cluster_states(dbn, c);
    strides[c] = member_strides(dbn, spec.clusters[c]);
    std::vector<double> values(S * cs, 0.0);
    std::vector<int> digits(H);
    for (std::size_t b = 0; b < S; ++b) {
      decode_group(dbn, all, b, digits.data());
      std::size_t state = 0;
      for (std::size_t k = 0; k < spec.clusters[c].size(); ++k) {
        state += strides[c][k] * digits[spec.clusters[c][k]];
      }
      values[b * cs + state] = 1.0;
    }
    projection[c] = make_table(static_cast<int>(cs), {static_cast<int>(S)}, std::move(values));
  }

  Network net(dbn, horizon);
  std::vector<int> prev_clusters;
  for (int t = 0; t < horizon; ++t) {
    NetworkNode mega;
    mega.label = "M@" + std::to_string(t + 1);
    mega.slice = t;
    mega.arity = static_cast<int>(S);
    mega.cpt = t == 0 ? prior : transition;
    if (t > 0) mega.parents = prev_clusters;
    for (int h = 0; h < H; ++h) mega.evidence.push_back({t, h, mega_strides[h]});
    const int mega_id = net.add_node(std::move(mega));
    prev_clusters.clear();
    for (int c = 0; c < C; ++c) {
      NetworkNode node;
      node.label = "C" + std::to_string(c + 1) + "@" + std::to_string(t + 1);
      node.slice = t;
      node.arity = static_cast<int>(spec.cluster_states(dbn, c));
      node.parents = {mega_id};
      node.cpt = projection[c];
      const int id = net.add_node(std::move(node));
      prev_clusters.push_back(id);
      for (std::size_t k = 0; k < spec.clusters[c].size(); ++k) {
        net.set_readout(t, spec.clusters[c][k], id, strides[c][k]);
      }
    }
  }
  return net;
}

}  // namespace dbn
