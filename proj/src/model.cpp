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

#include "dbn/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include "dbn/error.hpp"
#include "dbn/rng.hpp"

namespace dbn {

namespace {

std::string edge_name(const DiscreteDbn& dbn, const Edge& e, bool inter) {
  std::ostringstream out;
  out << dbn.node(e.parent).name << (inter ? "[t-1]" : "[t]") << " -> "
      << dbn.node(e.child).name << "[t]";
  return out.str();
}

}  // namespace

ConditionalTable::ConditionalTable(int child_arity, std::vector<int> parent_arities,
                                   std::vector<double> values)
    : child_arity_(child_arity),
      parent_arities_(std::move(parent_arities)),
      values_(std::move(values)) {
  if (child_arity_ < 1) throw InvalidArgument("CPT child arity must be positive");
  num_configs_ = 1;
  for (int a : parent_arities_) {
    if (a < 1) throw InvalidArgument("CPT parent arity must be positive");
    num_configs_ *= static_cast<std::size_t>(a);
  }
  const std::size_t expected = num_configs_ * static_cast<std::size_t>(child_arity_);
  if (values_.size() != expected) {
    std::ostringstream msg;
    msg << "CPT has " << values_.size() << " values, expected " << expected << " ("
        << child_arity_ << " x " << num_configs_ << ")";
    throw InvalidArgument(msg.str());
  }
}

std::size_t ConditionalTable::config_index(std::span<const int> parent_values) const {
  std::size_t index = 0;
  for (std::size_t k = 0; k < parent_arities_.size(); ++k) {
    index = index * parent_arities_[k] + parent_values[k];
  }
  return index;
}

void ConditionalTable::check_stochastic(double tol) const {
  for (std::size_t r = 0; r < num_configs_; ++r) {
    double sum = 0.0;
    for (double v : row(r)) {
      if (!(v >= 0.0 && v <= 1.0)) {
        std::ostringstream msg;
        msg << "CPT row " << r << " has entry " << v << " outside [0,1]";
        throw InvalidArgument(msg.str());
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "CPT row " << r << " sums to " << sum << ", not 1";
      throw InvalidArgument(msg.str());
    }
  }
}

DiscreteDbn::DiscreteDbn(std::vector<NodeSpec> nodes, std::vector<Edge> intra_edges,
                         std::vector<Edge> inter_edges, std::vector<NodeCpt> prior_cpts,
                         std::vector<NodeCpt> transition_cpts)
    : nodes_(std::move(nodes)),
      intra_(std::move(intra_edges)),
      inter_(std::move(inter_edges)),
      prior_(std::move(prior_cpts)),
      transition_(std::move(transition_cpts)) {
  const int n = num_nodes();
  if (n == 0) throw InvalidArgument("model has no nodes");
  std::set<std::string> names;
  hidden_pos_.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    const NodeSpec& spec = nodes_[i];
    if (spec.name.empty()) throw InvalidArgument("node " + std::to_string(i) + " has no name");
    if (!names.insert(spec.name).second) throw InvalidArgument("duplicate node name " + spec.name);
    if (spec.arity < 2) {
      throw InvalidArgument("node " + spec.name + " has arity " + std::to_string(spec.arity) +
                            "; arities must be >= 2");
    }
    if (spec.kind == NodeKind::kHidden) {
      hidden_pos_[i] = static_cast<int>(hidden_.size());
      hidden_.push_back(i);
    } else {
      observed_.push_back(i);
    }
  }
  if (hidden_.empty()) throw InvalidArgument("model has no hidden nodes");

  auto check_edge = [n](const Edge& e) {
    if (e.parent < 0 || e.parent >= n || e.child < 0 || e.child >= n) {
      throw InvalidArgument("edge (" + std::to_string(e.parent) + ", " +
                            std::to_string(e.child) + ") references an unknown node");
    }
  };
  intra_children_.assign(n, {});
  inter_children_.assign(n, {});
  for (const Edge& e : intra_) {
    check_edge(e);
    if (e.parent == e.child) throw InvalidArgument("intra-slice self loop on " + nodes_[e.parent].name);
    intra_children_[e.parent].push_back(e.child);
  }
  for (const Edge& e : inter_) {
    check_edge(e);
    inter_children_[e.parent].push_back(e.child);
  }
  {
    std::set<Edge> seen(intra_.begin(), intra_.end());
    if (seen.size() != intra_.size()) throw InvalidArgument("duplicate intra-slice edge");
    seen = std::set<Edge>(inter_.begin(), inter_.end());
    if (seen.size() != inter_.size()) throw InvalidArgument("duplicate inter-slice edge");
  }
  // Inter edges always point forward in time, so the two-slice graph is
  // acyclic iff the intra-slice graph is.
  if (!is_acyclic(n, intra_)) throw InvalidArgument("intra-slice edges contain a cycle");

  if (static_cast<int>(prior_.size()) != n || static_cast<int>(transition_.size()) != n) {
    throw InvalidArgument("every node needs exactly one prior and one transition CPT");
  }
  for (int i = 0; i < n; ++i) {
    std::set<ParentRef> want_prior;
    std::set<ParentRef> want_trans;
    for (const Edge& e : intra_) {
      if (e.child == i) {
        want_prior.insert({e.parent, 0});
        want_trans.insert({e.parent, 0});
      }
    }
    for (const Edge& e : inter_) {
      if (e.child == i) want_trans.insert({e.parent, 1});
    }
    auto check_cpt = [&](const NodeCpt& cpt, const std::set<ParentRef>& want, const char* role) {
      const std::set<ParentRef> got(cpt.parents.begin(), cpt.parents.end());
      if (got != want || got.size() != cpt.parents.size()) {
        throw InvalidArgument(std::string(role) + " CPT of " + nodes_[i].name +
                              " does not list exactly the node's parents");
      }
      if (cpt.table.child_arity() != nodes_[i].arity ||
          cpt.table.parent_arities().size() != cpt.parents.size()) {
        throw InvalidArgument(std::string(role) + " CPT of " + nodes_[i].name +
                              " has the wrong dimensions");
      }
      for (std::size_t k = 0; k < cpt.parents.size(); ++k) {
        if (cpt.table.parent_arities()[k] != nodes_[cpt.parents[k].node].arity) {
          throw InvalidArgument(std::string(role) + " CPT of " + nodes_[i].name +
                                ": parent arity mismatch for " +
                                nodes_[cpt.parents[k].node].name);
        }
      }
      try {
        cpt.table.check_stochastic();
      } catch (const InvalidArgument& e) {
        throw InvalidArgument(std::string(role) + " CPT of " + nodes_[i].name + ": " + e.what());
      }
    };
    check_cpt(prior_[i], want_prior, "prior");
    check_cpt(transition_[i], want_trans, "transition");
  }
}

RegularityReport validate_regular(const DiscreteDbn& dbn) {
  RegularityReport report;
  auto hidden = [&](int i) { return dbn.node(i).kind == NodeKind::kHidden; };
  for (const Edge& e : dbn.intra_edges()) {
    if (hidden(e.parent) && hidden(e.child)) {
      report.violations.push_back("intra-slice hidden-hidden edge " + edge_name(dbn, e, false));
    } else if (!hidden(e.parent)) {
      report.violations.push_back("edge out of observed node " + edge_name(dbn, e, false));
    }
  }
  for (const Edge& e : dbn.inter_edges()) {
    if (!hidden(e.parent) || !hidden(e.child)) {
      report.violations.push_back("inter-slice edge touching an observed node " +
                                  edge_name(dbn, e, true));
    }
  }
  for (int i : dbn.hidden_nodes()) {
    const auto& kids = dbn.inter_children(i);
    const bool persistent =
        std::any_of(kids.begin(), kids.end(), [&](int c) { return hidden(c); });
    if (!persistent) {
      report.violations.push_back("hidden node " + dbn.node(i).name +
                                  " is not persistent (no child in the next slice)");
    }
  }
  return report;
}

void require_inference_ready(const DiscreteDbn& dbn) {
  const RegularityReport report = validate_regular(dbn);
  if (!report.ok()) {
    throw InvalidArgument("model is not a regular DBN: " + report.violations.front());
  }
  for (int o : dbn.observed_nodes()) {
    const auto& parents = dbn.transition_cpt(o).parents;
    if (parents.size() != 1) {
      throw InvalidArgument("observed node " + dbn.node(o).name + " has " +
                            std::to_string(parents.size()) +
                            " parents; smoothers need exactly one hidden parent");
    }
  }
}

bool is_acyclic(int num_nodes, std::span<const Edge> edges) {
  std::vector<int> indegree(num_nodes, 0);
  std::vector<std::vector<int>> out(num_nodes);
  for (const Edge& e : edges) {
    out[e.parent].push_back(e.child);
    ++indegree[e.child];
  }
  std::queue<int> ready;
  for (int i = 0; i < num_nodes; ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  int visited = 0;
  while (!ready.empty()) {
    const int v = ready.front();
    ready.pop();
    ++visited;
    for (int c : out[v]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  return visited == num_nodes;
}

UnrolledNetwork unroll(const DiscreteDbn& dbn, int horizon) {
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  UnrolledNetwork net;
  net.horizon = horizon;
  net.slice_size = dbn.num_nodes();
  net.nodes.reserve(static_cast<std::size_t>(horizon) * net.slice_size);
  for (int t = 0; t < horizon; ++t) {
    for (int i = 0; i < dbn.num_nodes(); ++i) {
      UnrolledNetwork::Node node;
      node.slice = t;
      node.index = i;
      node.role = t == 0 ? CptRole::kPrior : CptRole::kTransition;
      const NodeCpt& cpt = dbn.cpt(i, node.role);
      node.cpt = &cpt.table;
      for (const ParentRef& p : cpt.parents) {
        const int pid = net.id(t - p.lag, p.node);
        node.parents.push_back(pid);
        net.edges.push_back({pid, net.id(t, i)});
      }
      net.nodes.push_back(std::move(node));
    }
  }
  return net;
}

EvidenceSequence::EvidenceSequence(int horizon, int num_nodes)
    : horizon_(horizon),
      num_nodes_(num_nodes),
      values_(static_cast<std::size_t>(horizon) * num_nodes, kMissing) {
  if (horizon < 1) throw InvalidArgument("evidence horizon must be >= 1");
}

void EvidenceSequence::check(const DiscreteDbn& dbn) const {
  if (num_nodes_ != dbn.num_nodes()) {
    throw InvalidArgument("evidence covers " + std::to_string(num_nodes_) +
                          " nodes but the model has " + std::to_string(dbn.num_nodes()));
  }
  for (int t = 0; t < horizon_; ++t) {
    for (int i = 0; i < num_nodes_; ++i) {
      const int v = value(t, i);
      if (v == kMissing) continue;
      if (dbn.node(i).kind != NodeKind::kObserved) {
        throw InvalidArgument("evidence at t=" + std::to_string(t + 1) + " for hidden node " +
                              dbn.node(i).name);
      }
      if (v < 0 || v >= dbn.node(i).arity) {
        throw InvalidArgument("evidence value " + std::to_string(v) + " at t=" +
                              std::to_string(t + 1) + " is outside the arity of " +
                              dbn.node(i).name);
      }
    }
  }
}

EvidenceSequence sample_evidence(const DiscreteDbn& dbn, int horizon, Rng& rng) {
  const int n = dbn.num_nodes();
  // Topological order of one slice (intra edges only matter within a slice).
  std::vector<int> order;
  {
    std::vector<int> indegree(n, 0);
    for (const Edge& e : dbn.intra_edges()) ++indegree[e.child];
    std::vector<int> ready;
    for (int i = n - 1; i >= 0; --i) {
      if (indegree[i] == 0) ready.push_back(i);
    }
    while (!ready.empty()) {
      const int v = ready.back();
      ready.pop_back();
      order.push_back(v);
      for (int c : dbn.intra_children(v)) {
        if (--indegree[c] == 0) ready.push_back(c);
      }
    }
  }
  EvidenceSequence evidence(horizon, n);
  std::vector<int> prev(n, 0);
  std::vector<int> cur(n, 0);
  std::vector<int> parent_values;
  for (int t = 0; t < horizon; ++t) {
    for (int i : order) {
      const NodeCpt& cpt = dbn.cpt_at(i, t);
      parent_values.clear();
      for (const ParentRef& p : cpt.parents) {
        parent_values.push_back(p.lag == 0 ? cur[p.node] : prev[p.node]);
      }
      cur[i] = rng.categorical(cpt.table.row(cpt.table.config_index(parent_values)));
      if (dbn.node(i).kind == NodeKind::kObserved) evidence.set(t, i, cur[i]);
    }
    std::swap(prev, cur);
  }
  return evidence;
}

NodeLikelihoods::NodeLikelihoods(const DiscreteDbn& dbn, const EvidenceSequence& evidence)
    : horizon_(evidence.horizon()), num_hidden_(dbn.num_hidden()) {
  evidence.check(dbn);
  values_.resize(static_cast<std::size_t>(horizon_) * num_hidden_);
  for (int t = 0; t < horizon_; ++t) {
    for (int h = 0; h < num_hidden_; ++h) {
      values_[t * num_hidden_ + h].assign(dbn.hidden_arity(h), 1.0);
    }
    for (int o : dbn.observed_nodes()) {
      const int y = evidence.value(t, o);
      if (y == kMissing) continue;
      const NodeCpt& cpt = dbn.cpt_at(o, t);
      if (cpt.parents.size() != 1 || cpt.parents[0].lag != 0 ||
          dbn.hidden_position(cpt.parents[0].node) < 0) {
        throw InvalidArgument("observed node " + dbn.node(o).name +
                              " must have exactly one hidden parent in its slice");
      }
      const int h = dbn.hidden_position(cpt.parents[0].node);
      auto& w = values_[t * num_hidden_ + h];
      for (std::size_t x = 0; x < w.size(); ++x) w[x] *= cpt.table.at(y, x);
    }
  }
}

}  // namespace dbn
