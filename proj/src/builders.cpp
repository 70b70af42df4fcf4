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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include "dbn/error.hpp"
#include "dbn/model.hpp"
#include "dbn/rng.hpp"
#include "json.hpp"

namespace dbn {

namespace {

std::vector<double> random_rows(Rng& rng, int child_arity, std::size_t rows, double sharpness) {
  std::vector<double> values(rows * child_arity);
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (int c = 0; c < child_arity; ++c) {
      double u = rng.uniform();
      if (sharpness != 1.0) u = std::pow(u, sharpness);
      values[r * child_arity + c] = u;
      sum += u;
    }
    if (sum <= 0.0) {
      for (int c = 0; c < child_arity; ++c) values[r * child_arity + c] = 1.0 / child_arity;
      continue;
    }
    for (int c = 0; c < child_arity; ++c) values[r * child_arity + c] /= sum;
  }
  return values;
}

std::string asset_path(const std::string& name) {
  if (const char* dir = std::getenv("DBN_ASSET_DIR")) return std::string(dir) + "/" + name;
  return std::string(DBN_ASSET_DIR) + "/" + name;
}

}  // namespace

DiscreteDbn build_from_topology(const Topology& topology, int hidden_arity, std::uint64_t seed,
                                const BuildOptions& options) {
  if (hidden_arity < 2) throw InvalidArgument("hidden arity must be >= 2");
  const int num_hidden = static_cast<int>(topology.hidden_names.size());
  const int num_observed = static_cast<int>(topology.observed_names.size());
  if (num_hidden == 0) throw InvalidArgument("topology has no hidden nodes");
  if (static_cast<int>(topology.inter_parents.size()) != num_hidden ||
      static_cast<int>(topology.observed_parent.size()) != num_observed) {
    throw InvalidArgument("topology lists are inconsistent");
  }
  const int obs_arity = options.observed_arity > 0 ? options.observed_arity : hidden_arity;

  std::vector<NodeSpec> nodes;
  for (const auto& name : topology.hidden_names) nodes.push_back({name, hidden_arity, NodeKind::kHidden});
  for (const auto& name : topology.observed_names) nodes.push_back({name, obs_arity, NodeKind::kObserved});

  std::vector<Edge> intra;
  std::vector<Edge> inter;
  for (int h = 0; h < num_hidden; ++h) {
    for (int p : topology.inter_parents[h]) {
      if (p < 0 || p >= num_hidden) throw InvalidArgument("topology parent index out of range");
      inter.push_back({p, h});
    }
  }
  for (int o = 0; o < num_observed; ++o) {
    const int p = topology.observed_parent[o];
    if (p < 0 || p >= num_hidden) throw InvalidArgument("topology observation parent out of range");
    intra.push_back({p, num_hidden + o});
  }

  Rng rng(seed, "model");
  std::vector<NodeCpt> prior(nodes.size());
  std::vector<NodeCpt> transition(nodes.size());
  for (int h = 0; h < num_hidden; ++h) {
    prior[h].table = ConditionalTable(hidden_arity, {}, random_rows(rng, hidden_arity, 1, options.sharpness));
    std::vector<int> parents = topology.inter_parents[h];
    std::sort(parents.begin(), parents.end());
    std::size_t rows = 1;
    for (int p : parents) {
      transition[h].parents.push_back({p, 1});
      rows *= hidden_arity;
    }
    transition[h].table = ConditionalTable(hidden_arity, std::vector<int>(parents.size(), hidden_arity),
                                           random_rows(rng, hidden_arity, rows, options.sharpness));
  }
  for (int o = 0; o < num_observed; ++o) {
    const int node = num_hidden + o;
    NodeCpt emission;
    emission.parents = {{topology.observed_parent[o], 0}};
    emission.table = ConditionalTable(obs_arity, {hidden_arity},
                                      random_rows(rng, obs_arity, hidden_arity, options.sharpness));
    prior[node] = emission;
    transition[node] = std::move(emission);
  }
  return DiscreteDbn(std::move(nodes), std::move(intra), std::move(inter), std::move(prior),
                     std::move(transition));
}

DiscreteDbn build_chmm(int num_chains, int hidden_arity, std::uint64_t seed, const BuildOptions& options) {
  if (num_chains < 1) throw InvalidArgument("CHMM needs at least one chain");
  if (hidden_arity < 2) throw InvalidArgument("CHMM hidden arity must be >= 2");
  Topology topo;
  for (int i = 0; i < num_chains; ++i) {
    topo.hidden_names.push_back("X" + std::to_string(i + 1));
    std::vector<int> parents;
    for (int j = std::max(0, i - 1); j <= std::min(num_chains - 1, i + 1); ++j) parents.push_back(j);
    topo.inter_parents.push_back(std::move(parents));
    topo.observed_names.push_back("Y" + std::to_string(i + 1));
    topo.observed_parent.push_back(i);
  }
  return build_from_topology(topo, hidden_arity, seed, options);
}

DiscreteDbn build_factorial_hmm(int num_chains, int hidden_arity, std::uint64_t seed,
                                const BuildOptions& options) {
  if (num_chains < 1) throw InvalidArgument("factorial HMM needs at least one chain");
  Topology topo;
  for (int i = 0; i < num_chains; ++i) {
    topo.hidden_names.push_back("X" + std::to_string(i + 1));
    topo.inter_parents.push_back({i});
    topo.observed_names.push_back("Y" + std::to_string(i + 1));
    topo.observed_parent.push_back(i);
  }
  return build_from_topology(topo, hidden_arity, seed, options);
}

Topology water_topology() {
  const std::string path = asset_path("water_topology.json");
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open water topology asset " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
    Topology topo;
    topo.hidden_names = doc.at("hidden").get<std::vector<std::string>>();
    topo.inter_parents = doc.at("inter_parents").get<std::vector<std::vector<int>>>();
    for (const auto& obs : doc.at("observations")) {
      topo.observed_names.push_back(obs.at("name").get<std::string>());
      topo.observed_parent.push_back(obs.at("parent").get<int>());
    }
    return topo;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed water topology asset " + path + ": " + e.what());
  }
}

DiscreteDbn build_water_network(std::uint64_t seed, const BuildOptions& options) {
  return build_from_topology(water_topology(), 2, seed, options);
}

DiscreteDbn restrict_hidden(const DiscreteDbn& dbn, std::span<const int> keep_hidden) {
  std::vector<bool> keep(dbn.num_nodes(), false);
  for (int h : keep_hidden) {
    if (h < 0 || h >= dbn.num_hidden()) throw InvalidArgument("hidden index out of range");
    keep[dbn.hidden_nodes()[h]] = true;
  }
  for (int o : dbn.observed_nodes()) {
    bool all_kept = true;
    for (const ParentRef& p : dbn.transition_cpt(o).parents) all_kept = all_kept && keep[p.node];
    keep[o] = all_kept;
  }
  std::vector<int> new_index(dbn.num_nodes(), -1);
  std::vector<NodeSpec> nodes;
  for (int i = 0; i < dbn.num_nodes(); ++i) {
    if (keep[i]) {
      new_index[i] = static_cast<int>(nodes.size());
      nodes.push_back(dbn.node(i));
    }
  }
  auto remap_edges = [&](const std::vector<Edge>& edges) {
    std::vector<Edge> out;
    for (const Edge& e : edges) {
      if (keep[e.parent] && keep[e.child]) out.push_back({new_index[e.parent], new_index[e.child]});
    }
    return out;
  };
  // Drops parents that are not kept by averaging their rows.
  auto restrict_cpt = [&](const NodeCpt& cpt) {
    NodeCpt out;
    std::vector<int> kept_pos;
    std::vector<int> kept_arities;
    for (std::size_t k = 0; k < cpt.parents.size(); ++k) {
      if (keep[cpt.parents[k].node]) {
        kept_pos.push_back(static_cast<int>(k));
        kept_arities.push_back(cpt.table.parent_arities()[k]);
        out.parents.push_back({new_index[cpt.parents[k].node], cpt.parents[k].lag});
      }
    }
    const int arity = cpt.table.child_arity();
    std::size_t rows = 1;
    for (int a : kept_arities) rows *= a;
    std::vector<double> sums(rows * arity, 0.0);
    std::vector<double> counts(rows, 0.0);
    const auto& arities = cpt.table.parent_arities();
    std::vector<int> values(arities.size(), 0);
    for (std::size_t r = 0; r < cpt.table.num_configs(); ++r) {
      std::size_t kr = 0;
      for (std::size_t k = 0; k < kept_pos.size(); ++k) kr = kr * kept_arities[k] + values[kept_pos[k]];
      for (int c = 0; c < arity; ++c) sums[kr * arity + c] += cpt.table.at(c, r);
      counts[kr] += 1.0;
      for (int k = static_cast<int>(values.size()) - 1; k >= 0; --k) {
        if (++values[k] < arities[k]) break;
        values[k] = 0;
      }
    }
    for (std::size_t r = 0; r < rows; ++r) {
      double total = 0.0;
      for (int c = 0; c < arity; ++c) total += sums[r * arity + c];
      for (int c = 0; c < arity; ++c) sums[r * arity + c] /= total;
    }
    out.table = ConditionalTable(arity, std::move(kept_arities), std::move(sums));
    return out;
  };
  std::vector<NodeCpt> prior;
  std::vector<NodeCpt> transition;
  for (int i = 0; i < dbn.num_nodes(); ++i) {
    if (!keep[i]) continue;
    prior.push_back(restrict_cpt(dbn.prior_cpt(i)));
    transition.push_back(restrict_cpt(dbn.transition_cpt(i)));
  }
  return DiscreteDbn(std::move(nodes), remap_edges(dbn.intra_edges()), remap_edges(dbn.inter_edges()),
                     std::move(prior), std::move(transition));
}

}  // namespace dbn
