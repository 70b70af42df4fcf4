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
#include <set>

#include "doctest.h"
#include "dbn/error.hpp"
#include "dbn/model.hpp"
#include "dbn/rng.hpp"

using namespace dbn;

namespace {

// Model with uniform CPTs over the given template edges.
DiscreteDbn uniform_model(std::vector<NodeSpec> nodes, std::vector<Edge> intra, std::vector<Edge> inter) {
  const int n = static_cast<int>(nodes.size());
  std::vector<NodeCpt> prior(n), trans(n);
  for (int i = 0; i < n; ++i) {
    for (const Edge& e : intra) {
      if (e.child == i) {
        prior[i].parents.push_back({e.parent, 0});
        trans[i].parents.push_back({e.parent, 0});
      }
    }
    for (const Edge& e : inter) {
      if (e.child == i) trans[i].parents.push_back({e.parent, 1});
    }
    auto table = [&](const NodeCpt& c) {
      std::vector<int> ar;
      std::size_t rows = 1;
      for (const auto& p : c.parents) {
        ar.push_back(nodes[p.node].arity);
        rows *= nodes[p.node].arity;
      }
      return ConditionalTable(nodes[i].arity, ar, std::vector<double>(rows * nodes[i].arity, 1.0 / nodes[i].arity));
    };
    prior[i].table = table(prior[i]);
    trans[i].table = table(trans[i]);
  }
  return DiscreteDbn(std::move(nodes), std::move(intra), std::move(inter), std::move(prior), std::move(trans));
}

std::vector<NodeSpec> two_chain_nodes() {
  return {{"X1", 2, NodeKind::kHidden},
          {"X2", 2, NodeKind::kHidden},
          {"Y1", 2, NodeKind::kObserved},
          {"Y2", 2, NodeKind::kObserved}};
}

std::vector<int> inter_parents(const DiscreteDbn& dbn, int node) {
  std::vector<int> out;
  for (const auto& p : dbn.transition_cpt(node).parents) {
    if (p.lag == 1) out.push_back(p.node);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("conditional table checks rows and reports the offending row") {
  CHECK_NOTHROW(ConditionalTable(2, {2}, {0.3, 0.7, 1.0, 0.0}));
  try {
    ConditionalTable bad(2, {2}, {0.5, 0.5, 0.5, 0.4});
    bad.check_stochastic();
    FAIL("row summing to 0.9 accepted");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
  CHECK_THROWS_AS(ConditionalTable(2, {2}, {0.5, 0.5}), InvalidArgument);
  const ConditionalTable t(2, {2, 3}, std::vector<double>(12, 0.5));
  const int parents[] = {1, 2};
  CHECK(t.config_index(parents) == 5);
}

TEST_CASE("chmm builder: coupled topology and private observations") {
  const DiscreteDbn dbn = build_chmm(5, 2, 42);
  REQUIRE(dbn.num_hidden() == 5);
  REQUIRE(dbn.observed_nodes().size() == 5);
  const auto& h = dbn.hidden_nodes();
  CHECK(inter_parents(dbn, h[0]) == std::vector<int>{h[0], h[1]});
  CHECK(inter_parents(dbn, h[2]) == std::vector<int>{h[1], h[2], h[3]});
  CHECK(inter_parents(dbn, h[4]) == std::vector<int>{h[3], h[4]});
  for (int i = 1; i < 4; ++i) CHECK(inter_parents(dbn, h[i]).size() == 3);
  for (int o : dbn.observed_nodes()) {
    REQUIRE(dbn.transition_cpt(o).parents.size() == 1);
    CHECK(dbn.transition_cpt(o).parents[0].lag == 0);
  }
  std::set<int> emitters;
  for (int o : dbn.observed_nodes()) emitters.insert(dbn.transition_cpt(o).parents[0].node);
  CHECK(emitters.size() == 5);
  CHECK(validate_regular(dbn).ok());
}

TEST_CASE("chmm builder: fan-in bound, degenerate HMM, determinism, bad arguments") {
  for (int n = 1; n <= 7; ++n) {
    const DiscreteDbn dbn = build_chmm(n, 3, n);
    for (int node : dbn.hidden_nodes()) CHECK(inter_parents(dbn, node).size() <= 3);
    for (int i = 0; i < dbn.num_nodes(); ++i) {
      CHECK_NOTHROW(dbn.prior_cpt(i).table.check_stochastic(1e-12));
      CHECK_NOTHROW(dbn.transition_cpt(i).table.check_stochastic(1e-12));
    }
  }
  const DiscreteDbn hmm = build_chmm(1, 2, 9);
  CHECK(hmm.num_hidden() == 1);
  CHECK(inter_parents(hmm, hmm.hidden_nodes()[0]).size() == 1);
  CHECK(build_chmm(3, 2, 11) == build_chmm(3, 2, 11));
  CHECK_FALSE(build_chmm(3, 2, 11) == build_chmm(3, 2, 12));
  CHECK_THROWS_AS(build_chmm(0, 2, 1), InvalidArgument);
  CHECK_THROWS_AS(build_chmm(2, 1, 1), InvalidArgument);
}

TEST_CASE("observation arity option") {
  BuildOptions options;
  options.observed_arity = 5;
  const DiscreteDbn dbn = build_chmm(2, 3, 1, options);
  for (int o : dbn.observed_nodes()) CHECK(dbn.node(o).arity == 5);
  for (int h : dbn.hidden_nodes()) CHECK(dbn.node(h).arity == 3);
}

TEST_CASE("regularity violations are named") {
  // Intra-slice hidden edge X1 -> X2.
  const DiscreteDbn coupled = uniform_model(two_chain_nodes(), {{0, 1}, {0, 2}, {1, 3}}, {{0, 0}, {1, 1}});
  const RegularityReport r1 = validate_regular(coupled);
  REQUIRE_FALSE(r1.ok());
  CHECK(r1.violations[0].find("X1[t] -> X2[t]") != std::string::npos);
  CHECK_THROWS_AS(require_inference_ready(coupled), InvalidArgument);

  // X2 has no child in the next slice.
  const DiscreteDbn stuck = uniform_model(two_chain_nodes(), {{0, 2}, {1, 3}}, {{0, 0}, {0, 1}});
  const RegularityReport r2 = validate_regular(stuck);
  REQUIRE(r2.violations.size() == 1);
  CHECK(r2.violations[0].find("X2 is not persistent") != std::string::npos);

  const DiscreteDbn fine = uniform_model(two_chain_nodes(), {{0, 2}, {1, 3}}, {{0, 0}, {1, 1}, {0, 1}});
  CHECK(validate_regular(fine).ok());
}

TEST_CASE("model constructor rejects structural errors") {
  CHECK_THROWS_AS(uniform_model(two_chain_nodes(), {{0, 1}, {1, 0}}, {}), InvalidArgument);
  auto nodes = two_chain_nodes();
  nodes[0].arity = 1;
  CHECK_THROWS_AS(uniform_model(nodes, {}, {{0, 0}}), InvalidArgument);
  const DiscreteDbn ok = build_chmm(2, 2, 1);
  std::vector<NodeCpt> prior, trans;
  for (int i = 0; i < ok.num_nodes(); ++i) {
    prior.push_back(ok.prior_cpt(i));
    trans.push_back(ok.transition_cpt(i));
  }
  trans[0].parents.pop_back();
  CHECK_THROWS_AS(DiscreteDbn(ok.nodes(), ok.intra_edges(), ok.inter_edges(), prior, trans), InvalidArgument);
}

TEST_CASE("unroll") {
  const DiscreteDbn hmm = build_chmm(1, 2, 3);
  const UnrolledNetwork u = unroll(hmm, 3);
  CHECK(u.nodes.size() == 6);
  // X1 -> X2 -> X3 plus three emissions.
  CHECK(u.edges.size() == 5);
  CHECK(u.nodes[u.id(1, 0)].parents == std::vector<int>{u.id(0, 0)});
  CHECK(u.nodes[u.id(2, 0)].parents == std::vector<int>{u.id(1, 0)});
  CHECK(u.nodes[u.id(0, 0)].role == CptRole::kPrior);
  CHECK(u.nodes[u.id(2, 0)].role == CptRole::kTransition);

  const DiscreteDbn chmm = build_chmm(2, 2, 3);
  const UnrolledNetwork u2 = unroll(chmm, 2);
  int hidden_nodes = 0, hidden_edges = 0;
  for (const auto& n : u2.nodes) hidden_nodes += chmm.node(n.index).kind == NodeKind::kHidden;
  for (const auto& e : u2.edges) {
    hidden_edges += chmm.node(u2.nodes[e.parent].index).kind == NodeKind::kHidden &&
                    chmm.node(u2.nodes[e.child].index).kind == NodeKind::kHidden;
  }
  CHECK(hidden_nodes == 4);
  CHECK(u2.nodes.size() == 8);
  CHECK(hidden_edges == 4);
  CHECK(is_acyclic(static_cast<int>(u2.nodes.size()), u2.edges));

  for (const auto& n : unroll(chmm, 1).nodes) CHECK(n.role == CptRole::kPrior);
  CHECK_THROWS_AS(unroll(chmm, 0), InvalidArgument);
  for (int t = 1; t <= 6; ++t) {
    const UnrolledNetwork w = unroll(build_water_network(1), t);
    CHECK(is_acyclic(static_cast<int>(w.nodes.size()), w.edges));
  }
}

TEST_CASE("evidence validation and likelihoods") {
  const DiscreteDbn dbn = build_chmm(2, 2, 5);
  EvidenceSequence ev(3, dbn.num_nodes());
  const int y1 = dbn.observed_nodes()[0];
  ev.set(0, y1, 1);
  CHECK_NOTHROW(ev.check(dbn));
  const NodeLikelihoods w(dbn, ev);
  const auto& emit = dbn.transition_cpt(y1).table;
  CHECK(w.at(0, 0)[0] == emit.at(1, 0));
  CHECK(w.at(0, 0)[1] == emit.at(1, 1));
  // Missing values are identity likelihoods.
  CHECK(w.at(1, 0)[0] == 1.0);
  CHECK(w.at(0, 1)[1] == 1.0);

  EvidenceSequence hidden_value = ev;
  hidden_value.set(1, dbn.hidden_nodes()[0], 0);
  CHECK_THROWS_AS(hidden_value.check(dbn), InvalidArgument);
  EvidenceSequence out_of_range = ev;
  out_of_range.set(1, y1, 2);
  CHECK_THROWS_AS(out_of_range.check(dbn), InvalidArgument);
  CHECK_THROWS_AS(EvidenceSequence(0, 4), InvalidArgument);
}

TEST_CASE("ancestral sampling is seeded and fills every observation") {
  const DiscreteDbn dbn = build_chmm(3, 2, 5);
  Rng a(7, "evidence"), b(7, "evidence");
  const EvidenceSequence ea = sample_evidence(dbn, 20, a);
  const EvidenceSequence eb = sample_evidence(dbn, 20, b);
  CHECK(ea == eb);
  for (int t = 0; t < 20; ++t) {
    for (int h : dbn.hidden_nodes()) CHECK(ea.value(t, h) == kMissing);
    for (int o : dbn.observed_nodes()) CHECK(ea.value(t, o) >= 0);
  }
  CHECK_NOTHROW(ea.check(dbn));
}

TEST_CASE("rng sub-streams") {
  CHECK(Rng::derive_seed(1, "model") != Rng::derive_seed(1, "evidence"));
  CHECK(Rng::derive_seed(1, "model") == Rng::derive_seed(1, "model"));
  Rng r(3);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  const double w[] = {0.0, 1.0, 0.0};
  CHECK(r.categorical(w) == 1);
}

TEST_CASE("water network: regular, seeded, evidence on four nodes") {
  const DiscreteDbn w = build_water_network(3);
  CHECK(w.num_hidden() == 8);
  CHECK(w.observed_nodes().size() == 4);
  for (int h = 0; h < 8; ++h) CHECK(w.hidden_arity(h) == 2);
  CHECK(validate_regular(w).ok());
  CHECK_NOTHROW(require_inference_ready(w));
  CHECK(build_water_network(3) == build_water_network(3));
  CHECK_FALSE(build_water_network(3) == build_water_network(4));
}

namespace {

// Min-fill triangulation of an undirected graph; returns the elimination
// cliques.
std::vector<std::set<int>> min_fill_cliques(std::vector<std::set<int>> adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<bool> gone(n, false);
  std::vector<std::set<int>> cliques;
  for (int step = 0; step < n; ++step) {
    int best = -1;
    long best_fill = -1;
    for (int v = 0; v < n; ++v) {
      if (gone[v]) continue;
      long fill = 0;
      for (int a : adj[v]) {
        for (int b : adj[v]) {
          if (a < b && !adj[a].count(b)) ++fill;
        }
      }
      if (best < 0 || fill < best_fill) {
        best = v;
        best_fill = fill;
      }
    }
    std::set<int> clique = adj[best];
    clique.insert(best);
    cliques.push_back(clique);
    for (int a : adj[best]) {
      for (int b : adj[best]) {
        if (a != b) adj[a].insert(b);
      }
    }
    for (int a : adj[best]) adj[a].erase(best);
    adj[best].clear();
    gone[best] = true;
  }
  return cliques;
}

}  // namespace

TEST_CASE("water network: triangulation creates non-local cliques") {
  const DiscreteDbn w = build_water_network(1);
  const int n = w.num_nodes();
  // Two-slice graph: ids 0..n-1 are slice t-1, n..2n-1 slice t.
  std::vector<std::set<int>> families;
  for (int i = 0; i < n; ++i) {
    std::set<int> fam{n + i};
    for (const auto& p : w.transition_cpt(i).parents) fam.insert(p.lag == 1 ? p.node : n + p.node);
    families.push_back(fam);
  }
  std::vector<std::set<int>> adj(2 * n);
  for (const auto& fam : families) {
    for (int a : fam) {
      for (int b : fam) {
        if (a != b) adj[a].insert(b);
      }
    }
  }
  const auto cliques = min_fill_cliques(adj);
  std::size_t max_family = 0, max_clique = 0;
  for (const auto& f : families) max_family = std::max(max_family, f.size());
  for (const auto& c : cliques) max_clique = std::max(max_clique, c.size());
  CHECK(max_clique >= max_family);
  bool non_local = false;
  for (const auto& c : cliques) {
    const bool inside = std::any_of(families.begin(), families.end(), [&](const std::set<int>& f) {
      return std::includes(f.begin(), f.end(), c.begin(), c.end());
    });
    non_local = non_local || !inside;
  }
  CHECK(non_local);
}

TEST_CASE("restrict_hidden keeps a regular sub-model") {
  const DiscreteDbn w = build_water_network(2);
  const int keep[] = {0, 1, 2, 3};
  const DiscreteDbn r = restrict_hidden(w, keep);
  CHECK(r.num_hidden() == 4);
  CHECK(validate_regular(r).ok());
  CHECK_NOTHROW(require_inference_ready(r));
  // Observations on kept hidden nodes 1, 3 and 4 survive.
  CHECK(r.observed_nodes().size() == 3);
  const int bad[] = {9};
  CHECK_THROWS_AS(restrict_hidden(w, bad), InvalidArgument);
}
