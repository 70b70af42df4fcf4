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

#include <cmath>

#include "doctest.h"
#include "dbn/approx.hpp"
#include "dbn/error.hpp"
#include "dbn/exact.hpp"
#include "dbn/experiments.hpp"
#include "dbn/metrics.hpp"

using namespace dbn;

namespace {

void check_normalized(const SmoothedMarginals& m) {
  for (int t = 0; t < m.horizon(); ++t) {
    for (int h = 0; h < m.num_hidden(); ++h) {
      double s = 0.0;
      for (double v : m.at(t, h)) {
        CHECK(v >= 0.0);
        s += v;
      }
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
  }
}

}  // namespace

TEST_CASE("projection onto clusters") {
  const Factor joint({0, 1}, {2, 2}, {0.4, 0.1, 0.1, 0.4});
  const FactoredBelief p = project_to_clusters(joint, ClusterSpec::per_node(2));
  REQUIRE(p.factors.size() == 2);
  for (const Factor& f : p.factors) {
    CHECK(f.values()[0] == doctest::Approx(0.5));
    CHECK(f.values()[1] == doctest::Approx(0.5));
  }

  // A product-form joint is reproduced exactly.
  const Factor a({0}, {2}, {0.3, 0.7}), b({1}, {3}, {0.2, 0.5, 0.3});
  const FactoredBelief q = project_to_clusters(a.product(b), ClusterSpec::per_node(2));
  const Factor back = q.factors[0].product(q.factors[1]);
  const Factor orig = a.product(b);
  for (std::size_t k = 0; k < orig.size(); ++k) CHECK(std::abs(back.values()[k] - orig.values()[k]) < 1e-15);

  const FactoredBelief whole = project_to_clusters(joint, ClusterSpec::whole_slice(2));
  REQUIRE(whole.factors.size() == 1);
  CHECK(whole.factors[0].values() == joint.values());
}

TEST_CASE("FF is exact on HMMs and on uncoupled chains") {
  for (int seed = 1; seed <= 5; ++seed) {
    const DiscreteDbn hmm = build_chmm(1, 3, seed);
    const EvidenceSequence ev = sample_experiment_evidence(hmm, 20, seed);
    CHECK(max_abs_difference(ff_smoother(hmm, ev), flat_smoother(hmm, ev)) < 1e-12);

    const DiscreteDbn fhmm = build_factorial_hmm(3, 2, seed);
    const EvidenceSequence fe = sample_experiment_evidence(fhmm, 15, seed);
    CHECK(max_abs_difference(ff_smoother(fhmm, fe), flat_smoother(fhmm, fe)) < 1e-10);
  }
}

TEST_CASE("FF regression on a small coupled model") {
  const DiscreteDbn dbn = build_chmm(2, 2, 3);
  const EvidenceSequence ev = sample_experiment_evidence(dbn, 3, 3);
  const SmoothedMarginals ff = ff_smoother(dbn, ev);
  check_normalized(ff);
  CHECK(l1_error(flat_smoother(dbn, ev), ff).total == doctest::Approx(0.0152041859580223).epsilon(1e-9));
}

TEST_CASE("BK with exact clusters is exact") {
  for (int seed = 1; seed <= 4; ++seed) {
    const DiscreteDbn dbn = build_chmm(3, 2, seed);
    const EvidenceSequence ev = sample_experiment_evidence(dbn, 12, seed);
    const SmoothedMarginals bk = bk_smoother(dbn, ev, ClusterSpec::whole_slice(3));
    CHECK(max_abs_difference(bk, frontier_smoother(dbn, ev)) < 1e-9);
    check_normalized(bk);

    const DiscreteDbn hmm = build_chmm(1, 4, seed);
    const EvidenceSequence he = sample_experiment_evidence(hmm, 20, seed);
    CHECK(max_abs_difference(bk_smoother(hmm, he, ClusterSpec::per_node(1)), flat_smoother(hmm, he)) < 1e-10);
  }
}

TEST_CASE("BK equals one iteration of iterated BK") {
  for (int seed = 1; seed <= 4; ++seed) {
    const DiscreteDbn dbn = build_chmm(3, 2, seed);
    const EvidenceSequence ev = sample_experiment_evidence(dbn, 15, seed);
    for (const ClusterSpec& c : {ClusterSpec::per_node(3), ClusterSpec::parse("[[0,1],[2]]", dbn)}) {
      LbpConfig config;
      config.max_iterations = 1;
      const LbpResult r = iterated_bk(dbn, ev, c, config);
      CHECK(max_abs_difference(r.marginals, bk_smoother(dbn, ev, c)) < 1e-9);
    }
  }
}

TEST_CASE("iterated BK reaches a fixed point") {
  const DiscreteDbn dbn = build_chmm(4, 2, 6);
  const EvidenceSequence ev = sample_experiment_evidence(dbn, 20, 6);
  LbpConfig config;
  config.max_iterations = 100;
  config.damping = 0.1;
  config.convergence_tol = 1e-10;
  const LbpResult r = iterated_bk(dbn, ev, ClusterSpec::per_node(4), config);
  REQUIRE(r.converged);
  CHECK(r.iterations < 100);
  check_normalized(r.marginals);
  CHECK(r.trace.back().max_delta < config.convergence_tol);
}

TEST_CASE("BK trajectory shapes") {
  const DiscreteDbn dbn = build_chmm(3, 2, 2);
  const EvidenceSequence ev = sample_experiment_evidence(dbn, 6, 2);
  const ClusterSpec c = ClusterSpec::parse("[[0,2],[1]]", dbn);
  const ApproxBeliefTrajectory tr = bk_trajectory(dbn, ev, c);
  REQUIRE(tr.alpha.size() == 6);
  REQUIRE(tr.gamma.size() == 6);
  for (const FactoredBelief& g : tr.gamma) {
    REQUIRE(g.factors.size() == 2);
    CHECK(g.factors[0].size() == 4);
    CHECK(g.factors[1].size() == 2);
    for (const Factor& f : g.factors) CHECK(f.total() == doctest::Approx(1.0));
  }
  CHECK(tr.zero_normalizer_events == 0);
}

TEST_CASE("BK beats FF on typical coupled models") {
  std::vector<double> ff, bk;
  int bk_wins = 0;
  for (int seed = 1; seed <= 20; ++seed) {
    const DiscreteDbn dbn = build_chmm(4, 2, seed);
    const EvidenceSequence ev = sample_experiment_evidence(dbn, 30, seed);
    const SmoothedMarginals exact = flat_smoother(dbn, ev);
    ff.push_back(l1_error(exact, ff_smoother(dbn, ev)).total);
    bk.push_back(l1_error(exact, bk_smoother(dbn, ev, ClusterSpec::per_node(4))).total);
    if (bk.back() <= ff.back()) ++bk_wins;
  }
  CHECK(median(bk) <= median(ff));
  CHECK(bk_wins >= 14);
}

TEST_CASE("cluster caps are enforced") {
  const DiscreteDbn dbn = build_chmm(6, 2, 1);
  const EvidenceSequence ev = sample_experiment_evidence(dbn, 4, 1);
  EliminationOptions tiny;
  tiny.max_factor_entries = 8;
  CHECK_THROWS_AS(bk_smoother(dbn, ev, ClusterSpec::whole_slice(6), tiny), CapExceeded);
  ClusterCaps caps;
  caps.max_cluster_states = 16;
  LbpConfig config;
  CHECK_THROWS_AS(iterated_bk(dbn, ev, ClusterSpec::whole_slice(6), config, {}, caps), CapExceeded);
}
