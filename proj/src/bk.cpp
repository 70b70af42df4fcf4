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

#include "dbn/approx.hpp"
#include "dbn/error.hpp"

namespace dbn {

namespace {

// Normalizes f; a zero-mass factor becomes uniform and counts as an event.
void normalize_counted(Factor& f, long& events) {
  const double total = f.total();
  if (total > 0.0 && std::isfinite(total)) {
    f.normalize();
    return;
  }
  ++events;
  for (double& v : f.values()) v = 1.0 / static_cast<double>(f.size());
}

Factor ones(const std::vector<int>& vars, const std::vector<int>& cards) {
  std::size_t n = 1;
  for (int c : cards) n *= static_cast<std::size_t>(c);
  return Factor(vars, cards, std::vector<double>(n, 1.0));
}

// Two-slice variable ids: hidden position h is h in the previous slice and
// H + h in the current one.
struct TwoSlice {
  const DiscreteDbn& dbn;
  int H;

  std::vector<int> cards(const std::vector<int>& members) const {
    std::vector<int> out;
    for (int m : members) out.push_back(dbn.hidden_arity(m));
    return out;
  }
  std::vector<int> shifted(const std::vector<int>& members, int offset) const {
    std::vector<int> out;
    for (int m : members) out.push_back(m + offset);
    return out;
  }
  // P(X_t^h | parents) over previous-slice parents and the current node.
  Factor cpt(int h, int t) const {
    const NodeCpt& c = dbn.cpt_at(dbn.hidden_nodes()[h], t);
    std::vector<int> vars;
    std::vector<int> cards;
    for (const ParentRef& p : c.parents) {
      vars.push_back(dbn.hidden_position(p.node));
      cards.push_back(dbn.node(p.node).arity);
    }
    vars.push_back(H + h);
    cards.push_back(dbn.hidden_arity(h));
    return Factor(std::move(vars), std::move(cards), c.table.values());
  }
  Factor likelihood(const NodeLikelihoods& w, int t, int h) const {
    const auto v = w.at(t, h);
    return Factor({H + h}, {dbn.hidden_arity(h)}, std::vector<double>(v.begin(), v.end()));
  }
  // Same table with variables moved by offset.
  Factor rename(const Factor& f, int offset) const {
    return Factor(shifted(f.vars(), offset), f.cards(), f.values());
  }
};

}  // namespace

FactoredBelief project_to_clusters(const Factor& joint, const ClusterSpec& clusters) {
  FactoredBelief out;
  for (const auto& members : clusters.clusters) {
    Factor m = joint.marginal(members);
    m.normalize();
    out.factors.push_back(std::move(m));
  }
  return out;
}

ApproxBeliefTrajectory bk_trajectory(const DiscreteDbn& dbn, const EvidenceSequence& evidence,
                                     const ClusterSpec& clusters, const EliminationOptions& options) {
  require_inference_ready(dbn);
  evidence.check(dbn);
  const int T = evidence.horizon();
  const int H = dbn.num_hidden();
  if (T < 1) throw InvalidArgument("evidence horizon must be >= 1");
  ClusterSpec spec = clusters;
  spec.validate(H);
  const int C = static_cast<int>(spec.clusters.size());
  const NodeLikelihoods w(dbn, evidence);
  const TwoSlice ts{dbn, H};
  long events = 0;

  // Forward: exact one-step update from the factored prior, then projection.
  std::vector<FactoredBelief> alpha(T);
  for (int t = 0; t < T; ++t) {
    std::vector<Factor> base;
    if (t > 0) {
      for (const Factor& f : alpha[t - 1].factors) base.push_back(f);
    }
    for (int h = 0; h < H; ++h) {
      base.push_back(ts.cpt(h, t));
      base.push_back(ts.likelihood(w, t, h));
    }
    for (int c = 0; c < C; ++c) {
      const auto& members = spec.clusters[c];
      const std::vector<int> query = ts.shifted(members, H);
      std::vector<Factor> factors = base;
      factors.push_back(ones(query, ts.cards(members)));
      Factor f = ts.rename(eliminate_to(std::move(factors), query, options), -H);
      normalize_counted(f, events);
      alpha[t].factors.push_back(std::move(f));
    }
  }

  // Backward: beta_{t-1}^c sums the next slice against the other clusters'
  // forward factors.
  std::vector<FactoredBelief> beta(T);
  for (int c = 0; c < C; ++c) {
    Factor f = ones(spec.clusters[c], ts.cards(spec.clusters[c]));
    f.normalize();
    beta[T - 1].factors.push_back(std::move(f));
  }
  for (int t = T - 1; t >= 1; --t) {
    std::vector<Factor> next;
    for (int h = 0; h < H; ++h) {
      next.push_back(ts.cpt(h, t));
      next.push_back(ts.likelihood(w, t, h));
    }
    for (const Factor& f : beta[t].factors) next.push_back(ts.rename(f, H));
    for (int c = 0; c < C; ++c) {
      const auto& members = spec.clusters[c];
      std::vector<Factor> factors = next;
      for (int other = 0; other < C; ++other) {
        if (other != c) factors.push_back(alpha[t - 1].factors[other]);
      }
      factors.push_back(ones(members, ts.cards(members)));
      Factor f = eliminate_to(std::move(factors), members, options);
      normalize_counted(f, events);
      beta[t - 1].factors.push_back(std::move(f));
    }
  }

  ApproxBeliefTrajectory out;
  out.clusters = spec;
  out.marginals = SmoothedMarginals::for_model(dbn, T);
  for (int t = 0; t < T; ++t) {
    FactoredBelief gamma;
    for (int c = 0; c < C; ++c) {
      Factor g = alpha[t].factors[c].product(beta[t].factors[c]);
      normalize_counted(g, events);
      for (int h : spec.clusters[c]) {
        const int keep[] = {h};
        const Factor m = g.marginal(keep);
        auto dst = out.marginals.at(t, h);
        for (std::size_t s = 0; s < m.size(); ++s) dst[s] = m.values()[s];
      }
      gamma.factors.push_back(std::move(g));
    }
    out.gamma.push_back(std::move(gamma));
  }
  out.alpha = std::move(alpha);
  out.beta = std::move(beta);
  out.zero_normalizer_events = events;
  return out;
}

SmoothedMarginals bk_smoother(const DiscreteDbn& dbn, const EvidenceSequence& evidence,
                              const ClusterSpec& clusters, const EliminationOptions& options) {
  return bk_trajectory(dbn, evidence, clusters, options).marginals;
}

LbpResult iterated_bk(const DiscreteDbn& dbn, const EvidenceSequence& evidence, const ClusterSpec& clusters,
                      LbpConfig config, const LbpRunOptions& options, const ClusterCaps& caps) {
  config.schedule = Schedule::kForwardBackward;
  const Network net = build_bk_graph(dbn, evidence.horizon(), clusters, caps);
  return lbp_smoother(net, dbn, evidence, config, options);
}

}  // namespace dbn
