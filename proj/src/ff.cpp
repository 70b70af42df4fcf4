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

#include "dbn/approx.hpp"
#include "dbn/error.hpp"

namespace dbn {

namespace {

void normalize_counted(std::vector<double>& v, long& events) {
  double sum = 0.0;
  for (double x : v) sum += x;
  if (sum > 0.0 && std::isfinite(sum)) {
    for (double& x : v) x /= sum;
    return;
  }
  ++events;
  std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
}

inline void advance(std::vector<int>& digits, const std::vector<int>& radix) {
  for (int k = static_cast<int>(digits.size()) - 1; k >= 0; --k) {
    if (++digits[k] < radix[k]) return;
    digits[k] = 0;
  }
}

FactoredBelief per_node_belief(const std::vector<std::vector<double>>& marginals, const DiscreteDbn& dbn) {
  FactoredBelief out;
  for (int h = 0; h < dbn.num_hidden(); ++h) out.factors.emplace_back(std::vector<int>{h}, std::vector<int>{dbn.hidden_arity(h)}, marginals[h]);
  return out;
}

}  // namespace

ApproxBeliefTrajectory ff_trajectory(const DiscreteDbn& dbn, const EvidenceSequence& evidence) {
  require_inference_ready(dbn);
  evidence.check(dbn);
  const int T = evidence.horizon();
  const int H = dbn.num_hidden();
  if (T < 1) throw InvalidArgument("evidence horizon must be >= 1");
  const NodeLikelihoods w(dbn, evidence);

  // Parent positions of each hidden node in the transition model.
  std::vector<std::vector<int>> parents(H);
  for (int h = 0; h < H; ++h) {
    for (const ParentRef& p : dbn.transition_cpt(dbn.hidden_nodes()[h]).parents) {
      parents[h].push_back(dbn.hidden_position(p.node));
    }
  }

  ApproxBeliefTrajectory out;
  out.clusters = ClusterSpec::per_node(H);
  long events = 0;
  using Slice = std::vector<std::vector<double>>;
  std::vector<Slice> alpha(T, Slice(H));
  std::vector<Slice> beta(T, Slice(H));

  for (int t = 0; t < T; ++t) {
    for (int h = 0; h < H; ++h) {
      const ConditionalTable& cpt = dbn.cpt_at(dbn.hidden_nodes()[h], t).table;
      const int a = dbn.hidden_arity(h);
      std::vector<double> pi(a, 0.0);
      std::vector<int> digits(cpt.parent_arities().size(), 0);
      for (std::size_t r = 0; r < cpt.num_configs(); ++r) {
        double weight = 1.0;
        for (std::size_t k = 0; k < digits.size(); ++k) weight *= alpha[t - 1][parents[h][k]][digits[k]];
        const auto row = cpt.row(r);
        for (int x = 0; x < a; ++x) pi[x] += weight * row[x];
        advance(digits, cpt.parent_arities());
      }
      const auto wt = w.at(t, h);
      for (int x = 0; x < a; ++x) pi[x] *= wt[x];
      normalize_counted(pi, events);
      alpha[t][h] = std::move(pi);
    }
  }

  // Backward: per-edge lambda messages, accumulated into the parents' beta.
  for (int h = 0; h < H; ++h) beta[T - 1][h].assign(dbn.hidden_arity(h), 1.0);
  for (int t = T - 1; t >= 0; --t) {
    for (int h = 0; h < H; ++h) normalize_counted(beta[t][h], events);
    if (t == 0) break;
    for (int h = 0; h < H; ++h) beta[t - 1][h].assign(dbn.hidden_arity(h), 1.0);
    for (int h = 0; h < H; ++h) {
      const ConditionalTable& cpt = dbn.transition_cpt(dbn.hidden_nodes()[h]).table;
      const int a = dbn.hidden_arity(h);
      const auto wt = w.at(t, h);
      std::vector<double> lambda(a);
      for (int x = 0; x < a; ++x) lambda[x] = wt[x] * beta[t][h][x];
      const std::size_t n = parents[h].size();
      std::vector<std::vector<double>> msgs(n);
      for (std::size_t k = 0; k < n; ++k) msgs[k].assign(cpt.parent_arities()[k], 0.0);
      std::vector<int> digits(n, 0);
      std::vector<double> prefix(n + 1);
      std::vector<double> suffix(n + 1);
      for (std::size_t r = 0; r < cpt.num_configs(); ++r) {
        const auto row = cpt.row(r);
        double s = 0.0;
        for (int x = 0; x < a; ++x) s += lambda[x] * row[x];
        prefix[0] = 1.0;
        for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] * alpha[t - 1][parents[h][k]][digits[k]];
        suffix[n] = 1.0;
        for (std::size_t k = n; k-- > 0;) suffix[k] = suffix[k + 1] * alpha[t - 1][parents[h][k]][digits[k]];
        for (std::size_t k = 0; k < n; ++k) msgs[k][digits[k]] += s * prefix[k] * suffix[k + 1];
        advance(digits, cpt.parent_arities());
      }
      for (std::size_t k = 0; k < n; ++k) {
        normalize_counted(msgs[k], events);
        auto& b = beta[t - 1][parents[h][k]];
        for (std::size_t u = 0; u < b.size(); ++u) b[u] *= msgs[k][u];
      }
    }
  }

  out.marginals = SmoothedMarginals::for_model(dbn, T);
  for (int t = 0; t < T; ++t) {
    Slice gamma(H);
    for (int h = 0; h < H; ++h) {
      gamma[h] = alpha[t][h];
      for (std::size_t x = 0; x < gamma[h].size(); ++x) gamma[h][x] *= beta[t][h][x];
      normalize_counted(gamma[h], events);
      std::copy(gamma[h].begin(), gamma[h].end(), out.marginals.at(t, h).begin());
    }
    out.alpha.push_back(per_node_belief(alpha[t], dbn));
    out.beta.push_back(per_node_belief(beta[t], dbn));
    out.gamma.push_back(per_node_belief(gamma, dbn));
  }
  out.zero_normalizer_events = events;
  return out;
}

SmoothedMarginals ff_smoother(const DiscreteDbn& dbn, const EvidenceSequence& evidence) {
  return ff_trajectory(dbn, evidence).marginals;
}

}  // namespace dbn
