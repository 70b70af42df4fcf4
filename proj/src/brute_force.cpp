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

#include "dbn/csv.hpp"
#include "dbn/error.hpp"
#include "dbn/exact.hpp"

namespace dbn {

namespace {

// Product of every CPT entry of slice t (hidden and observed) given the
// hidden values of slices t-1 and t. Observed nodes contribute the
// probability of their recorded value, or 1 when missing.
double slice_weight(const DiscreteDbn& dbn, const EvidenceSequence& evidence, int t,
                    const int* prev, const int* cur, std::vector<int>& parent_values) {
  double weight = 1.0;
  for (int i = 0; i < dbn.num_nodes(); ++i) {
    int value;
    if (dbn.node(i).kind == NodeKind::kHidden) {
      value = cur[dbn.hidden_position(i)];
    } else {
      value = evidence.value(t, i);
      if (value == kMissing) continue;
    }
    const NodeCpt& cpt = dbn.cpt_at(i, t);
    parent_values.clear();
    for (const ParentRef& p : cpt.parents) {
      const int h = dbn.hidden_position(p.node);
      if (h < 0) throw InvalidArgument("brute force supports hidden parents only");
      parent_values.push_back(p.lag == 0 ? cur[h] : prev[h]);
    }
    weight *= cpt.table.at(value, cpt.table.config_index(parent_values));
  }
  return weight;
}

}  // namespace

SmoothedMarginals brute_force_joint(const DiscreteDbn& dbn, const EvidenceSequence& evidence,
                                    const ExactOptions& options) {
  evidence.check(dbn);
  const int H = dbn.num_hidden();
  const int T = evidence.horizon();
  const int positions = H * T;
  double total_states = 1.0;
  for (int t = 0; t < T; ++t) {
    for (int h = 0; h < H; ++h) total_states *= dbn.hidden_arity(h);
  }
  if (total_states > static_cast<double>(options.max_brute_force_states)) {
    throw CapExceeded("brute-force enumeration over " + format_double(total_states) +
                      " joint trajectories (cap " + std::to_string(options.max_brute_force_states) + ")");
  }

  // x[t * H + h]; the last position varies fastest.
  std::vector<int> x(positions, 0);
  // prefix[t] = product of slice weights 0..t.
  std::vector<double> prefix(T, 0.0);
  std::vector<int> scratch;
  auto recompute_from = [&](int t0) {
    for (int t = t0; t < T; ++t) {
      const int* cur = &x[t * H];
      const int* prev = t > 0 ? &x[(t - 1) * H] : cur;
      const double w = slice_weight(dbn, evidence, t, prev, cur, scratch);
      prefix[t] = (t > 0 ? prefix[t - 1] : 1.0) * w;
    }
  };
  recompute_from(0);

  SmoothedMarginals out = SmoothedMarginals::for_model(dbn, T);
  double total = 0.0;
  for (;;) {
    const double w = prefix[T - 1];
    if (w != 0.0) {
      total += w;
      for (int t = 0; t < T; ++t) {
        for (int h = 0; h < H; ++h) out.at(t, h)[x[t * H + h]] += w;
      }
    }
    int pos = positions - 1;
    while (pos >= 0) {
      if (++x[pos] < dbn.hidden_arity(pos % H)) break;
      x[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
    recompute_from(pos / H);
  }
  if (!(total > 0.0)) throw ZeroProbabilityEvidence("impossible evidence: total probability is zero");
  for (int t = 0; t < T; ++t) {
    for (int h = 0; h < H; ++h) {
      for (double& p : out.at(t, h)) p /= total;
    }
  }
  out.log_evidence = std::log(total);
  return out;
}

}  // namespace dbn
