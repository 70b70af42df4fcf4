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

#ifndef DBN_APPROX_HPP_
#define DBN_APPROX_HPP_

#include <vector>

#include "dbn/factor.hpp"
#include "dbn/lbp.hpp"
#include "dbn/marginals.hpp"
#include "dbn/model.hpp"
#include "dbn/network.hpp"

namespace dbn {

// Product of independent cluster distributions. Factor variables are hidden
// positions within the slice; each factor is normalized.
struct FactoredBelief {
  std::vector<Factor> factors;
};

// alpha (forward), beta (backward) and gamma (smoothed) per slice, one factor
// per cluster. FF uses one cluster per hidden node.
struct ApproxBeliefTrajectory {
  ClusterSpec clusters;
  std::vector<FactoredBelief> alpha;
  std::vector<FactoredBelief> beta;
  std::vector<FactoredBelief> gamma;
  SmoothedMarginals marginals;
  long zero_normalizer_events = 0;
};

// Factored frontier smoothing.
ApproxBeliefTrajectory ff_trajectory(const DiscreteDbn& dbn, const EvidenceSequence& evidence);
SmoothedMarginals ff_smoother(const DiscreteDbn& dbn, const EvidenceSequence& evidence);

// Exact marginal of `joint` on each cluster (variables = hidden positions).
FactoredBelief project_to_clusters(const Factor& joint, const ClusterSpec& clusters);

// Boyen-Koller smoothing with disjoint clusters. Both sweeps run exact
// two-slice updates by variable elimination and project onto the clusters.
ApproxBeliefTrajectory bk_trajectory(const DiscreteDbn& dbn, const EvidenceSequence& evidence,
                                     const ClusterSpec& clusters, const EliminationOptions& options = {});
SmoothedMarginals bk_smoother(const DiscreteDbn& dbn, const EvidenceSequence& evidence,
                              const ClusterSpec& clusters, const EliminationOptions& options = {});

// Forward-backward LBP on the BK mega-node graph; iteration 1 is BK.
LbpResult iterated_bk(const DiscreteDbn& dbn, const EvidenceSequence& evidence, const ClusterSpec& clusters,
                      LbpConfig config, const LbpRunOptions& options = {}, const ClusterCaps& caps = {});

}  // namespace dbn

#endif  // DBN_APPROX_HPP_
