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
#include <limits>

#include "dbn/error.hpp"
#include "dbn/lbp.hpp"

namespace dbn {

double bethe_free_energy(const Network& net, const std::vector<std::vector<double>>& local_evidence,
                         const BeliefSet& beliefs) {
  const int n = net.num_nodes();
  if (static_cast<int>(beliefs.node.size()) != n || static_cast<int>(beliefs.family.size()) != n ||
      static_cast<int>(local_evidence.size()) != n) {
    throw InvalidArgument("belief set does not match the network");
  }
  double energy = 0.0;
  for (int id = 0; id < n; ++id) {
    const NetworkNode& node = net.node(id);
    const ConditionalTable& cpt = *node.cpt;
    const auto& fam = beliefs.family[id];
    for (std::size_t r = 0; r < cpt.num_configs(); ++r) {
      for (int x = 0; x < node.arity; ++x) {
        const double b = fam[r * node.arity + x];
        if (b <= 0.0) continue;
        const double psi = cpt.at(x, r) * local_evidence[id][x];
        if (psi <= 0.0) return std::numeric_limits<double>::infinity();
        energy += b * (std::log(b) - std::log(psi));
      }
    }
    // Variable entropy correction, weight d_i - 1 = number of children.
    const double weight = static_cast<double>(net.out_edges(id).size());
    if (weight == 0.0) continue;
    for (double b : beliefs.node[id]) {
      if (b > 0.0) energy -= weight * b * std::log(b);
    }
  }
  return energy;
}

}  // namespace dbn
