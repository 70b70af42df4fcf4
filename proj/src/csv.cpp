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

#include "dbn/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "dbn/error.hpp"
#include "dbn/marginals.hpp"

namespace dbn {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << text;
  if (!out) throw ParseError("error writing " + path);
}

SmoothedMarginals::SmoothedMarginals(int horizon, std::vector<int> arities)
    : horizon_(horizon), arities_(std::move(arities)) {
  values_.resize(static_cast<std::size_t>(horizon_) * arities_.size());
  for (int t = 0; t < horizon_; ++t) {
    for (int h = 0; h < num_hidden(); ++h) values_[t * num_hidden() + h].assign(arities_[h], 0.0);
  }
}

SmoothedMarginals SmoothedMarginals::for_model(const DiscreteDbn& dbn, int horizon) {
  std::vector<int> arities;
  for (int h = 0; h < dbn.num_hidden(); ++h) arities.push_back(dbn.hidden_arity(h));
  return SmoothedMarginals(horizon, std::move(arities));
}

double max_abs_difference(const SmoothedMarginals& a, const SmoothedMarginals& b) {
  if (a.horizon() != b.horizon() || a.arities() != b.arities()) {
    throw InvalidArgument("marginal sets cover different (t, node, state) indices");
  }
  double worst = 0.0;
  for (int t = 0; t < a.horizon(); ++t) {
    for (int h = 0; h < a.num_hidden(); ++h) {
      auto x = a.at(t, h);
      auto y = b.at(t, h);
      for (std::size_t s = 0; s < x.size(); ++s) worst = std::max(worst, std::abs(x[s] - y[s]));
    }
  }
  return worst;
}

double normalize(std::span<double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  if (sum > 0.0) {
    for (double& x : v) x /= sum;
  }
  return sum;
}

std::string marginals_to_csv(const SmoothedMarginals& marginals, const DiscreteDbn& dbn) {
  std::string out = "t,node,state,probability\n";
  for (int t = 0; t < marginals.horizon(); ++t) {
    for (int h = 0; h < marginals.num_hidden(); ++h) {
      const auto dist = marginals.at(t, h);
      for (std::size_t s = 0; s < dist.size(); ++s) {
        out += std::to_string(t + 1);
        out += ',';
        out += dbn.node(dbn.hidden_nodes()[h]).name;
        out += ',';
        out += std::to_string(s);
        out += ',';
        out += format_double(dist[s]);
        out += '\n';
      }
    }
  }
  return out;
}

}  // namespace dbn
