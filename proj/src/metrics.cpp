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

#include "dbn/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dbn/error.hpp"

namespace dbn {

L1Report l1_error(const SmoothedMarginals& exact, const SmoothedMarginals& approx) {
  const int T = std::max(exact.horizon(), approx.horizon());
  const int H = std::max(exact.num_hidden(), approx.num_hidden());
  for (int t = 0; t < T; ++t) {
    for (int h = 0; h < H; ++h) {
      const bool in_exact = t < exact.horizon() && h < exact.num_hidden();
      const bool in_approx = t < approx.horizon() && h < approx.num_hidden();
      if (in_exact != in_approx) {
        throw InvalidArgument(std::string(in_exact ? "approximate" : "exact") + " marginals have no entry for t=" +
                              std::to_string(t + 1) + ", node " + std::to_string(h));
      }
      if (in_exact && in_approx && exact.arity(h) != approx.arity(h)) {
        const int s = std::min(exact.arity(h), approx.arity(h));
        throw InvalidArgument(std::string(exact.arity(h) > s ? "approximate" : "exact") +
                              " marginals have no entry for t=" + std::to_string(t + 1) + ", node " +
                              std::to_string(h) + ", state " + std::to_string(s));
      }
    }
  }
  L1Report report;
  report.per_t.assign(T, 0.0);
  report.per_node.assign(T, std::vector<double>(H, 0.0));
  for (int t = 0; t < T; ++t) {
    for (int h = 0; h < H; ++h) {
      const auto p = exact.at(t, h);
      const auto q = approx.at(t, h);
      double d = 0.0;
      for (std::size_t s = 0; s < p.size(); ++s) d += std::abs(p[s] - q[s]);
      report.per_node[t][h] = d;
      report.per_t[t] += d;
    }
    report.total += report.per_t[t];
  }
  return report;
}

std::optional<int> oscillation_period(std::span<const SmoothedMarginals> history,
                                      const OscillationOptions& options) {
  const int n = static_cast<int>(history.size());
  if (n < 6) return std::nullopt;
  const int burn_in = options.burn_in >= 0 ? options.burn_in : n / 2;
  for (int p = 2; p <= options.max_period; ++p) {
    if (burn_in + p >= n) break;
    bool periodic = true;
    for (int k = burn_in; k + p < n && periodic; ++k) {
      periodic = max_abs_difference(history[k], history[k + p]) <= options.match_tol;
    }
    bool moving = true;
    for (int k = burn_in; k + 1 < n && moving; ++k) {
      moving = max_abs_difference(history[k], history[k + 1]) > options.change_tol;
    }
    if (periodic && moving) return p;
  }
  return std::nullopt;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace dbn
