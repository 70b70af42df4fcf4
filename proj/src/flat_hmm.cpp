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

#include "dbn/csv.hpp"
#include "dbn/error.hpp"
#include "dbn/exact.hpp"

namespace dbn {

namespace {

// digits[s * H + h] = value of hidden node h in flat state s.
std::vector<int> digit_table(const DiscreteDbn& dbn, std::size_t num_states) {
  const int H = dbn.num_hidden();
  std::vector<int> digits(num_states * H);
  for (std::size_t s = 0; s < num_states; ++s) {
    std::size_t rest = s;
    for (int h = H - 1; h >= 0; --h) {
      digits[s * H + h] = static_cast<int>(rest % dbn.hidden_arity(h));
      rest /= dbn.hidden_arity(h);
    }
  }
  return digits;
}

// Row of the CPT of template node `node` given the hidden values of the
// previous (prev) and current (cur) slices.
std::size_t cpt_row(const DiscreteDbn& dbn, const NodeCpt& cpt, const int* prev, const int* cur) {
  std::size_t row = 0;
  for (std::size_t k = 0; k < cpt.parents.size(); ++k) {
    const ParentRef& p = cpt.parents[k];
    const int h = dbn.hidden_position(p.node);
    if (h < 0) throw InvalidArgument("flattening needs CPT parents to be hidden nodes");
    const int v = p.lag == 0 ? cur[h] : prev[h];
    row = row * cpt.table.parent_arities()[k] + v;
  }
  return row;
}

}  // namespace

std::size_t flat_state_count(const DiscreteDbn& dbn, std::size_t max_states) {
  std::size_t s = 1;
  for (int h = 0; h < dbn.num_hidden(); ++h) {
    s *= dbn.hidden_arity(h);
    if (s > max_states) {
      double full = 1.0;
      for (int g = 0; g < dbn.num_hidden(); ++g) full *= dbn.hidden_arity(g);
      throw CapExceeded("flattened HMM would have S = " + format_double(full) + " states (cap " +
                        std::to_string(max_states) + ")");
    }
  }
  return s;
}

std::vector<int> decode_flat_state(const DiscreteDbn& dbn, std::size_t state) {
  std::vector<int> values(dbn.num_hidden());
  for (int h = dbn.num_hidden() - 1; h >= 0; --h) {
    values[h] = static_cast<int>(state % dbn.hidden_arity(h));
    state /= dbn.hidden_arity(h);
  }
  return values;
}

FlatHmm flatten_to_hmm(const DiscreteDbn& dbn, std::size_t max_states, Parallelism parallelism) {
  const std::size_t S = flat_state_count(dbn, max_states);
  const int H = dbn.num_hidden();
  const std::vector<int> digits = digit_table(dbn, S);
  FlatHmm hmm;
  hmm.num_states = static_cast<int>(S);
  hmm.prior.assign(S, 1.0);
  for (std::size_t s = 0; s < S; ++s) {
    const int* cur = &digits[s * H];
    for (int h = 0; h < H; ++h) {
      const NodeCpt& cpt = dbn.prior_cpt(dbn.hidden_nodes()[h]);
      hmm.prior[s] *= cpt.table.at(cur[h], cpt_row(dbn, cpt, cur, cur));
    }
  }
  hmm.transition.assign(S * S, 1.0);
  const long long rows = static_cast<long long>(S);
  auto fill_row = [&](long long i) {
    const int* prev = &digits[i * H];
    double* out = &hmm.transition[i * S];
    for (std::size_t j = 0; j < S; ++j) {
      const int* cur = &digits[j * H];
      double p = 1.0;
      for (int h = 0; h < H; ++h) {
        const NodeCpt& cpt = dbn.transition_cpt(dbn.hidden_nodes()[h]);
        p *= cpt.table.at(cur[h], cpt_row(dbn, cpt, prev, cur));
      }
      out[j] = p;
    }
  };
  if (parallelism == Parallelism::kOpenMp) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < rows; ++i) fill_row(i);
  } else {
    for (long long i = 0; i < rows; ++i) fill_row(i);
  }
  return hmm;
}

std::vector<std::vector<double>> flat_likelihoods(const DiscreteDbn& dbn, const EvidenceSequence& evidence,
                                                  std::size_t max_states) {
  evidence.check(dbn);
  const std::size_t S = flat_state_count(dbn, max_states);
  const int H = dbn.num_hidden();
  const std::vector<int> digits = digit_table(dbn, S);
  std::vector<std::vector<double>> w(evidence.horizon(), std::vector<double>(S, 1.0));
  for (int t = 0; t < evidence.horizon(); ++t) {
    for (int o : dbn.observed_nodes()) {
      const int y = evidence.value(t, o);
      if (y == kMissing) continue;
      const NodeCpt& cpt = dbn.cpt_at(o, t);
      for (const ParentRef& p : cpt.parents) {
        if (p.lag != 0) throw InvalidArgument("observed node " + dbn.node(o).name + " has a lagged parent");
      }
      for (std::size_t s = 0; s < S; ++s) {
        const int* cur = &digits[s * H];
        w[t][s] *= cpt.table.at(y, cpt_row(dbn, cpt, cur, cur));
      }
    }
  }
  return w;
}

namespace kernels {

void predict_serial(const FlatHmm& hmm, std::span<const double> alpha, std::span<double> out) {
  const int S = hmm.num_states;
  for (int j = 0; j < S; ++j) out[j] = 0.0;
  for (int i = 0; i < S; ++i) {
    const double a = alpha[i];
    if (a == 0.0) continue;
    const double* row = &hmm.transition[static_cast<std::size_t>(i) * S];
    for (int j = 0; j < S; ++j) out[j] += a * row[j];
  }
}

void predict_parallel(const FlatHmm& hmm, std::span<const double> alpha, std::span<double> out) {
  const int S = hmm.num_states;
  constexpr int kTile = 256;
  const int tiles = (S + kTile - 1) / kTile;
  // Each tile of columns walks the rows in the serial order, so every out[j]
  // sees the same additions in the same sequence: bit-identical results.
#pragma omp parallel for schedule(static)
  for (int tile = 0; tile < tiles; ++tile) {
    const int j0 = tile * kTile;
    const int j1 = std::min(S, j0 + kTile);
    for (int j = j0; j < j1; ++j) out[j] = 0.0;
    for (int i = 0; i < S; ++i) {
      const double a = alpha[i];
      if (a == 0.0) continue;
      const double* row = &hmm.transition[static_cast<std::size_t>(i) * S];
      for (int j = j0; j < j1; ++j) out[j] += a * row[j];
    }
  }
}

void back_project_serial(const FlatHmm& hmm, std::span<const double> v, std::span<double> out) {
  const int S = hmm.num_states;
  for (int i = 0; i < S; ++i) {
    const double* row = &hmm.transition[static_cast<std::size_t>(i) * S];
    double acc = 0.0;
    for (int j = 0; j < S; ++j) acc += row[j] * v[j];
    out[i] = acc;
  }
}

void back_project_parallel(const FlatHmm& hmm, std::span<const double> v, std::span<double> out) {
  const int S = hmm.num_states;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < S; ++i) {
    const double* row = &hmm.transition[static_cast<std::size_t>(i) * S];
    double acc = 0.0;
    for (int j = 0; j < S; ++j) acc += row[j] * v[j];
    out[i] = acc;
  }
}

}  // namespace kernels

FlatSmoothing hmm_forwards_backwards(const FlatHmm& hmm, std::span<const std::vector<double>> likelihoods,
                                     Parallelism parallelism) {
  const int T = static_cast<int>(likelihoods.size());
  if (T < 1) throw InvalidArgument("forwards-backwards needs a horizon >= 1");
  const int S = hmm.num_states;
  const bool par = parallelism == Parallelism::kOpenMp;
  FlatSmoothing out;
  out.num_states = S;
  out.alpha.resize(static_cast<std::size_t>(T) * S);
  out.beta.resize(static_cast<std::size_t>(T) * S);
  out.gamma.resize(static_cast<std::size_t>(T) * S);
  auto row = [S](std::vector<double>& v, int t) {
    return std::span<double>(v.data() + static_cast<std::size_t>(t) * S, S);
  };

  std::span<double> a0 = row(out.alpha, 0);
  for (int s = 0; s < S; ++s) a0[s] = likelihoods[0][s] * hmm.prior[s];
  std::vector<double> scratch(S);
  for (int t = 0;; ++t) {
    const double z = normalize(row(out.alpha, t));
    if (!(z > 0.0)) {
      throw ZeroProbabilityEvidence("zero-probability evidence at t=" + std::to_string(t + 1));
    }
    out.log_evidence += std::log(z);
    if (t + 1 == T) break;
    std::span<double> next = row(out.alpha, t + 1);
    if (par) {
      kernels::predict_parallel(hmm, row(out.alpha, t), next);
    } else {
      kernels::predict_serial(hmm, row(out.alpha, t), next);
    }
    for (int s = 0; s < S; ++s) next[s] *= likelihoods[t + 1][s];
  }

  std::span<double> last = row(out.beta, T - 1);
  std::fill(last.begin(), last.end(), 1.0);
  normalize(last);
  for (int t = T - 2; t >= 0; --t) {
    const std::span<double> later = row(out.beta, t + 1);
    for (int s = 0; s < S; ++s) scratch[s] = likelihoods[t + 1][s] * later[s];
    if (par) {
      kernels::back_project_parallel(hmm, scratch, row(out.beta, t));
    } else {
      kernels::back_project_serial(hmm, scratch, row(out.beta, t));
    }
    normalize(row(out.beta, t));
  }
  for (std::size_t k = 0; k < out.gamma.size(); ++k) out.gamma[k] = out.alpha[k] * out.beta[k];
  for (int t = 0; t < T; ++t) normalize(row(out.gamma, t));
  return out;
}

SmoothedMarginals flat_smoother(const DiscreteDbn& dbn, const EvidenceSequence& evidence,
                                const ExactOptions& options, Parallelism parallelism) {
  const FlatHmm hmm = flatten_to_hmm(dbn, options.max_flat_states, parallelism);
  const auto w = flat_likelihoods(dbn, evidence, options.max_flat_states);
  const FlatSmoothing fb = hmm_forwards_backwards(hmm, w, parallelism);
  const int H = dbn.num_hidden();
  const std::vector<int> digits = digit_table(dbn, hmm.num_states);
  SmoothedMarginals out = SmoothedMarginals::for_model(dbn, evidence.horizon());
  for (int t = 0; t < evidence.horizon(); ++t) {
    for (int s = 0; s < hmm.num_states; ++s) {
      const double g = fb.gamma[static_cast<std::size_t>(t) * hmm.num_states + s];
      for (int h = 0; h < H; ++h) out.at(t, h)[digits[static_cast<std::size_t>(s) * H + h]] += g;
    }
  }
  out.log_evidence = fb.log_evidence;
  return out;
}

}  // namespace dbn
