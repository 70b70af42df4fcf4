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

#include "dbn/lbp.hpp"

#include <algorithm>
#include <cmath>

#include "dbn/csv.hpp"
#include "dbn/error.hpp"
#include "dbn/metrics.hpp"

namespace dbn {

namespace {

// Normalizes in place; an all-zero (or non-finite) vector becomes uniform and
// counts as an event.
void normalize_or_uniform(std::vector<double>& v, long& events) {
  double sum = 0.0;
  for (double x : v) sum += x;
  if (sum > 0.0 && std::isfinite(sum)) {
    for (double& x : v) x /= sum;
    return;
  }
  ++events;
  std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
}

// Advances a mixed-radix odometer (last digit fastest).
inline void advance(std::vector<int>& digits, const std::vector<int>& radix) {
  for (int k = static_cast<int>(digits.size()) - 1; k >= 0; --k) {
    if (++digits[k] < radix[k]) return;
    digits[k] = 0;
  }
}

}  // namespace

void LbpConfig::validate() const {
  if (!(damping >= 0.0 && damping <= 1.0)) throw InvalidArgument("damping must lie in [0, 1]");
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
  if (!(convergence_tol >= 0.0)) throw InvalidArgument("convergence_tol must be >= 0");
}

MessageStore::MessageStore(const Network& net) {
  pi_.resize(net.num_edges());
  lambda_.resize(net.num_edges());
  for (int e = 0; e < net.num_edges(); ++e) {
    const int a = net.node(net.edge(e).parent).arity;
    pi_[e].assign(a, 1.0 / a);
    lambda_[e].assign(a, 1.0 / a);
  }
}

FixedPointCheck detect_fixed_point(const MessageStore& before, const MessageStore& after, double tol) {
  if (before.num_edges() != after.num_edges()) {
    throw InvalidArgument("message stores cover different edge sets");
  }
  double delta = 0.0;
  for (int e = 0; e < before.num_edges(); ++e) {
    for (std::size_t s = 0; s < before.pi(e).size(); ++s) {
      delta = std::max(delta, std::abs(before.pi(e)[s] - after.pi(e)[s]));
      delta = std::max(delta, std::abs(before.lambda(e)[s] - after.lambda(e)[s]));
    }
  }
  return {delta < tol, delta};
}

std::vector<double> damp_message(std::span<const double> old_message, std::span<const double> computed,
                                 double damping) {
  if (damping == 0.0) return {computed.begin(), computed.end()};
  if (damping == 1.0) return {old_message.begin(), old_message.end()};
  std::vector<double> out(computed.size());
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = (1.0 - damping) * computed[s] + damping * old_message[s];
  normalize(out);
  return out;
}

LbpEngine::LbpEngine(const Network& net, std::vector<std::vector<double>> local_evidence)
    : net_(net), local_(std::move(local_evidence)), store_(net) {
  if (static_cast<int>(local_.size()) != net.num_nodes()) {
    throw InvalidArgument("local evidence does not cover every network node");
  }
}

std::vector<double> LbpEngine::node_pi(const MessageStore& store, int id) const {
  const NetworkNode& node = net_.node(id);
  const ConditionalTable& cpt = *node.cpt;
  const auto& in = net_.in_edges(id);
  std::vector<double> pi(node.arity, 0.0);
  std::vector<int> digits(in.size(), 0);
  for (std::size_t r = 0; r < cpt.num_configs(); ++r) {
    double weight = 1.0;
    for (std::size_t k = 0; k < in.size(); ++k) weight *= store.pi(in[k])[digits[k]];
    if (weight != 0.0) {
      const auto row = cpt.row(r);
      for (int x = 0; x < node.arity; ++x) pi[x] += weight * row[x];
    }
    advance(digits, cpt.parent_arities());
  }
  return pi;
}

std::vector<double> LbpEngine::node_lambda(const MessageStore& store, int id, int skip) const {
  std::vector<double> lambda = local_[id];
  for (int e : net_.out_edges(id)) {
    if (e == skip) continue;
    const auto& msg = store.lambda(e);
    for (std::size_t x = 0; x < lambda.size(); ++x) lambda[x] *= msg[x];
  }
  return lambda;
}

void LbpEngine::emit_pi(const MessageStore& from, MessageStore& to, int id, double damping, long& events) const {
  const auto& out = net_.out_edges(id);
  if (out.empty()) return;
  const std::vector<double> pi = node_pi(from, id);
  for (int e : out) {
    std::vector<double> msg = node_lambda(from, id, e);
    for (std::size_t x = 0; x < msg.size(); ++x) msg[x] *= pi[x];
    normalize_or_uniform(msg, events);
    to.pi(e) = damp_message(from.pi(e), msg, damping);
  }
}

void LbpEngine::emit_lambda(const MessageStore& from, MessageStore& to, int id, double damping,
                            long& events) const {
  const auto& in = net_.in_edges(id);
  if (in.empty()) return;
  const NetworkNode& node = net_.node(id);
  const ConditionalTable& cpt = *node.cpt;
  const std::vector<double> lambda = node_lambda(from, id, -1);
  const std::size_t n = in.size();
  std::vector<std::vector<double>> msgs(n);
  for (std::size_t k = 0; k < n; ++k) msgs[k].assign(cpt.parent_arities()[k], 0.0);
  std::vector<int> digits(n, 0);
  std::vector<double> prefix(n + 1);
  std::vector<double> suffix(n + 1);
  for (std::size_t r = 0; r < cpt.num_configs(); ++r) {
    const auto row = cpt.row(r);
    double w = 0.0;
    for (int x = 0; x < node.arity; ++x) w += lambda[x] * row[x];
    if (w != 0.0) {
      prefix[0] = 1.0;
      for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] * from.pi(in[k])[digits[k]];
      suffix[n] = 1.0;
      for (std::size_t k = n; k-- > 0;) suffix[k] = suffix[k + 1] * from.pi(in[k])[digits[k]];
      for (std::size_t k = 0; k < n; ++k) msgs[k][digits[k]] += w * prefix[k] * suffix[k + 1];
    }
    advance(digits, cpt.parent_arities());
  }
  for (std::size_t k = 0; k < n; ++k) {
    normalize_or_uniform(msgs[k], events);
    to.lambda(in[k]) = damp_message(from.lambda(in[k]), msgs[k], damping);
  }
}

std::vector<double> LbpEngine::compute_pi_message(int edge) const {
  const int id = net_.edge(edge).parent;
  MessageStore scratch = store_;
  long events = 0;
  emit_pi(store_, scratch, id, 0.0, events);
  return scratch.pi(edge);
}

std::vector<double> LbpEngine::compute_lambda_message(int edge) const {
  const int id = net_.edge(edge).child;
  MessageStore scratch = store_;
  long events = 0;
  emit_lambda(store_, scratch, id, 0.0, events);
  return scratch.lambda(edge);
}

void LbpEngine::send_pi_message(int edge, double damping) {
  std::vector<double> computed = compute_pi_message(edge);
  store_.pi(edge) = damp_message(store_.pi(edge), computed, damping);
}

void LbpEngine::send_lambda_message(int edge, double damping) {
  std::vector<double> computed = compute_lambda_message(edge);
  store_.lambda(edge) = damp_message(store_.lambda(edge), computed, damping);
}

double LbpEngine::iterate(Schedule schedule, double damping, Parallelism parallelism) {
  const MessageStore before = store_;
  const int n = net_.num_nodes();
  if (schedule == Schedule::kForwardBackward) {
    for (int id = 0; id < n; ++id) emit_pi(store_, store_, id, damping, zero_events_);
    for (int id = n - 1; id >= 0; --id) emit_lambda(store_, store_, id, damping, zero_events_);
  } else {
    MessageStore next = store_;
    long events = 0;
    if (parallelism == Parallelism::kOpenMp) {
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : events)
      for (int id = 0; id < n; ++id) {
        emit_pi(store_, next, id, damping, events);
        emit_lambda(store_, next, id, damping, events);
      }
    } else {
      for (int id = 0; id < n; ++id) {
        emit_pi(store_, next, id, damping, events);
        emit_lambda(store_, next, id, damping, events);
      }
    }
    zero_events_ += events;
    store_ = std::move(next);
  }
  return detect_fixed_point(before, store_, 0.0).max_delta;
}

BeliefSet LbpEngine::beliefs() const {
  BeliefSet out;
  const int n = net_.num_nodes();
  out.node.resize(n);
  out.family.resize(n);
  long events = 0;
  for (int id = 0; id < n; ++id) {
    const NetworkNode& node = net_.node(id);
    const ConditionalTable& cpt = *node.cpt;
    const std::vector<double> lambda = node_lambda(store_, id, -1);
    std::vector<double> b = node_pi(store_, id);
    for (int x = 0; x < node.arity; ++x) b[x] *= lambda[x];
    normalize_or_uniform(b, events);
    out.node[id] = std::move(b);

    const auto& in = net_.in_edges(id);
    std::vector<double> fam(cpt.values().size());
    std::vector<int> digits(in.size(), 0);
    for (std::size_t r = 0; r < cpt.num_configs(); ++r) {
      double weight = 1.0;
      for (std::size_t k = 0; k < in.size(); ++k) weight *= store_.pi(in[k])[digits[k]];
      const auto row = cpt.row(r);
      for (int x = 0; x < node.arity; ++x) fam[r * node.arity + x] = weight * row[x] * lambda[x];
      advance(digits, cpt.parent_arities());
    }
    normalize_or_uniform(fam, events);
    out.family[id] = std::move(fam);
  }
  return out;
}

SmoothedMarginals LbpEngine::readout(const std::vector<std::vector<double>>& node_beliefs) const {
  SmoothedMarginals out(net_.horizon(), net_.hidden_arities());
  for (int t = 0; t < net_.horizon(); ++t) {
    for (int h = 0; h < net_.num_hidden(); ++h) {
      const Network::Readout& r = net_.readout(t, h);
      const auto& b = node_beliefs[r.node];
      const int a = net_.hidden_arities()[h];
      auto m = out.at(t, h);
      for (std::size_t s = 0; s < b.size(); ++s) m[(s / r.stride) % a] += b[s];
    }
  }
  return out;
}

SmoothedMarginals LbpEngine::marginals() const {
  const int n = net_.num_nodes();
  std::vector<std::vector<double>> node_beliefs(n);
  long events = 0;
  for (int id = 0; id < n; ++id) {
    std::vector<double> b = node_pi(store_, id);
    const std::vector<double> lambda = node_lambda(store_, id, -1);
    for (std::size_t x = 0; x < b.size(); ++x) b[x] *= lambda[x];
    normalize_or_uniform(b, events);
    node_beliefs[id] = std::move(b);
  }
  return readout(node_beliefs);
}

LbpResult lbp_smoother(const Network& net, const DiscreteDbn& dbn, const EvidenceSequence& evidence,
                       const LbpConfig& config, const LbpRunOptions& options) {
  config.validate();
  if (evidence.horizon() != net.horizon()) {
    throw InvalidArgument("evidence horizon " + std::to_string(evidence.horizon()) +
                          " does not match the network horizon " + std::to_string(net.horizon()));
  }
  LbpEngine engine(net, net.local_evidence(NodeLikelihoods(dbn, evidence)));
  LbpResult result;
  for (int it = 1; it <= config.max_iterations; ++it) {
    IterationRecord record;
    record.iteration = it;
    record.max_delta = engine.iterate(config.schedule, config.damping, options.parallelism);
    result.iterations = it;
    if (options.reference || options.record_history) {
      SmoothedMarginals m = engine.marginals();
      if (options.reference) {
        const L1Report l1 = l1_error(*options.reference, m);
        record.l1_total = l1.total;
        record.l1_per_t = l1.per_t;
      }
      if (options.record_history) result.history.push_back(std::move(m));
    }
    result.trace.push_back(std::move(record));
    if (result.trace.back().max_delta < config.convergence_tol) {
      result.converged = true;
      break;
    }
  }
  result.marginals = engine.marginals();
  result.zero_message_events = engine.zero_message_events();
  result.store = engine.store();
  return result;
}

SmoothedMarginals local_evidence_marginals(const Network& net, const DiscreteDbn& dbn,
                                           const EvidenceSequence& evidence) {
  const auto local = net.local_evidence(NodeLikelihoods(dbn, evidence));
  SmoothedMarginals out(net.horizon(), net.hidden_arities());
  for (int t = 0; t < net.horizon(); ++t) {
    for (int h = 0; h < net.num_hidden(); ++h) {
      const Network::Readout& r = net.readout(t, h);
      const NetworkNode& node = net.node(r.node);
      const ConditionalTable& cpt = *node.cpt;
      // Uniform parent messages: average the CPT rows.
      std::vector<double> b(node.arity, 0.0);
      for (std::size_t row = 0; row < cpt.num_configs(); ++row) {
        for (int x = 0; x < node.arity; ++x) b[x] += cpt.at(x, row);
      }
      for (int x = 0; x < node.arity; ++x) b[x] *= local[r.node][x];
      normalize(b);
      const int a = net.hidden_arities()[h];
      auto m = out.at(t, h);
      for (int s = 0; s < node.arity; ++s) m[(s / r.stride) % a] += b[s];
    }
  }
  return out;
}

std::string trace_to_csv(std::span<const IterationRecord> trace) {
  std::size_t width = 0;
  for (const auto& r : trace) width = std::max(width, r.l1_per_t.size());
  std::string out = "iteration,max_message_delta,l1_error_total";
  for (std::size_t t = 0; t < width; ++t) out += ",l1_t" + std::to_string(t + 1);
  out += '\n';
  for (const auto& r : trace) {
    out += std::to_string(r.iteration) + "," + format_double(r.max_delta) + ",";
    if (r.l1_total) out += format_double(*r.l1_total);
    for (std::size_t t = 0; t < width; ++t) {
      out += ',';
      if (t < r.l1_per_t.size()) out += format_double(r.l1_per_t[t]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace dbn
