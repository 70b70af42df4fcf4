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
#include <sstream>

#include "dbn/error.hpp"
#include "dbn/exact.hpp"

namespace dbn {

namespace {

// Factor ids: hidden h of slice t-1 is h, of slice t is H + h.
Factor cpt_factor(const DiscreteDbn& dbn, int h, CptRole role) {
  const int H = dbn.num_hidden();
  const NodeCpt& cpt = dbn.cpt(dbn.hidden_nodes()[h], role);
  std::vector<int> vars;
  std::vector<int> cards;
  for (std::size_t k = 0; k < cpt.parents.size(); ++k) {
    const int ph = dbn.hidden_position(cpt.parents[k].node);
    vars.push_back(cpt.parents[k].lag == 1 ? ph : H + ph);
    cards.push_back(cpt.table.parent_arities()[k]);
  }
  vars.push_back(H + h);
  cards.push_back(dbn.hidden_arity(h));
  return Factor(std::move(vars), std::move(cards), cpt.table.values());
}

Factor evidence_factor(int var, std::span<const double> w) {
  return Factor({var}, {static_cast<int>(w.size())}, std::vector<double>(w.begin(), w.end()));
}

// Renames slice-t ids (H + h) to slice-(t-1) ids (h) and orders them 0..H-1.
Factor shift_to_previous(const Factor& f, int H) {
  std::vector<int> vars = f.vars();
  for (int& v : vars) v -= H;
  Factor shifted(std::move(vars), f.cards(), f.values());
  std::vector<int> canonical(H);
  for (int h = 0; h < H; ++h) canonical[h] = h;
  return shifted.marginal(canonical);
}

Factor ones_factor(int var, int card) {
  return Factor({var}, {card}, std::vector<double>(card, 1.0));
}

}  // namespace

FrontierSchedule choose_frontier_schedule(const DiscreteDbn& dbn) {
  const RegularityReport report = validate_regular(dbn);
  if (!report.ok()) throw InvalidArgument("frontier schedule needs a regular DBN: " + report.violations.front());
  const int H = dbn.num_hidden();
  // Children (in slice t) and parents (in slice t-1) by hidden position.
  std::vector<std::vector<int>> children(H);
  std::vector<std::vector<int>> parents(H);
  for (int h = 0; h < H; ++h) {
    for (const ParentRef& p : dbn.transition_cpt(dbn.hidden_nodes()[h]).parents) {
      const int ph = dbn.hidden_position(p.node);
      parents[h].push_back(ph);
      children[ph].push_back(h);
    }
  }
  std::vector<bool> prev_member(H, true);
  std::vector<bool> added(H, false);
  int members = H;
  std::size_t entries = 1;
  for (int h = 0; h < H; ++h) entries *= dbn.hidden_arity(h);

  FrontierSchedule schedule;
  schedule.max_members = members;
  schedule.max_entries = entries;
  int remaining = 2 * H;
  while (remaining > 0) {
    int remove = -1;
    for (int h = 0; h < H && remove < 0; ++h) {
      if (!prev_member[h]) continue;
      const bool ready = std::all_of(children[h].begin(), children[h].end(), [&](int c) { return added[c]; });
      if (ready) remove = h;
    }
    if (remove >= 0) {
      prev_member[remove] = false;
      --members;
      entries /= dbn.hidden_arity(remove);
      schedule.actions.push_back({FrontierAction::Kind::kRemove, remove, members, entries});
      --remaining;
      continue;
    }
    int add = -1;
    for (int h = 0; h < H; ++h) {
      if (added[h]) continue;
      const bool ready = std::all_of(parents[h].begin(), parents[h].end(), [&](int p) { return prev_member[p]; });
      if (ready && (add < 0 || dbn.hidden_arity(h) < dbn.hidden_arity(add))) add = h;
    }
    if (add < 0) throw InvalidArgument("frontier schedule is stuck; the model is not a regular DBN");
    added[add] = true;
    ++members;
    entries *= dbn.hidden_arity(add);
    schedule.actions.push_back({FrontierAction::Kind::kAdd, add, members, entries});
    schedule.max_members = std::max(schedule.max_members, members);
    schedule.max_entries = std::max(schedule.max_entries, entries);
    --remaining;
  }
  return schedule;
}

std::string frontier_trace(const DiscreteDbn& dbn, const FrontierSchedule& schedule, int horizon) {
  std::ostringstream out;
  for (int t = 2; t <= horizon; ++t) {
    for (const FrontierAction& a : schedule.actions) {
      const bool add = a.kind == FrontierAction::Kind::kAdd;
      out << "slice " << t << ": " << (add ? '+' : '-') << dbn.node(dbn.hidden_nodes()[a.hidden]).name
          << "@" << (add ? t : t - 1) << " (frontier size " << a.members_after << ")\n";
    }
  }
  return out.str();
}

SmoothedMarginals frontier_smoother(const DiscreteDbn& dbn, const EvidenceSequence& evidence,
                                    const ExactOptions& options) {
  require_inference_ready(dbn);
  const FrontierSchedule schedule = choose_frontier_schedule(dbn);
  if (schedule.max_entries > options.max_frontier_entries) {
    std::ostringstream msg;
    msg << "largest frontier has " << schedule.max_members << " members and " << schedule.max_entries
        << " joint entries (cap " << options.max_frontier_entries << ")";
    throw CapExceeded(msg.str());
  }
  const NodeLikelihoods w(dbn, evidence);
  const int H = dbn.num_hidden();
  const int T = evidence.horizon();
  double log_evidence = 0.0;
  auto accumulate = [&](Factor& f, int t) {
    const double z = f.normalize();
    if (!(z > 0.0)) throw ZeroProbabilityEvidence("zero-probability evidence at t=" + std::to_string(t + 1));
    log_evidence += std::log(z);
  };

  std::vector<Factor> transition_cpts;
  for (int h = 0; h < H; ++h) transition_cpts.push_back(cpt_factor(dbn, h, CptRole::kTransition));

  // Forward sweep. alpha[t] is the exact filtered joint over slice t.
  std::vector<Factor> alpha(T);
  {
    Factor f;
    for (int h = 0; h < H; ++h) {
      f = f.product(cpt_factor(dbn, h, CptRole::kPrior));
      accumulate(f, 0);
    }
    for (int h = 0; h < H; ++h) f = f.product(evidence_factor(H + h, w.at(0, h)));
    accumulate(f, 0);
    alpha[0] = shift_to_previous(f, H);
  }
  for (int t = 1; t < T; ++t) {
    Factor f = alpha[t - 1];
    for (const FrontierAction& a : schedule.actions) {
      if (a.kind == FrontierAction::Kind::kAdd) {
        f = f.product(transition_cpts[a.hidden]);
      } else {
        f = f.sum_out(a.hidden);
      }
      accumulate(f, t);
    }
    for (int h = 0; h < H; ++h) f = f.product(evidence_factor(H + h, w.at(t, h)));
    accumulate(f, t);
    alpha[t] = shift_to_previous(f, H);
  }

  // Backward sweep: the schedule run in reverse, so the member sets match the
  // forward ones step for step.
  std::vector<Factor> beta(T);
  {
    Factor ones;
    for (int h = 0; h < H; ++h) ones = ones.product(ones_factor(h, dbn.hidden_arity(h)));
    ones.normalize();
    beta[T - 1] = ones;
  }
  for (int t = T - 1; t >= 1; --t) {
    std::vector<int> vars = beta[t].vars();
    for (int& v : vars) v += H;
    Factor g(std::move(vars), beta[t].cards(), beta[t].values());
    for (int h = 0; h < H; ++h) g = g.product(evidence_factor(H + h, w.at(t, h)));
    g.normalize();
    for (auto it = schedule.actions.rbegin(); it != schedule.actions.rend(); ++it) {
      if (it->kind == FrontierAction::Kind::kRemove) {
        g = g.product(ones_factor(it->hidden, dbn.hidden_arity(it->hidden)));
      } else {
        g = g.product(transition_cpts[it->hidden]).sum_out(H + it->hidden);
      }
      if (!(g.normalize() > 0.0)) {
        throw ZeroProbabilityEvidence("zero-probability evidence after t=" + std::to_string(t + 1));
      }
    }
    std::vector<int> canonical(H);
    for (int h = 0; h < H; ++h) canonical[h] = h;
    beta[t - 1] = g.marginal(canonical);
  }

  SmoothedMarginals out = SmoothedMarginals::for_model(dbn, T);
  for (int t = 0; t < T; ++t) {
    Factor joint = alpha[t].product(beta[t]);
    joint.normalize();
    for (int h = 0; h < H; ++h) {
      const int var[1] = {h};
      const Factor m = joint.marginal(var);
      std::copy(m.values().begin(), m.values().end(), out.at(t, h).begin());
    }
  }
  out.log_evidence = log_evidence;
  return out;
}

}  // namespace dbn
