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

#include "dbn/factor.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "dbn/error.hpp"

namespace dbn {

namespace {

std::vector<std::size_t> strides_of(const std::vector<int>& cards) {
  std::vector<std::size_t> strides(cards.size(), 1);
  for (int k = static_cast<int>(cards.size()) - 2; k >= 0; --k) strides[k] = strides[k + 1] * cards[k + 1];
  return strides;
}

}  // namespace

Factor::Factor(std::vector<int> vars, std::vector<int> cards, std::vector<double> values)
    : vars_(std::move(vars)), cards_(std::move(cards)), values_(std::move(values)) {
  if (vars_.size() != cards_.size()) throw InvalidArgument("factor scope and cardinalities differ in length");
  std::size_t n = 1;
  for (int c : cards_) n *= static_cast<std::size_t>(c);
  if (values_.size() != n) throw InvalidArgument("factor table size does not match its scope");
  std::set<int> unique(vars_.begin(), vars_.end());
  if (unique.size() != vars_.size()) throw InvalidArgument("factor scope repeats a variable");
}

bool Factor::contains(int var) const { return std::find(vars_.begin(), vars_.end(), var) != vars_.end(); }

int Factor::card_of(int var) const {
  auto it = std::find(vars_.begin(), vars_.end(), var);
  return it == vars_.end() ? 0 : cards_[it - vars_.begin()];
}

double Factor::total() const {
  double sum = 0.0;
  for (double v : values_) sum += v;
  return sum;
}

double Factor::normalize() {
  const double sum = total();
  if (sum > 0.0) {
    for (double& v : values_) v /= sum;
  }
  return sum;
}

std::size_t joint_size(const Factor& a, const Factor& b) {
  std::size_t n = a.size();
  for (std::size_t k = 0; k < b.vars().size(); ++k) {
    if (!a.contains(b.vars()[k])) n *= b.cards()[k];
  }
  return n;
}

Factor Factor::product(const Factor& other) const {
  std::vector<int> vars = vars_;
  std::vector<int> cards = cards_;
  for (std::size_t k = 0; k < other.vars_.size(); ++k) {
    if (!contains(other.vars_[k])) {
      vars.push_back(other.vars_[k]);
      cards.push_back(other.cards_[k]);
    }
  }
  const auto sa_own = strides_of(cards_);
  const auto sb_own = strides_of(other.cards_);
  std::vector<std::size_t> sa(vars.size(), 0);
  std::vector<std::size_t> sb(vars.size(), 0);
  for (std::size_t k = 0; k < vars.size(); ++k) {
    for (std::size_t j = 0; j < vars_.size(); ++j) {
      if (vars_[j] == vars[k]) sa[k] = sa_own[j];
    }
    for (std::size_t j = 0; j < other.vars_.size(); ++j) {
      if (other.vars_[j] == vars[k]) sb[k] = sb_own[j];
    }
  }
  std::size_t n = 1;
  for (int c : cards) n *= c;
  std::vector<double> values(n);
  std::vector<int> assign(vars.size(), 0);
  std::size_t ia = 0;
  std::size_t ib = 0;
  for (std::size_t idx = 0; idx < n; ++idx) {
    values[idx] = values_[ia] * other.values_[ib];
    for (int k = static_cast<int>(vars.size()) - 1; k >= 0; --k) {
      ia += sa[k];
      ib += sb[k];
      if (++assign[k] < cards[k]) break;
      ia -= sa[k] * cards[k];
      ib -= sb[k] * cards[k];
      assign[k] = 0;
    }
  }
  return Factor(std::move(vars), std::move(cards), std::move(values));
}

Factor Factor::marginal(std::span<const int> keep) const {
  std::vector<int> cards;
  for (int v : keep) {
    const int c = card_of(v);
    if (c == 0) throw InvalidArgument("marginal onto a variable outside the factor scope");
    cards.push_back(c);
  }
  const auto out_strides = strides_of(cards);
  std::vector<std::size_t> so(vars_.size(), 0);
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    for (std::size_t k = 0; k < keep.size(); ++k) {
      if (keep[k] == vars_[j]) so[j] = out_strides[k];
    }
  }
  std::size_t n = 1;
  for (int c : cards) n *= c;
  std::vector<double> values(n, 0.0);
  std::vector<int> assign(vars_.size(), 0);
  std::size_t io = 0;
  for (std::size_t idx = 0; idx < values_.size(); ++idx) {
    values[io] += values_[idx];
    for (int k = static_cast<int>(vars_.size()) - 1; k >= 0; --k) {
      io += so[k];
      if (++assign[k] < cards_[k]) break;
      io -= so[k] * cards_[k];
      assign[k] = 0;
    }
  }
  return Factor(std::vector<int>(keep.begin(), keep.end()), std::move(cards), std::move(values));
}

Factor Factor::sum_out(int var) const {
  std::vector<int> keep;
  for (int v : vars_) {
    if (v != var) keep.push_back(v);
  }
  return marginal(keep);
}

std::vector<int> min_fill_order(std::vector<std::vector<int>> adjacency, const std::vector<bool>& eliminable) {
  const int n = static_cast<int>(adjacency.size());
  std::vector<std::set<int>> adj(n);
  for (int v = 0; v < n; ++v) adj[v].insert(adjacency[v].begin(), adjacency[v].end());
  std::vector<bool> done(n, false);
  std::vector<int> order;
  for (;;) {
    int best = -1;
    std::size_t best_fill = 0;
    for (int v = 0; v < n; ++v) {
      if (done[v] || !eliminable[v]) continue;
      std::size_t fill = 0;
      for (auto a = adj[v].begin(); a != adj[v].end(); ++a) {
        for (auto b = std::next(a); b != adj[v].end(); ++b) {
          if (!adj[*a].count(*b)) ++fill;
        }
      }
      if (best < 0 || fill < best_fill) {
        best = v;
        best_fill = fill;
      }
    }
    if (best < 0) break;
    for (int a : adj[best]) {
      for (int b : adj[best]) {
        if (a != b) adj[a].insert(b);
      }
      adj[a].erase(best);
    }
    adj[best].clear();
    done[best] = true;
    order.push_back(best);
  }
  return order;
}

Factor eliminate_to(std::vector<Factor> factors, std::span<const int> query,
                    const EliminationOptions& options) {
  // Dense relabelling of the variables that appear.
  std::map<int, int> dense;
  std::vector<int> ids;
  std::map<int, int> cards;
  for (const Factor& f : factors) {
    for (std::size_t k = 0; k < f.vars().size(); ++k) {
      if (dense.emplace(f.vars()[k], static_cast<int>(ids.size())).second) ids.push_back(f.vars()[k]);
      cards[f.vars()[k]] = f.cards()[k];
    }
  }
  for (int q : query) {
    if (!dense.count(q)) throw InvalidArgument("query variable " + std::to_string(q) + " appears in no factor");
  }
  const int n = static_cast<int>(ids.size());
  std::vector<std::vector<int>> adjacency(n);
  for (const Factor& f : factors) {
    for (int a : f.vars()) {
      for (int b : f.vars()) {
        if (a != b) adjacency[dense[a]].push_back(dense[b]);
      }
    }
  }
  // Order by original id so ties go to the lowest variable id.
  std::vector<int> by_id(n);
  for (int i = 0; i < n; ++i) by_id[i] = i;
  std::sort(by_id.begin(), by_id.end(), [&](int a, int b) { return ids[a] < ids[b]; });
  std::vector<int> rank(n);
  for (int r = 0; r < n; ++r) rank[by_id[r]] = r;
  std::vector<std::vector<int>> ranked(n);
  std::vector<bool> eliminable(n, true);
  for (int v = 0; v < n; ++v) {
    for (int u : adjacency[v]) ranked[rank[v]].push_back(rank[u]);
  }
  for (int q : query) eliminable[rank[dense[q]]] = false;
  const std::vector<int> order = min_fill_order(std::move(ranked), eliminable);

  auto check_cap = [&](const std::vector<int>& scope, std::size_t entries) {
    if (entries > options.max_factor_entries) {
      std::ostringstream msg;
      msg << "variable elimination needs an intermediate factor over {";
      for (std::size_t k = 0; k < scope.size(); ++k) msg << (k ? "," : "") << scope[k];
      msg << "} with " << entries << " entries (cap " << options.max_factor_entries << ")";
      throw CapExceeded(msg.str());
    }
  };

  for (int r : order) {
    const int var = ids[by_id[r]];
    std::vector<Factor> touching;
    std::vector<Factor> rest;
    for (Factor& f : factors) (f.contains(var) ? touching : rest).push_back(std::move(f));
    std::set<int> scope;
    std::size_t entries = 1;
    for (const Factor& f : touching) {
      for (int v : f.vars()) {
        if (scope.insert(v).second) entries *= cards[v];
      }
    }
    check_cap(std::vector<int>(scope.begin(), scope.end()), entries);
    Factor merged;
    for (const Factor& f : touching) merged = merged.product(f);
    rest.push_back(merged.sum_out(var));
    factors = std::move(rest);
  }
  Factor result;
  for (const Factor& f : factors) {
    check_cap(result.vars(), joint_size(result, f));
    result = result.product(f);
  }
  return result.marginal(query);
}

}  // namespace dbn
