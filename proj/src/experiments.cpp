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

#include "dbn/experiments.hpp"

#include <chrono>
#include <cstring>
#include <map>
#include <sstream>

#include "dbn/csv.hpp"
#include "dbn/error.hpp"
#include "dbn/rng.hpp"
#include "dbn/network.hpp"

namespace dbn {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

int parse_positive(const std::string& text, const std::string& what, const std::string& spec) {
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || value < 1) {
    throw InvalidArgument("model spec '" + spec + "': " + what + " must be a positive integer");
  }
  return value;
}

}  // namespace

ModelSpec ModelSpec::parse(const std::string& text) {
  const auto parts = split(text, ':');
  ModelSpec spec;
  if (parts.size() == 1 && parts[0] == "water") {
    spec.kind = Kind::kWater;
    spec.num_chains = 8;
    spec.arity = 2;
    return spec;
  }
  if (parts.size() == 3 && (parts[0] == "chmm" || parts[0] == "factorial")) {
    spec.kind = parts[0] == "chmm" ? Kind::kChmm : Kind::kFactorial;
    spec.num_chains = parse_positive(parts[1], "N", text);
    spec.arity = parse_positive(parts[2], "Q", text);
    if (spec.arity < 2) throw InvalidArgument("model spec '" + text + "': Q must be >= 2");
    return spec;
  }
  throw InvalidArgument("unknown model spec '" + text + "'; expected chmm:N:Q, factorial:N:Q or water");
}

std::string ModelSpec::name() const {
  switch (kind) {
    case Kind::kWater:
      return "water";
    case Kind::kFactorial:
      return "factorial:" + std::to_string(num_chains) + ":" + std::to_string(arity);
    case Kind::kChmm:
      break;
  }
  return "chmm:" + std::to_string(num_chains) + ":" + std::to_string(arity);
}

DiscreteDbn ModelSpec::build(std::uint64_t seed, const BuildOptions& options) const {
  switch (kind) {
    case Kind::kWater:
      return build_water_network(seed, options);
    case Kind::kFactorial:
      return build_factorial_hmm(num_chains, arity, seed, options);
    case Kind::kChmm:
      break;
  }
  return build_chmm(num_chains, arity, seed, options);
}

std::string AlgorithmRun::label() const {
  std::string tag = algorithm;
  if (algorithm == "bk" || algorithm == "iterated-bk") {
    if (clusters == "whole-slice") {
      tag += "-whole-slice";
    } else if (clusters != "per-node") {
      tag += "-custom";
    }
  }
  if (iterative()) {
    tag += "-k" + std::to_string(iterations);
    if (damping != 0.0) tag += "-mu" + format_double(damping);
    if (schedule == Schedule::kFlooding) tag += "-flood";
  }
  return tag;
}

void AlgorithmRun::validate() const {
  if (algorithm != "exact" && algorithm != "ff" && algorithm != "bk" && !iterative()) {
    throw InvalidArgument("unknown algorithm '" + algorithm + "'; expected exact, ff, bk, lbp or iterated-bk");
  }
  LbpConfig config;
  config.max_iterations = iterations;
  config.damping = damping;
  config.validate();
}

SmoothedMarginals exact_smoother(const DiscreteDbn& dbn, const EvidenceSequence& evidence,
                                 const ExactOptions& options) {
  bool flat_fits = true;
  try {
    flat_state_count(dbn, options.max_flat_states);
  } catch (const CapExceeded&) {
    flat_fits = false;
  }
  if (flat_fits) return flat_smoother(dbn, evidence, options);
  return frontier_smoother(dbn, evidence, options);
}

SmootherOutput run_smoother(const DiscreteDbn& dbn, const EvidenceSequence& evidence, const AlgorithmRun& run,
                            const SmootherOptions& options) {
  run.validate();
  SmootherOutput out;
  if (run.algorithm == "exact") {
    out.marginals = exact_smoother(dbn, evidence, options.exact);
    return out;
  }
  if (run.algorithm == "ff") {
    ApproxBeliefTrajectory traj = ff_trajectory(dbn, evidence);
    out.marginals = std::move(traj.marginals);
    out.zero_normalizer_events = traj.zero_normalizer_events;
    return out;
  }
  const ClusterSpec clusters = ClusterSpec::parse(run.clusters, dbn);
  if (run.algorithm == "bk") {
    EliminationOptions elim;
    elim.max_factor_entries = options.caps.max_table_entries;
    ApproxBeliefTrajectory traj = bk_trajectory(dbn, evidence, clusters, elim);
    out.marginals = std::move(traj.marginals);
    out.zero_normalizer_events = traj.zero_normalizer_events;
    return out;
  }

  const Network net = run.algorithm == "lbp" ? unrolled_network(dbn, evidence.horizon())
                                             : build_bk_graph(dbn, evidence.horizon(), clusters, options.caps);
  LbpConfig config;
  config.schedule = run.algorithm == "lbp" ? run.schedule : Schedule::kForwardBackward;
  config.max_iterations = run.iterations;
  config.damping = run.damping;
  config.convergence_tol = options.convergence_tol;
  LbpRunOptions lbp_options;
  lbp_options.reference = options.reference;
  lbp_options.record_history = options.record_history;
  lbp_options.parallelism = options.parallelism;
  LbpResult result = lbp_smoother(net, dbn, evidence, config, lbp_options);

  if (options.check_fixed_point) {
    LbpEngine check(net, net.local_evidence(NodeLikelihoods(dbn, evidence)));
    check.set_store(result.store);
    out.undamped_resweep_delta = check.iterate(config.schedule, 0.0, options.parallelism);
  }

  out.marginals = result.marginals;
  out.zero_normalizer_events = result.zero_message_events;
  out.lbp = std::move(result);
  return out;
}

EvidenceSequence sample_experiment_evidence(const DiscreteDbn& dbn, int horizon, std::uint64_t seed) {
  Rng rng(seed, "evidence");
  return sample_evidence(dbn, horizon, rng);
}

ErrorExperimentResult run_error_experiment(const ErrorExperimentConfig& config) {
  for (const auto& run : config.algorithms) run.validate();
  const int num_seeds = static_cast<int>(config.seeds.size());
  const int num_algos = static_cast<int>(config.algorithms.size());
  ErrorExperimentResult result;
  if (num_algos == 0) return result;

  struct SeedOutput {
    std::vector<ErrorRow> rows;
    std::vector<CellSummary> cells;
    std::vector<std::string> skipped;
  };
  std::vector<SeedOutput> per_seed(num_seeds);
  const std::string model_name = config.model.name();

  auto run_seed = [&](int si) {
    SeedOutput& slot = per_seed[si];
    const std::uint64_t seed = config.seeds[si];
    const DiscreteDbn dbn = config.model.build(seed, config.build);
    const EvidenceSequence evidence = sample_experiment_evidence(dbn, config.horizon, seed);
    SmoothedMarginals exact;
    try {
      exact = exact_smoother(dbn, evidence, config.smoother.exact);
    } catch (const CapExceeded& e) {
      slot.skipped.push_back("seed " + std::to_string(seed) + ": exact reference: " + e.what());
      return;
    }
    SmootherOptions options = config.smoother;
    options.reference = &exact;
    if (config.parallelism == Parallelism::kOpenMp) options.parallelism = Parallelism::kSerial;
    for (int ai = 0; ai < num_algos; ++ai) {
      const AlgorithmRun& run = config.algorithms[ai];
      const int run_id = si * num_algos + ai + 1;
      SmootherOutput output;
      try {
        output = run_smoother(dbn, evidence, run, options);
      } catch (const CapExceeded& e) {
        slot.skipped.push_back("seed " + std::to_string(seed) + " " + run.label() + ": " + e.what());
        continue;
      }
      CellSummary cell;
      cell.run_id = run_id;
      cell.seed = seed;
      cell.algorithm = run.label();
      const std::optional<double> mu = run.iterative() ? std::optional<double>(run.damping) : std::nullopt;
      if (output.lbp) {
        for (const IterationRecord& rec : output.lbp->trace) {
          for (std::size_t t = 0; t < rec.l1_per_t.size(); ++t) {
            slot.rows.push_back({run_id, seed, model_name, cell.algorithm, mu, rec.iteration,
                                 static_cast<int>(t) + 1, rec.l1_per_t[t]});
          }
          cell.l1_by_iteration.push_back(*rec.l1_total);
        }
        cell.converged = output.lbp->converged;
        cell.iterations = output.lbp->iterations;
        cell.undamped_resweep_delta = output.undamped_resweep_delta;
      } else {
        const L1Report l1 = l1_error(exact, output.marginals);
        for (std::size_t t = 0; t < l1.per_t.size(); ++t) {
          slot.rows.push_back({run_id, seed, model_name, cell.algorithm, mu, 1, static_cast<int>(t) + 1,
                               l1.per_t[t]});
        }
        cell.l1_by_iteration.push_back(l1.total);
      }
      cell.final_l1 = l1_error(exact, output.marginals).total;
      slot.cells.push_back(std::move(cell));
    }
  };

  if (config.parallelism == Parallelism::kOpenMp) {
    std::vector<std::string> errors(num_seeds);
#pragma omp parallel for schedule(dynamic, 1)
    for (int si = 0; si < num_seeds; ++si) {
      try {
        run_seed(si);
      } catch (const std::exception& e) {
        errors[si] = e.what();
      }
    }
    for (const auto& e : errors) {
      if (!e.empty()) throw InvalidArgument(e);
    }
  } else {
    for (int si = 0; si < num_seeds; ++si) run_seed(si);
  }

  for (auto& slot : per_seed) {
    for (auto& r : slot.rows) result.rows.push_back(std::move(r));
    for (auto& c : slot.cells) result.cells.push_back(std::move(c));
    for (auto& s : slot.skipped) result.skipped.push_back(std::move(s));
  }
  return result;
}

std::string error_rows_to_csv(const std::vector<ErrorRow>& rows) {
  std::string out = "run_id,seed,model,algorithm,mu,iteration,t,l1\n";
  for (const auto& r : rows) {
    out += std::to_string(r.run_id) + "," + std::to_string(r.seed) + "," + r.model + "," + r.algorithm + ",";
    if (r.mu) out += format_double(*r.mu);
    out += "," + std::to_string(r.iteration) + "," + std::to_string(r.t) + "," + format_double(r.l1) + "\n";
  }
  return out;
}

std::uint64_t marginals_digest(const SmoothedMarginals& marginals) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (int t = 0; t < marginals.horizon(); ++t) {
    for (int h = 0; h < marginals.num_hidden(); ++h) {
      for (double v : marginals.at(t, h)) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        for (int b = 0; b < 8; ++b) {
          hash ^= (bits >> (8 * b)) & 0xffU;
          hash *= 0x100000001b3ULL;
        }
      }
    }
  }
  return hash;
}

TimingResult run_timing_experiment(const TimingConfig& config) {
  using Clock = std::chrono::steady_clock;
  for (const auto& run : config.algorithms) run.validate();
  if (config.repeats < 1) throw InvalidArgument("repeats must be >= 1");
  TimingResult result;
  SmootherOptions options = config.smoother;
  // Fixed sweep counts: never stop early.
  options.convergence_tol = 0.0;
  options.reference = nullptr;
  options.record_history = false;
  options.check_fixed_point = false;
  struct Cell {
    int n;
    const AlgorithmRun* run;
    std::size_t instance;
  };
  std::vector<std::pair<DiscreteDbn, EvidenceSequence>> instances;
  std::vector<Cell> cells;
  instances.reserve(config.chains.size());
  for (int n : config.chains) {
    DiscreteDbn dbn = build_chmm(n, config.arity, config.seed);
    EvidenceSequence evidence = sample_experiment_evidence(dbn, config.horizon, config.seed);
    instances.emplace_back(std::move(dbn), std::move(evidence));
    const auto& [model, ev] = instances.back();
    for (const AlgorithmRun& run : config.algorithms) {
      try {
        // The timed exact route is the flattened HMM only.
        if (run.algorithm == "exact") flat_state_count(model, options.exact.max_flat_states);
        run_smoother(model, ev, run, options);  // warm-up, discarded
      } catch (const CapExceeded& e) {
        result.skipped.push_back(run.label() + " N=" + std::to_string(n) + ": " + e.what());
        continue;
      }
      cells.push_back({n, &run, instances.size() - 1});
    }
  }

  // Repeats are interleaved across cells so slow drifts in machine speed hit
  // every point alike; records are then listed cell by cell.
  std::vector<TimingRecord> records(cells.size() * config.repeats);
  std::vector<std::uint64_t> digests(records.size());
  for (int rep = 1; rep <= config.repeats; ++rep) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto& [model, ev] = instances[cells[c].instance];
      const AlgorithmRun& run = *cells[c].run;
      int count = 0;
      std::uint64_t digest = 0;
      const auto start = Clock::now();
      double elapsed = 0.0;
      do {
        const SmootherOutput out = run_smoother(model, ev, run, options);
        if (count == 0) digest = marginals_digest(out.marginals);
        ++count;
        elapsed = std::chrono::duration<double>(Clock::now() - start).count();
      } while (elapsed < config.min_measure_seconds);
      TimingRecord& rec = records[c * config.repeats + (rep - 1)];
      rec.model = "chmm";
      rec.algorithm = run.label();
      rec.num_chains = cells[c].n;
      rec.arity = config.arity;
      rec.horizon = config.horizon;
      rec.iterations = run.iterative() ? run.iterations : 1;
      rec.repeat = rep;
      rec.seconds = elapsed / count;
      rec.seconds_per_slice = rec.seconds / config.horizon;
      digests[c * config.repeats + (rep - 1)] = digest;
    }
  }
  result.records = std::move(records);
  result.digests = std::move(digests);
  return result;
}

std::string timing_to_csv(const std::vector<TimingRecord>& records) {
  std::string out = "model,algorithm,N,Q,T,repeat,seconds,seconds_per_slice\n";
  for (const auto& r : records) {
    out += r.model + "," + r.algorithm + "," + std::to_string(r.num_chains) + "," + std::to_string(r.arity) + "," +
           std::to_string(r.horizon) + "," + std::to_string(r.repeat) + "," + format_double(r.seconds) + "," +
           format_double(r.seconds_per_slice) + "\n";
  }
  return out;
}

std::vector<TimingPoint> summarize_timing(const std::vector<TimingRecord>& records) {
  std::vector<std::pair<std::string, int>> order;
  std::map<std::pair<std::string, int>, std::vector<double>> groups;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.algorithm, r.num_chains);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(r.seconds_per_slice);
  }
  std::vector<TimingPoint> out;
  for (const auto& key : order) out.push_back({key.first, key.second, median(groups[key])});
  return out;
}

}  // namespace dbn
