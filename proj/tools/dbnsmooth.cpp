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

// dbnsmooth: generate models, smooth evidence, compare smoothers against the
// exact route and time them. Data goes to files; stdout gets one summary line.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dbn/csv.hpp"
#include "dbn/error.hpp"
#include "dbn/experiments.hpp"
#include "dbn/model_io.hpp"

namespace {

using namespace dbn;

constexpr int kExitUsage = 2;
constexpr int kExitCap = 3;

struct Caps {
  std::size_t max_flat_states = 4096;
  std::size_t max_frontier_entries = std::size_t{1} << 22;
  std::size_t max_brute_force_states = std::size_t{1} << 24;
  std::size_t max_cluster_states = 4096;
  std::size_t max_table_entries = std::size_t{1} << 24;

  void add_to(CLI::App* app) {
    app->add_option("--max-flat-states", max_flat_states, "cap on flattened HMM states");
    app->add_option("--max-frontier-entries", max_frontier_entries, "cap on frontier table entries");
    app->add_option("--max-cluster-states", max_cluster_states, "cap on cluster and mega-node states");
    app->add_option("--max-table-entries", max_table_entries, "cap on factor and CPT entries");
  }
  SmootherOptions smoother() const {
    SmootherOptions o;
    o.exact.max_flat_states = max_flat_states;
    o.exact.max_frontier_entries = max_frontier_entries;
    o.exact.max_brute_force_states = max_brute_force_states;
    o.caps.max_cluster_states = max_cluster_states;
    o.caps.max_table_entries = max_table_entries;
    return o;
  }
};

bool is_builder_spec(const std::string& text) {
  return text == "water" || text.rfind("chmm:", 0) == 0 || text.rfind("factorial:", 0) == 0;
}

DiscreteDbn load_model_source(const std::string& source, std::uint64_t seed, double sharpness) {
  if (is_builder_spec(source)) {
    BuildOptions options;
    options.sharpness = sharpness;
    return ModelSpec::parse(source).build(seed, options);
  }
  return load_model(source);
}

// "sample:T[:seed]" or a path.
EvidenceSequence load_evidence_source(const DiscreteDbn& dbn, const std::string& source, std::uint64_t seed) {
  if (source.rfind("sample:", 0) == 0) {
    std::vector<std::string> parts;
    std::stringstream ss(source);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() < 2 || parts.size() > 3) {
      throw InvalidArgument("evidence source '" + source + "': expected sample:T or sample:T:seed");
    }
    int horizon = 0;
    try {
      horizon = std::stoi(parts[1]);
      if (parts.size() == 3) seed = std::stoull(parts[2]);
    } catch (const std::exception&) {
      throw InvalidArgument("evidence source '" + source + "': T and seed must be integers");
    }
    if (horizon < 1) throw InvalidArgument("evidence source '" + source + "': T must be >= 1");
    return sample_experiment_evidence(dbn, horizon, seed);
  }
  return load_evidence(dbn, source);
}

// "name[:key=value]...", keys iters, mu, clusters, schedule.
AlgorithmRun parse_algorithm(const std::string& text) {
  AlgorithmRun run;
  std::vector<std::string> parts;
  std::size_t start = 0;
  // Cluster lists may contain ':' only inside brackets.
  int depth = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i < text.size() && (text[i] == '[' || text[i] == '{')) ++depth;
    if (i < text.size() && (text[i] == ']' || text[i] == '}')) --depth;
    if (i == text.size() || (text[i] == ':' && depth == 0)) {
      parts.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  run.algorithm = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos) throw InvalidArgument("algorithm option '" + parts[i] + "' is not key=value");
    const std::string key = parts[i].substr(0, eq);
    const std::string value = parts[i].substr(eq + 1);
    try {
      if (key == "iters") {
        run.iterations = std::stoi(value);
      } else if (key == "mu") {
        run.damping = std::stod(value);
      } else if (key == "clusters") {
        run.clusters = value;
      } else if (key == "schedule") {
        if (value == "fb") {
          run.schedule = Schedule::kForwardBackward;
        } else if (value == "flooding") {
          run.schedule = Schedule::kFlooding;
        } else {
          throw InvalidArgument("schedule must be fb or flooding");
        }
      } else {
        throw InvalidArgument("unknown algorithm option '" + key + "'");
      }
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const InvalidArgument*>(&e)) throw;
      throw InvalidArgument("algorithm option '" + parts[i] + "' has a bad value");
    }
  }
  run.validate();
  return run;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      const auto dash = item.find('-');
      if (dash == std::string::npos) {
        seeds.push_back(std::stoull(item));
      } else {
        const auto lo = std::stoull(item.substr(0, dash));
        const auto hi = std::stoull(item.substr(dash + 1));
        if (hi < lo) throw InvalidArgument("");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
      }
    } catch (const std::exception&) {
      throw InvalidArgument("bad seed list '" + text + "'; expected e.g. 1-20 or 1,5,9");
    }
  }
  return seeds;
}

std::string trace_path_for(const std::string& out) {
  std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + "_trace.csv")).string();
}

int cmd_gen_model(const std::string& spec, std::uint64_t seed, double sharpness, const std::string& out) {
  BuildOptions options;
  options.sharpness = sharpness;
  const DiscreteDbn dbn = ModelSpec::parse(spec).build(seed, options);
  save_model(dbn, out);
  std::size_t entries = 0;
  for (int i = 0; i < dbn.num_nodes(); ++i) {
    entries += dbn.prior_cpt(i).table.values().size() + dbn.transition_cpt(i).table.values().size();
  }
  std::printf("%s: %d nodes (%d hidden), %zu intra edges, %zu inter edges, %zu CPT entries -> %s\n",
              spec.c_str(), dbn.num_nodes(), dbn.num_hidden(), dbn.intra_edges().size(),
              dbn.inter_edges().size(), entries, out.c_str());
  return 0;
}

struct SmoothArgs {
  std::string model;
  std::string evidence;
  std::string algorithm = "exact";
  int iters = 1;
  double damping = 0.0;
  std::string clusters = "per-node";
  std::string schedule = "fb";
  double tol = 1e-9;
  bool l1 = false;
  std::string out;
  std::string trace;
};

int cmd_smooth(const SmoothArgs& args, std::uint64_t seed, double sharpness, const Caps& caps) {
  const DiscreteDbn dbn = load_model_source(args.model, seed, sharpness);
  const EvidenceSequence evidence = load_evidence_source(dbn, args.evidence, seed);
  AlgorithmRun run;
  run.algorithm = args.algorithm;
  run.iterations = args.iters;
  run.damping = args.damping;
  run.clusters = args.clusters;
  run.schedule = args.schedule == "flooding" ? Schedule::kFlooding : Schedule::kForwardBackward;
  SmootherOptions options = caps.smoother();
  options.convergence_tol = args.tol;
  options.parallelism = Parallelism::kOpenMp;
  std::optional<SmoothedMarginals> exact;
  if (args.l1 && run.iterative()) {
    exact = exact_smoother(dbn, evidence, options.exact);
    options.reference = &*exact;
  }
  const SmootherOutput output = run_smoother(dbn, evidence, run, options);
  write_text_file(args.out, marginals_to_csv(output.marginals, dbn));
  if (output.zero_normalizer_events > 0) {
    std::cerr << "warning: " << output.zero_normalizer_events
              << " zero normalizers replaced by uniform distributions\n";
  }
  std::string summary = run.label() + ": T=" + std::to_string(evidence.horizon()) + " -> " + args.out;
  if (output.lbp) {
    const std::string trace = args.trace.empty() ? trace_path_for(args.out) : args.trace;
    write_text_file(trace, trace_to_csv(output.lbp->trace));
    summary += ", trace " + trace + ", " + std::to_string(output.lbp->iterations) + " iterations, " +
               (output.lbp->converged ? "converged" : "non-converged");
  }
  std::printf("%s\n", summary.c_str());
  return 0;
}

struct CompareArgs {
  std::string model;
  std::string evidence;
  std::vector<std::string> algorithms;
  std::string seeds;
  int horizon = 100;
  double tol = 1e-9;
  std::string out;
};

int cmd_compare(const CompareArgs& args, std::uint64_t seed, double sharpness, const Caps& caps) {
  std::vector<AlgorithmRun> runs;
  for (const auto& a : args.algorithms) runs.push_back(parse_algorithm(a));
  SmootherOptions options = caps.smoother();
  options.convergence_tol = args.tol;

  if (!args.seeds.empty()) {
    if (!is_builder_spec(args.model)) throw InvalidArgument("--seeds needs a builder spec as --model");
    ErrorExperimentConfig config;
    config.model = ModelSpec::parse(args.model);
    config.build.sharpness = sharpness;
    config.seeds = parse_seed_list(args.seeds);
    config.horizon = args.horizon;
    config.algorithms = runs;
    config.smoother = options;
    const ErrorExperimentResult result = run_error_experiment(config);
    for (const auto& s : result.skipped) std::cerr << "skipped: " << s << "\n";
    write_text_file(args.out, error_rows_to_csv(result.rows));
    if (result.cells.empty() && !result.skipped.empty()) return kExitCap;
    int non_converged = 0;
    for (const auto& c : result.cells) non_converged += c.converged ? 0 : 1;
    std::printf("%zu cells, %zu rows, %d non-converged -> %s\n", result.cells.size(), result.rows.size(),
                non_converged, args.out.c_str());
    return 0;
  }

  const DiscreteDbn dbn = load_model_source(args.model, seed, sharpness);
  const EvidenceSequence evidence = load_evidence_source(dbn, args.evidence, seed);
  const SmoothedMarginals exact = exact_smoother(dbn, evidence, options.exact);
  options.reference = &exact;
  std::vector<ErrorRow> rows;
  const std::string model_name = is_builder_spec(args.model) ? args.model : std::filesystem::path(args.model).stem().string();
  std::string summary;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const SmootherOutput output = run_smoother(dbn, evidence, runs[i], options);
    const int run_id = static_cast<int>(i) + 1;
    const std::optional<double> mu = runs[i].iterative() ? std::optional<double>(runs[i].damping) : std::nullopt;
    if (output.lbp) {
      for (const auto& rec : output.lbp->trace) {
        for (std::size_t t = 0; t < rec.l1_per_t.size(); ++t) {
          rows.push_back({run_id, seed, model_name, runs[i].label(), mu, rec.iteration, static_cast<int>(t) + 1,
                          rec.l1_per_t[t]});
        }
      }
    } else {
      const L1Report l1 = l1_error(exact, output.marginals);
      for (std::size_t t = 0; t < l1.per_t.size(); ++t) {
        rows.push_back({run_id, seed, model_name, runs[i].label(), mu, 1, static_cast<int>(t) + 1, l1.per_t[t]});
      }
    }
    summary += (i ? ", " : "") + runs[i].label() + " L1=" + format_double(l1_error(exact, output.marginals).total);
    if (output.lbp && !output.lbp->converged) summary += " (non-converged)";
  }
  write_text_file(args.out, error_rows_to_csv(rows));
  std::printf("%s -> %s\n", summary.empty() ? "no algorithms" : summary.c_str(), args.out.c_str());
  return 0;
}

struct BenchArgs {
  std::vector<int> chains = {1, 3, 5, 7, 9, 11};
  int arity = 2;
  int horizon = 50;
  std::vector<std::string> algorithms = {"ff", "lbp:iters=1", "lbp:iters=3"};
  int repeats = 3;
  std::string out;
};

int cmd_bench(const BenchArgs& args, std::uint64_t seed, const Caps& caps) {
  TimingConfig config;
  config.chains = args.chains;
  config.arity = args.arity;
  config.horizon = args.horizon;
  for (const auto& a : args.algorithms) config.algorithms.push_back(parse_algorithm(a));
  config.repeats = args.repeats;
  config.seed = seed;
  config.smoother = caps.smoother();
  const TimingResult result = run_timing_experiment(config);
  for (const auto& s : result.skipped) std::cerr << "omitted: " << s << "\n";
  write_text_file(args.out, timing_to_csv(result.records));
  std::printf("%zu timing records, %zu omitted -> %s\n", result.records.size(), result.skipped.size(),
              args.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smoothing for discrete dynamic Bayesian networks"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  double sharpness = 1.0;
  Caps caps;

  auto* gen = app.add_subcommand("gen-model", "write a generated model file");
  std::string gen_spec;
  std::string gen_out;
  gen->add_option("spec", gen_spec, "chmm:N:Q, factorial:N:Q or water")->required();
  gen->add_option("-o,--out", gen_out, "model JSON path")->required();

  auto* smooth = app.add_subcommand("smooth", "write smoothed marginals");
  SmoothArgs sargs;
  smooth->add_option("-m,--model", sargs.model, "model path or builder spec")->required();
  smooth->add_option("-e,--evidence", sargs.evidence, "evidence path or sample:T[:seed]")->required();
  smooth->add_option("-a,--algorithm", sargs.algorithm, "exact, ff, bk, lbp or iterated-bk")
      ->check(CLI::IsMember({"exact", "ff", "bk", "lbp", "iterated-bk"}));
  smooth->add_option("--iters", sargs.iters, "LBP iterations")->check(CLI::PositiveNumber);
  smooth->add_option("--damping", sargs.damping, "message damping in [0, 1]")->check(CLI::Range(0.0, 1.0));
  smooth->add_option("--clusters", sargs.clusters, "per-node, whole-slice or a JSON list of lists");
  smooth->add_option("--schedule", sargs.schedule, "fb or flooding")->check(CLI::IsMember({"fb", "flooding"}));
  smooth->add_option("--tol", sargs.tol, "convergence tolerance on message change");
  smooth->add_flag("--l1", sargs.l1, "add exact L1 error columns to the trace");
  smooth->add_option("-o,--out", sargs.out, "marginals CSV path")->required();
  smooth->add_option("--trace", sargs.trace, "trace CSV path (default <out>_trace.csv)");
  caps.add_to(smooth);

  auto* compare = app.add_subcommand("compare", "write L1 errors against the exact route");
  CompareArgs cargs;
  compare->add_option("-m,--model", cargs.model, "model path or builder spec")->required();
  compare->add_option("-e,--evidence", cargs.evidence, "evidence path or sample:T[:seed]");
  compare->add_option("-a,--algorithms", cargs.algorithms, "e.g. ff bk lbp:iters=20:mu=0.1")->required();
  compare->add_option("--seeds", cargs.seeds, "seed list (e.g. 1-20): sample a fresh model per seed");
  compare->add_option("-T,--horizon", cargs.horizon, "horizon for --seeds runs")->check(CLI::PositiveNumber);
  compare->add_option("--tol", cargs.tol, "convergence tolerance on message change");
  compare->add_option("-o,--out", cargs.out, "error CSV path")->required();
  caps.add_to(compare);

  auto* bench = app.add_subcommand("bench", "time smoothers on a CHMM sweep");
  BenchArgs bargs;
  bench->add_option("-N,--chains", bargs.chains, "chain counts");
  bench->add_option("-Q,--arity", bargs.arity, "hidden arity")->check(CLI::Range(2, 64));
  bench->add_option("-T,--horizon", bargs.horizon, "horizon")->check(CLI::PositiveNumber);
  bench->add_option("-a,--algorithms", bargs.algorithms, "e.g. ff lbp:iters=3 exact");
  bench->add_option("--repeats", bargs.repeats, "timed repeats")->check(CLI::PositiveNumber);
  bench->add_option("-o,--out", bargs.out, "timing CSV path")->required();
  caps.add_to(bench);

  for (auto* sub : {gen, smooth, compare, bench}) {
    sub->add_option("--seed", seed, "root seed (model and evidence sub-streams)");
    sub->add_option("--sharpness", sharpness, "CPT sharpness exponent for generated models");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) return cmd_gen_model(gen_spec, seed, sharpness, gen_out);
    if (*smooth) return cmd_smooth(sargs, seed, sharpness, caps);
    if (*compare) {
      if (cargs.seeds.empty() && cargs.evidence.empty()) {
        throw InvalidArgument("compare needs --evidence or --seeds");
      }
      return cmd_compare(cargs, seed, sharpness, caps);
    }
    if (*bench) return cmd_bench(bargs, seed, caps);
  } catch (const CapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCap;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ZeroProbabilityEvidence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return 0;
}
