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

#ifndef DBN_EXPERIMENTS_HPP_
#define DBN_EXPERIMENTS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dbn/approx.hpp"
#include "dbn/exact.hpp"
#include "dbn/lbp.hpp"
#include "dbn/metrics.hpp"
#include "dbn/model.hpp"

namespace dbn {

// Builder spec: "chmm:N:Q", "factorial:N:Q" or "water".
struct ModelSpec {
  enum class Kind { kChmm, kFactorial, kWater };
  Kind kind = Kind::kChmm;
  int num_chains = 1;
  int arity = 2;

  // Throws InvalidArgument with the accepted forms.
  static ModelSpec parse(const std::string& text);
  std::string name() const;
  DiscreteDbn build(std::uint64_t seed, const BuildOptions& options = {}) const;
};

// One smoother configuration.
struct AlgorithmRun {
  // exact, ff, bk, lbp or iterated-bk.
  std::string algorithm = "ff";
  int iterations = 1;
  double damping = 0.0;
  Schedule schedule = Schedule::kForwardBackward;
  // ClusterSpec text for bk / iterated-bk.
  std::string clusters = "per-node";

  bool iterative() const { return algorithm == "lbp" || algorithm == "iterated-bk"; }
  // CSV-safe tag, e.g. "lbp-k20-mu0.1".
  std::string label() const;
  // Throws InvalidArgument on an unknown algorithm or bad numbers.
  void validate() const;
};

// Flattened forwards-backwards when the joint state space fits, otherwise
// the frontier algorithm. Throws CapExceeded when neither fits.
SmoothedMarginals exact_smoother(const DiscreteDbn& dbn, const EvidenceSequence& evidence,
                                 const ExactOptions& options = {});

struct SmootherOutput {
  SmoothedMarginals marginals;
  // Iterative algorithms only.
  std::optional<LbpResult> lbp;
  // Largest message change of one extra undamped FB sweep from the final
  // store (iterative algorithms).
  std::optional<double> undamped_resweep_delta;
  long zero_normalizer_events = 0;
};

struct SmootherOptions {
  ExactOptions exact;
  ClusterCaps caps;
  double convergence_tol = 1e-9;
  const SmoothedMarginals* reference = nullptr;
  bool record_history = false;
  // Iterative runs: one extra undamped sweep from the final messages to
  // report undamped_resweep_delta.
  bool check_fixed_point = true;
  Parallelism parallelism = Parallelism::kSerial;
};

// Dispatches one algorithm run.
SmootherOutput run_smoother(const DiscreteDbn& dbn, const EvidenceSequence& evidence, const AlgorithmRun& run,
                            const SmootherOptions& options = {});

// Evidence for experiment seeds comes from the "evidence" sub-stream.
EvidenceSequence sample_experiment_evidence(const DiscreteDbn& dbn, int horizon, std::uint64_t seed);

struct ErrorRow {
  int run_id = 0;
  std::uint64_t seed = 0;
  std::string model;
  std::string algorithm;
  std::optional<double> mu;
  int iteration = 1;
  int t = 1;  // 1-based
  double l1 = 0.0;
};

// Final state of one (seed, algorithm) cell.
struct CellSummary {
  int run_id = 0;
  std::uint64_t seed = 0;
  std::string algorithm;
  double final_l1 = 0.0;
  std::vector<double> l1_by_iteration;
  bool converged = true;
  int iterations = 1;
  std::optional<double> undamped_resweep_delta;
};

struct ErrorExperimentConfig {
  ModelSpec model;
  std::vector<std::uint64_t> seeds;
  int horizon = 100;
  std::vector<AlgorithmRun> algorithms;
  BuildOptions build;
  SmootherOptions smoother;
  // Seeds run concurrently when kOpenMp.
  Parallelism parallelism = Parallelism::kOpenMp;
};

struct ErrorExperimentResult {
  std::vector<ErrorRow> rows;
  std::vector<CellSummary> cells;
  // Cells skipped because a cap was exceeded, with the reason.
  std::vector<std::string> skipped;
};

ErrorExperimentResult run_error_experiment(const ErrorExperimentConfig& config);

// Header run_id,seed,model,algorithm,mu,iteration,t,l1.
std::string error_rows_to_csv(const std::vector<ErrorRow>& rows);

struct TimingConfig {
  std::vector<int> chains = {1, 3, 5, 7, 9, 11};
  int arity = 2;
  int horizon = 50;
  std::vector<AlgorithmRun> algorithms;
  int repeats = 3;
  std::uint64_t seed = 1;
  // Each measurement repeats the run until at least this long has elapsed.
  double min_measure_seconds = 0.02;
  SmootherOptions smoother;
};

struct TimingResult {
  std::vector<TimingRecord> records;
  // Output checksum per record, for determinism checks.
  std::vector<std::uint64_t> digests;
  std::vector<std::string> skipped;
};

// Raw records, one per (N, algorithm, repeat); a discarded warm-up run
// precedes each (N, algorithm) group. LBP runs exactly `iterations` sweeps.
// "exact" is timed only where the flattened HMM fits; other points are
// listed in `skipped`.
TimingResult run_timing_experiment(const TimingConfig& config);

// Header model,algorithm,N,Q,T,repeat,seconds,seconds_per_slice.
std::string timing_to_csv(const std::vector<TimingRecord>& records);

// Median seconds_per_slice per (algorithm, N), in first-seen order.
struct TimingPoint {
  std::string algorithm;
  int num_chains = 0;
  double seconds_per_slice = 0.0;
};
std::vector<TimingPoint> summarize_timing(const std::vector<TimingRecord>& records);

// FNV-1a over the exact bit patterns of all marginals.
std::uint64_t marginals_digest(const SmoothedMarginals& marginals);

}  // namespace dbn

#endif  // DBN_EXPERIMENTS_HPP_
