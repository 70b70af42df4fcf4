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

// Serial reference vs OpenMP timings for the parallel kernels. Every pair is
// also checked for identical output.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "dbn/experiments.hpp"

namespace {

using namespace dbn;
using Clock = std::chrono::steady_clock;

double time_it(const std::function<void()>& fn) {
  fn();
  int count = 0;
  const auto start = Clock::now();
  double elapsed = 0.0;
  do {
    fn();
    ++count;
    elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  } while (elapsed < 0.2);
  return elapsed / count;
}

void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-28s serial %10.3e s  openmp %10.3e s  speedup %5.2fx  %s\n", name, serial, parallel,
              serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  bool all_same = true;

  {
    const DiscreteDbn dbn = build_chmm(11, 2, 7);
    const FlatHmm hmm = flatten_to_hmm(dbn, 4096);
    std::vector<double> alpha(hmm.num_states, 1.0 / hmm.num_states);
    std::vector<double> a(hmm.num_states), b(hmm.num_states);
    const double ts = time_it([&] { kernels::predict_serial(hmm, alpha, a); });
    const double tp = time_it([&] { kernels::predict_parallel(hmm, alpha, b); });
    report("flat predict (S=2048)", ts, tp, a == b);
    all_same &= a == b;
    const double us = time_it([&] { kernels::back_project_serial(hmm, alpha, a); });
    const double up = time_it([&] { kernels::back_project_parallel(hmm, alpha, b); });
    report("flat back-project (S=2048)", us, up, a == b);
    all_same &= a == b;
  }

  {
    const DiscreteDbn dbn = build_chmm(20, 3, 11);
    const EvidenceSequence ev = sample_experiment_evidence(dbn, 100, 11);
    const Network net = unrolled_network(dbn, 100);
    const auto local = net.local_evidence(NodeLikelihoods(dbn, ev));
    LbpEngine serial(net, local);
    LbpEngine parallel(net, local);
    const double ts = time_it([&] { serial.iterate(Schedule::kFlooding, 0.0, Parallelism::kSerial); });
    const double tp = time_it([&] { parallel.iterate(Schedule::kFlooding, 0.0, Parallelism::kOpenMp); });
    // Equal iteration counts are not guaranteed by time_it; compare fresh runs.
    LbpEngine s2(net, local), p2(net, local);
    for (int i = 0; i < 5; ++i) {
      s2.iterate(Schedule::kFlooding, 0.0, Parallelism::kSerial);
      p2.iterate(Schedule::kFlooding, 0.0, Parallelism::kOpenMp);
    }
    const bool same = s2.store() == p2.store();
    report("flooding sweep (N=20,T=100)", ts, tp, same);
    all_same &= same;
  }

  {
    ErrorExperimentConfig config;
    config.model = ModelSpec::parse("chmm:4:2");
    config.seeds = {1, 2, 3, 4, 5, 6, 7, 8};
    config.horizon = 50;
    AlgorithmRun ff;
    AlgorithmRun lbp;
    lbp.algorithm = "lbp";
    lbp.iterations = 10;
    config.algorithms = {ff, lbp};
    std::string s_csv, p_csv;
    config.parallelism = Parallelism::kSerial;
    const double ts = time_it([&] { s_csv = error_rows_to_csv(run_error_experiment(config).rows); });
    config.parallelism = Parallelism::kOpenMp;
    const double tp = time_it([&] { p_csv = error_rows_to_csv(run_error_experiment(config).rows); });
    report("error experiment cells", ts, tp, s_csv == p_csv);
    all_same &= s_csv == p_csv;
  }
  return all_same ? 0 : 1;
}
