#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aivgt/simdata.hpp"
#include "aivgt/stats.hpp"

namespace aivgt {

/// One (scenario, estimator, seed) outcome of the benchmark sweep.
struct BenchRow {
  Scenario scenario = Scenario::A;
  std::string estimator;  // lsr | naive_tsls | shared_conditioning | aivgt
  std::uint64_t seed = 0;
  std::optional<double> beta;      // absent when the run returned NA
  std::optional<double> bias_pct;  // |(beta - 2)/2| * 100
  std::string na_reason;           // non-empty when beta is absent
  std::string chosen_pair;         // "S1,S2" style, aivgt/shared only
};

struct BenchConfig {
  std::vector<Scenario> scenarios{Scenario::A, Scenario::B, Scenario::C, Scenario::D,
                                  Scenario::E};
  long n = 10000;
  int reps = 30;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  TetradVariance tetrad_variance = TetradVariance::Bootstrap;
  int bootstrap_reps = 500;
  int max_cond_size = 4;  // learner cap for the sweep
};

/// Runs every scenario x estimator x seed cell; seeds fan out across
/// workers and rows come back in deterministic order.
std::vector<BenchRow> run_bench(const BenchConfig& cfg);

/// Long-format CSV of the rows (one line per scenario/estimator/seed).
std::string bench_rows_csv(const std::vector<BenchRow>& rows);

struct BenchSummary {
  Scenario scenario = Scenario::A;
  std::string estimator;
  int runs = 0;
  int na_count = 0;
  double median_bias_pct = 0.0;  // over non-NA runs
  double pair_s1s2_rate = 0.0;   // aivgt/shared: share of runs choosing {S1,S2}
};

std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows);
std::string summary_table(const std::vector<BenchSummary>& summaries);

}  // namespace aivgt
