#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "instances.hpp"
#include "mdp.hpp"
#include "solvers.hpp"

// Gap sweep harness: (instance, horizon, seed) cells share one demo draw
// across every method, gaps are computed by exact policy evaluation, and
// rows come back fully sorted so output bytes do not depend on scheduling.

namespace ildm {

enum class BenchInstance { kResetCliff, kD5, kRandom, kFromFile };

struct BenchConfig {
  BenchInstance instance = BenchInstance::kResetCliff;
  std::vector<Method> methods;
  int S = 4;
  int A = 5;
  int N = 2;  // demo trajectories per seed; also the reset-cliff mixture knob
  std::vector<int> horizons = {10, 20, 40, 80};
  int num_seeds = 100;
  uint64_t base_seed = 0;
  SolverConfig solver;  // shared overrides; per-method seeds are derived
  // kFromFile runs against explicit artifacts instead of a generator.
  std::string mdp_path;
  std::string expert_path;
};

struct BenchRow {
  std::string method;
  int H = 0;
  int S = 0;
  int A = 0;
  int N = 0;
  uint64_t seed = 0;  // seed index within the sweep
  double gap = 0.0;   // expert return minus learned-policy return
  bool converged = false;
  double wall_time_ms = 0.0;
  std::string error;  // nonempty if the solve threw; gap is then nan
};

struct BenchResult {
  std::vector<BenchRow> rows;
};

/// Worker count: ILDM_THREADS if set, else hardware concurrency, at least 1.
int bench_thread_count();

BenchResult run_bench(const BenchConfig& cfg);

std::string bench_csv(const BenchResult& result);
/// Per (method, H) aggregate: count, mean gap, standard error of the mean.
std::string bench_summary_csv(const BenchResult& result);

}  // namespace ildm
