#include "bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "demos.hpp"
#include "rng.hpp"
#include "serialize.hpp"

namespace ildm {

namespace {

struct Cell {
  int H;
  uint64_t seed_idx;
};

struct CellInstance {
  LayeredMdp mdp;
  TabularPolicy expert;
  DemoDataset demo;
};

CellInstance build_cell(const BenchConfig& cfg, const Cell& cell,
                        const LayeredMdp* file_mdp, const TabularPolicy* file_expert) {
  const uint64_t demo_seed = mix_seed(cfg.base_seed, {1, static_cast<uint64_t>(cell.H), cell.seed_idx});
  CellInstance out;
  switch (cfg.instance) {
    case BenchInstance::kResetCliff: {
      auto pair = reset_cliff({cfg.S, cfg.A, cell.H, cfg.N});
      out.mdp = std::move(pair.mdp);
      out.expert = std::move(pair.expert);
      out.demo = collect_demos(out.mdp, out.expert, cfg.N, demo_seed);
      break;
    }
    case BenchInstance::kD5: {
      auto d5 = example_d5();
      out.mdp = std::move(d5.mdp);
      out.expert = std::move(d5.expert);
      out.demo = std::move(d5.demo);
      break;
    }
    case BenchInstance::kRandom: {
      Rng rng(mix_seed(cfg.base_seed, {3, static_cast<uint64_t>(cell.H), cell.seed_idx}));
      std::vector<int> sizes(cell.H, cfg.S);
      auto pair = random_layered_mdp(sizes, cfg.A, rng, ExpertKind::kRandomAction);
      out.mdp = std::move(pair.mdp);
      out.expert = std::move(pair.expert);
      out.demo = collect_demos(out.mdp, out.expert, cfg.N, demo_seed);
      break;
    }
    case BenchInstance::kFromFile: {
      out.mdp = *file_mdp;
      out.expert = *file_expert;
      out.demo = collect_demos(out.mdp, out.expert, cfg.N, demo_seed);
      break;
    }
  }
  return out;
}

}  // namespace

int bench_thread_count() {
  if (const char* env = std::getenv("ILDM_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<int>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw >= 1 ? static_cast<int>(hw) : 1;
}

BenchResult run_bench(const BenchConfig& cfg) {
  if (cfg.methods.empty()) throw PreconditionError("bench config selects no methods");
  if (cfg.num_seeds < 1) throw PreconditionError("bench config needs at least one seed");

  LayeredMdp file_mdp;
  TabularPolicy file_expert;
  if (cfg.instance == BenchInstance::kFromFile) {
    file_mdp = mdp_from_json(read_file(cfg.mdp_path));
    file_expert = policy_from_json(read_file(cfg.expert_path), file_mdp);
  }

  std::vector<Cell> cells;
  if (cfg.instance == BenchInstance::kD5) {
    for (int i = 0; i < cfg.num_seeds; ++i) cells.push_back({2, static_cast<uint64_t>(i)});
  } else if (cfg.instance == BenchInstance::kFromFile) {
    for (int i = 0; i < cfg.num_seeds; ++i) {
      cells.push_back({file_mdp.horizon, static_cast<uint64_t>(i)});
    }
  } else {
    if (cfg.horizons.empty()) throw PreconditionError("bench config selects no horizons");
    for (int H : cfg.horizons) {
      for (int i = 0; i < cfg.num_seeds; ++i) cells.push_back({H, static_cast<uint64_t>(i)});
    }
  }

  const size_t num_methods = cfg.methods.size();
  std::vector<BenchRow> rows(cells.size() * num_methods);

  auto run_cell = [&](size_t ci) {
    const Cell& cell = cells[ci];
    CellInstance inst;
    try {
      inst = build_cell(cfg, cell, &file_mdp, &file_expert);
    } catch (const std::exception& e) {
      for (size_t mi = 0; mi < num_methods; ++mi) {
        BenchRow& row = rows[ci * num_methods + mi];
        row.method = method_name(cfg.methods[mi]);
        row.H = cell.H;
        row.S = cfg.S;
        row.A = cfg.A;
        row.N = cfg.N;
        row.seed = cell.seed_idx;
        row.gap = std::numeric_limits<double>::quiet_NaN();
        row.error = e.what();
      }
      return;
    }
    const double expert_return = policy_return(inst.mdp, inst.expert);
    const uint64_t demo_seed =
        mix_seed(cfg.base_seed, {1, static_cast<uint64_t>(cell.H), cell.seed_idx});
    for (size_t mi = 0; mi < num_methods; ++mi) {
      BenchRow& row = rows[ci * num_methods + mi];
      row.method = method_name(cfg.methods[mi]);
      row.H = inst.mdp.horizon;
      row.S = cfg.instance == BenchInstance::kD5 ? inst.mdp.layer_sizes[0] : cfg.S;
      row.A = inst.mdp.num_actions;
      row.N = inst.demo.num_trajectories;
      row.seed = cell.seed_idx;
      SolverConfig scfg = cfg.solver;
      scfg.seed = mix_seed(demo_seed, {2, static_cast<uint64_t>(mi)});
      const auto t0 = std::chrono::steady_clock::now();
      try {
        SolveResult res = solve(inst.mdp, inst.demo, cfg.methods[mi], scfg);
        row.gap = expert_return - policy_return(inst.mdp, res.policy);
        row.converged = res.converged;
      } catch (const std::exception& e) {
        row.gap = std::numeric_limits<double>::quiet_NaN();
        row.converged = false;
        row.error = e.what();
      }
      const auto t1 = std::chrono::steady_clock::now();
      row.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
  };

  const int workers = std::min<int>(bench_thread_count(), static_cast<int>(cells.size()));
  if (workers <= 1) {
    for (size_t ci = 0; ci < cells.size(); ++ci) run_cell(ci);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const size_t ci = next.fetch_add(1);
          if (ci >= cells.size()) return;
          run_cell(ci);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  BenchResult result;
  result.rows = std::move(rows);
  std::sort(result.rows.begin(), result.rows.end(), [](const BenchRow& a, const BenchRow& b) {
    if (a.method != b.method) return a.method < b.method;
    if (a.H != b.H) return a.H < b.H;
    return a.seed < b.seed;
  });
  return result;
}

std::string bench_csv(const BenchResult& result) {
  std::string out = "method,H,S,A,N,seed,gap,converged,wall_time_ms\n";
  for (const auto& r : result.rows) {
    out += r.method;
    out += ',' + std::to_string(r.H);
    out += ',' + std::to_string(r.S);
    out += ',' + std::to_string(r.A);
    out += ',' + std::to_string(r.N);
    out += ',' + std::to_string(r.seed);
    out += ',' + num_str(r.gap);
    out += r.converged ? ",true" : ",false";
    out += ',' + num_str(r.wall_time_ms);
    out += '\n';
  }
  return out;
}

std::string bench_summary_csv(const BenchResult& result) {
  struct Agg {
    int n = 0;
    double sum = 0.0;
    double sumsq = 0.0;
  };
  std::vector<std::pair<std::pair<std::string, int>, Agg>> groups;
  for (const auto& r : result.rows) {
    if (std::isnan(r.gap)) continue;
    std::pair<std::string, int> key{r.method, r.H};
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.first == key; });
    if (it == groups.end()) {
      groups.push_back({key, {}});
      it = std::prev(groups.end());
    }
    it->second.n += 1;
    it->second.sum += r.gap;
    it->second.sumsq += r.gap * r.gap;
  }
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string out = "method,H,n,mean_gap,stderr_gap\n";
  for (const auto& [key, agg] : groups) {
    const double mean = agg.sum / agg.n;
    double se = 0.0;
    if (agg.n > 1) {
      const double var = std::max(0.0, (agg.sumsq - agg.n * mean * mean) / (agg.n - 1));
      se = std::sqrt(var / agg.n);
    }
    out += key.first + ',' + std::to_string(key.second) + ',' + std::to_string(agg.n) + ',' +
           num_str(mean) + ',' + num_str(se) + '\n';
  }
  return out;
}

}  // namespace ildm
