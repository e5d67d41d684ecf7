#include "demos.hpp"

#include <map>
#include <tuple>

#include "rng.hpp"

namespace ildm {

void rebuild_demo_caches(DemoDataset& demo, const LayeredMdp& mdp) {
  const int H = mdp.horizon;
  const int A = mdp.num_actions;
  demo.horizon = H;
  demo.layer_sizes = mdp.layer_sizes;
  demo.num_actions = A;
  demo.num_trajectories = static_cast<int>(demo.trajectories.size());
  if (demo.num_trajectories == 0) throw ValidationError("demo dataset has no trajectories");

  demo.state_counts.assign(H, {});
  demo.pair_counts.assign(H, {});
  demo.d_hat.d.assign(H, {});
  for (int h = 0; h < H; ++h) {
    demo.state_counts[h].assign(mdp.layer_sizes[h], 0);
    demo.pair_counts[h].assign(static_cast<size_t>(mdp.layer_sizes[h]) * A, 0);
    demo.d_hat.d[h].assign(static_cast<size_t>(mdp.layer_sizes[h]) * A, 0.0);
  }
  demo.trans_counts.assign(H > 0 ? H - 1 : 0, {});

  std::vector<std::map<std::tuple<int, int, int>, int>> trans(H > 0 ? H - 1 : 0);
  for (size_t i = 0; i < demo.trajectories.size(); ++i) {
    const auto& traj = demo.trajectories[i];
    if (static_cast<int>(traj.steps.size()) != H)
      throw ValidationError("trajectory " + std::to_string(i) + " has " +
                            std::to_string(traj.steps.size()) + " steps, expected " +
                            std::to_string(H));
    for (int h = 0; h < H; ++h) {
      auto [s, a] = traj.steps[h];
      if (s < 0 || s >= mdp.layer_sizes[h])
        throw ValidationError("trajectory " + std::to_string(i) + " step " + std::to_string(h) +
                              " state " + std::to_string(s) + " out of range");
      if (a < 0 || a >= A)
        throw ValidationError("trajectory " + std::to_string(i) + " step " + std::to_string(h) +
                              " action " + std::to_string(a) + " out of range");
      demo.state_counts[h][s] += 1;
      demo.pair_counts[h][static_cast<size_t>(s) * A + a] += 1;
      if (h + 1 < H) {
        int s2 = traj.steps[h + 1].first;
        trans[h][{s, a, s2}] += 1;
      }
    }
  }
  const double n = demo.num_trajectories;
  for (int h = 0; h < H; ++h)
    for (size_t i = 0; i < demo.pair_counts[h].size(); ++i)
      demo.d_hat.d[h][i] = demo.pair_counts[h][i] / n;
  for (int h = 0; h + 1 < H; ++h) {
    demo.trans_counts[h].reserve(trans[h].size());
    for (const auto& [key, count] : trans[h]) {
      auto [s, a, s2] = key;
      demo.trans_counts[h].push_back({s, a, s2, count});
    }
  }
}

DemoDataset collect_demos(const LayeredMdp& mdp, const TabularPolicy& expert, int n,
                          uint64_t seed) {
  if (n < 1) throw std::invalid_argument("collect_demos needs at least one trajectory");
  DemoDataset demo;
  demo.seed = seed;
  Rng rng(seed);
  demo.trajectories.reserve(n);
  for (int i = 0; i < n; ++i) demo.trajectories.push_back(rollout(mdp, expert, rng));
  rebuild_demo_caches(demo, mdp);
  return demo;
}

DemoDataset demos_from_trajectories(const LayeredMdp& mdp, std::vector<Trajectory> trajectories) {
  DemoDataset demo;
  demo.trajectories = std::move(trajectories);
  rebuild_demo_caches(demo, mdp);
  return demo;
}

const OccupancyMeasure& empirical_occupancy(const DemoDataset& demo) { return demo.d_hat; }

namespace {

void check_query(const DemoDataset& demo, int h, int s, int a) {
  if (h < 0 || h >= demo.horizon)
    throw std::out_of_range("demo query step " + std::to_string(h) + " outside horizon " +
                            std::to_string(demo.horizon));
  if (s < 0 || s >= demo.layer_sizes[h])
    throw std::out_of_range("demo query state " + std::to_string(s) + " outside layer " +
                            std::to_string(h));
  if (a < -1 || a >= demo.num_actions)
    throw std::out_of_range("demo query action " + std::to_string(a) + " out of range");
}

}  // namespace

bool visited(const DemoDataset& demo, int h, int s) {
  check_query(demo, h, s, -1);
  return demo.state_counts[h][s] > 0;
}

bool visited_pair(const DemoDataset& demo, int h, int s, int a) {
  check_query(demo, h, s, a >= 0 ? a : 0);
  if (a < 0) throw std::out_of_range("demo pair query with negative action");
  return demo.pair_counts[h][static_cast<size_t>(s) * demo.num_actions + a] > 0;
}

}  // namespace ildm
