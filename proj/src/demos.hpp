#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdp.hpp"

// Demonstration datasets: trajectories plus the count tables every learner
// consumes. Counts and empirical occupancies are derived data, rebuilt
// whenever trajectories change (collection or load).

namespace ildm {

struct DemoDataset {
  int num_trajectories = 0;
  uint64_t seed = 0;          // collection seed; 0 for hand-built sets
  std::string mdp_hash;       // stamped by the serializer, checked on load
  std::vector<Trajectory> trajectories;

  // Shape copied from the generating MDP, used for query validation.
  int horizon = 0;
  std::vector<int> layer_sizes;
  int num_actions = 0;

  // Derived tables.
  OccupancyMeasure d_hat;                         // pair counts / N
  std::vector<std::vector<int>> state_counts;     // [h][s]
  std::vector<std::vector<int>> pair_counts;      // [h][s * A + a]
  struct TransCount {
    int s, a, s2, count;
  };
  std::vector<std::vector<TransCount>> trans_counts;  // per step in [0, H-2]
};

/// Validates trajectory indices against the MDP and rebuilds all derived
/// tables. Throws ValidationError on malformed trajectories.
void rebuild_demo_caches(DemoDataset& demo, const LayeredMdp& mdp);

/// Rolls out n episodes of the expert policy with a dedicated stream.
DemoDataset collect_demos(const LayeredMdp& mdp, const TabularPolicy& expert, int n,
                          uint64_t seed);

/// Builds a dataset from explicit trajectories (hand-written fixtures).
DemoDataset demos_from_trajectories(const LayeredMdp& mdp, std::vector<Trajectory> trajectories);

/// Per-layer pair frequencies n(h,s,a) / N; each layer sums to 1.
const OccupancyMeasure& empirical_occupancy(const DemoDataset& demo);

/// Whether state s appears at step h in any trajectory. Throws on
/// out-of-range queries.
bool visited(const DemoDataset& demo, int h, int s);

/// Whether the pair (s, a) appears at step h in any trajectory.
bool visited_pair(const DemoDataset& demo, int h, int s, int a);

}  // namespace ildm
