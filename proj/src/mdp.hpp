#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Core types and exact operations for finite-horizon layered MDPs.
// A layered MDP has disjoint state sets per step; step h in [0, H) has
// layer_sizes[h] states, indexed 0..layer_sizes[h]-1 within the layer.
// All (state, action) tables for one step are stored flat as s * A + a.

namespace ildm {

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat per-step table over (state, action) pairs: entry index is s * A + a.
using Layer = std::vector<double>;

struct LayeredMdp {
  int horizon = 0;
  std::vector<int> layer_sizes;  // one entry per step
  int num_actions = 0;
  std::vector<double> initial;  // distribution over layer 0 states
  // transitions[h] maps (s, a) at step h to a distribution over step h+1
  // states; flat index (s * A + a) * layer_sizes[h+1] + s2. Size horizon-1.
  std::vector<std::vector<double>> transitions;
  std::vector<Layer> reward;  // reward[h][s * A + a], entries in [0, 1]

  int layer_size(int h) const { return layer_sizes[h]; }
  double trans(int h, int s, int a, int s2) const {
    return transitions[h][(static_cast<size_t>(s) * num_actions + a) * layer_sizes[h + 1] + s2];
  }
  std::span<const double> trans_row(int h, int s, int a) const {
    return {transitions[h].data() +
                (static_cast<size_t>(s) * num_actions + a) * layer_sizes[h + 1],
            static_cast<size_t>(layer_sizes[h + 1])};
  }
};

struct TabularPolicy {
  std::vector<Layer> probs;  // probs[h][s * A + a], rows sum to 1

  std::span<const double> row(int h, int s, int num_actions) const {
    return {probs[h].data() + static_cast<size_t>(s) * num_actions,
            static_cast<size_t>(num_actions)};
  }
};

struct OccupancyMeasure {
  std::vector<Layer> d;  // d[h][s * A + a], each layer sums to 1
};

struct QTable {
  std::vector<Layer> q;
  double alpha = 1.0;  // temperature the table was built for
};

struct RewardTable {
  std::vector<Layer> r;
};

struct ValueTable {
  std::vector<std::vector<double>> v;  // v[h][s]
};

/// One episode: (state, action) per step, length = horizon.
struct Trajectory {
  std::vector<std::pair<int, int>> steps;
};

class Rng;

/// Throws ValidationError naming the first violated invariant and its location.
void validate_mdp(const LayeredMdp& mdp);

/// Temperature log-sum-exp: alpha * log(sum_i exp(x_i / alpha)).
/// Computed with max subtraction; exact for alpha -> max as written.
/// Requires alpha > 0 and a nonempty input.
double lse(std::span<const double> x, double alpha);

/// Backward recursion for the entropy-regularized control problem:
/// V_H == 0, Q_h = r_h + P_h V_{h+1}, V_h(s) = lse(Q_h(s, .), alpha).
QTable soft_value_iteration(const LayeredMdp& mdp, const RewardTable& r, double alpha);

/// State values induced by a Q table: v[h][s] = lse(q[h][s, .], q.alpha).
ValueTable state_values(const LayeredMdp& mdp, const QTable& q);

/// pi(a | s) proportional to exp(q(s, a) / alpha), computed stably.
TabularPolicy softmax_policy(const LayeredMdp& mdp, const QTable& q);

/// Forward recursion for per-step state-action occupancies d^pi.
OccupancyMeasure occupancy(const LayeredMdp& mdp, const TabularPolicy& pi);

/// Exact expected return of pi under the MDP's own reward.
double policy_return(const LayeredMdp& mdp, const TabularPolicy& pi);

/// Total variation distance, half the L1 difference. Shapes must match.
double tv_distance(std::span<const double> p, std::span<const double> q);

/// Conditional action entropy of a state-action measure:
/// sum_{s,a} d(s,a) * -log(d(s,a) / d(s)), with 0 log 0 = 0.
double occupancy_entropy(const Layer& d, int num_actions);

/// sum_h [ TV(d_hat_h, d^pi_h) - alpha * occupancy_entropy(d^pi_h) ].
double primal_objective(const LayeredMdp& mdp, const TabularPolicy& pi,
                        const OccupancyMeasure& d_hat, double alpha);

/// sum_h <d_hat_h, r_h> - E_{s ~ initial}[ V^{*,soft,r}(s) ].
/// Requires r inside the unit box; throws ValidationError otherwise.
double dual_objective(const LayeredMdp& mdp, const RewardTable& r,
                      const OccupancyMeasure& d_hat, double alpha);

/// Inverse of soft_value_iteration:
/// r(h,s,a) = q(h,s,a) - sum_{s'} P(s'|s,a) lse(q_{h+1}(s',.), alpha),
/// with the last step mapping to q itself.
RewardTable induced_reward(const LayeredMdp& mdp, const QTable& q);

/// Samples one episode of length horizon under pi.
Trajectory rollout(const LayeredMdp& mdp, const TabularPolicy& pi, Rng& rng);

/// Uniform policy, used as the off-support fallback convention.
TabularPolicy uniform_policy(const LayeredMdp& mdp);

/// Deterministic policy from per-step action index tables.
TabularPolicy deterministic_policy(const LayeredMdp& mdp,
                                   const std::vector<std::vector<int>>& actions);

}  // namespace ildm
