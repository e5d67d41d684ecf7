#pragma once

#include <optional>
#include <string>
#include <vector>

#include "demos.hpp"
#include "mdp.hpp"

// Instance constructions: the reset-cliff family, the fixed two-step worked
// example, random layered MDPs, and the transition-dominance (TD) structure
// check with its rejection-sampling generator.

namespace ildm {

class Rng;

/// Reset-cliff family. Every layer has S states; the last index per layer is
/// the absorbing-chain "bad" state. The expert action (index 0) at a non-bad
/// state pays reward 1 and resets the next state to the initial distribution
/// rho = (1/(N+1), ..., 1/(N+1), 1 - (S-2)/(N+1), 0). Every other action, and
/// every action at a bad state, pays 0 and leads to the next bad state.
/// Requires S - 2 <= N + 1 so rho stays a distribution.
struct ResetCliffSpec {
  int S = 4;
  int A = 5;
  int H = 10;
  int N = 2;
};

struct InstancePair {
  LayeredMdp mdp;
  TabularPolicy expert;
};

InstancePair reset_cliff(const ResetCliffSpec& spec);

/// Per-step probability that the expert's fresh rho-draw lands on a state
/// covered by none of N trajectories: sum_s rho(s) (1 - rho(s))^N.
double reset_cliff_epsilon(int S, int N);

/// Lower bound (S-2) / (e (N+1)) on reset_cliff_epsilon.
double reset_cliff_epsilon_lower_bound(int S, int N);

/// Temperature used throughout for the fixed two-step example.
inline constexpr double kD5Alpha = 0.1;

struct ExampleD5 {
  LayeredMdp mdp;
  TabularPolicy expert;
  DemoDataset demo;
};

/// Two layers of two states, two actions, uniform start over layer one.
/// Action 0 from either first-layer state leads to second-layer state 0,
/// action 1 to second-layer state 1. The demo is the single trajectory
/// (state 0, action 0), (state 0, action 0). True reward is identically 0;
/// the instance exists for distribution matching, not for return.
ExampleD5 example_d5();

enum class ExpertKind {
  kAction0,       // deterministic expert, action 0 at every state
  kRandomAction,  // deterministic expert with a random action per state
};

/// Random layered MDP: flat-Dirichlet transition rows and initial
/// distribution, uniform [0, 1] rewards, deterministic expert.
InstancePair random_layered_mdp(const std::vector<int>& layer_sizes, int num_actions, Rng& rng,
                                ExpertKind expert_kind = ExpertKind::kAction0);

struct TdViolation {
  int property = 0;  // 1 or 2
  int h = 0;
  int s = 0, a = 0, s2 = 0;
  int s_other = 0;  // property 2: the non-reachable source being compared
  std::string message;
};

struct TdMdpReport {
  bool is_td = false;
  std::vector<std::vector<int>> expert_reachable;  // per step, sorted state ids
  std::optional<TdViolation> violation;
};

/// Per-step action index of a deterministic policy. Throws PreconditionError
/// when any row is not one-hot.
std::vector<std::vector<int>> expert_actions(const LayeredMdp& mdp, const TabularPolicy& expert);

/// Checks the two transition-dominance properties. Expert-reachable sets are
/// the support of the initial distribution at step 0 and, afterwards, the
/// union of expert-action successor supports over all previous-layer states.
/// Property 1: at every state, the expert action reaches each expert-reachable
/// next state with strictly higher probability than any other action does.
/// Property 2: under any action, expert-reachable source states reach each
/// expert-reachable next state with at least the probability any
/// non-reachable source does. The expert policy must be deterministic.
TdMdpReport is_td_mdp(const LayeredMdp& mdp, const TabularPolicy& expert);

/// Rejection sampler: proposes layered MDPs whose transition tiers are
/// built to satisfy both dominance properties, then keeps the first proposal
/// is_td_mdp accepts. Layers beyond the first need at least two states.
InstancePair random_td_mdp(const std::vector<int>& layer_sizes, int num_actions, Rng& rng);

}  // namespace ildm
