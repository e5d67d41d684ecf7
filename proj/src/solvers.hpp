#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "demos.hpp"
#include "mdp.hpp"

// Learners. All of them are exact full-batch procedures on dense per-step
// tables; the only sampling is demo collection and, for the online variants,
// replay rollouts under the current policy.

namespace ildm {

enum class Method {
  kBc,
  kIqTv,
  kIqChi2,
  kIqReg,
  kValueDice,
  kDualQdmExact,
  kDualQdmPenalty,
  kAil,
};

enum class IqVariant { kTv, kChi2, kReg };

const char* method_name(Method m);
std::optional<Method> parse_method(const std::string& name);

struct SolverConfig {
  double alpha = 1.0;
  // 0 means the per-method default: 0.5 for reward-space ascent
  // (dual_qdm_exact, ail), 0.1 for Q-space ascent (everything else).
  double learning_rate = 0.0;
  int max_iters = 20000;
  // 0 means the per-method default: 1e-8 for exact solvers, 1e-5 for the
  // penalty solver. Convergence is projected-gradient infinity norm <= tol.
  double grad_tol = 0.0;
  double beta = 100.0;      // penalty weight
  double polyak_tau = 0.5;  // target-table mixing rate
  int online_rollouts_per_iter = 1;
  uint64_t seed = 0;
  double q_init = 0.0;
  std::optional<double> q_box_C;  // when set, Q entries are clipped to [0, C]
  bool record_trace = false;
};

struct TraceRow {
  int iter;
  double objective;
  double grad_norm;
};

struct SolveResult {
  Method method = Method::kBc;
  SolverConfig config;  // resolved: learning_rate and grad_tol filled in
  bool converged = false;
  int iters = 0;
  double final_objective = 0.0;
  double final_grad_norm = 0.0;
  TabularPolicy policy;
  std::optional<RewardTable> reward;  // reward-space solvers
  std::optional<QTable> q;            // Q-space solvers and the dual pair
  std::vector<TraceRow> trace;
};

/// Count-ratio policy; uniform at states with no demo visits.
SolveResult bc_fit(const LayeredMdp& mdp, const DemoDataset& demo);

/// Gradient ascent on the inverse-soft-Q demo objective
///   E_demo[ sum_h Q(s_h, a_h) - lse(Q)(s_{h+1}) ] - E_rho[ lse(Q)(s_1) ],
/// with the step-past-horizon lse defined as 0 and the rho term exact.
/// kChi2 subtracts 1/4 E_demo[ sum_h (Q - lse(Q)(s_{h+1}))^2 ]; kReg
/// subtracts the same square averaged over a growing online replay buffer.
SolveResult iq_learn_fit(const LayeredMdp& mdp, const DemoDataset& demo, IqVariant variant,
                         const SolverConfig& cfg);

/// Ascent on -log E_demo[ sum_h exp(-Q(s_h,a_h) + max_a Q(s_{h+1}, a)) ]
/// - E_rho[ max_a Q(s_1, a) ], temperature-free, with uniform subgradient
/// split across exact argmax ties. Returns the greedy policy, uniform over
/// the argmax set.
SolveResult value_dice_fit(const LayeredMdp& mdp, const DemoDataset& demo,
                           const SolverConfig& cfg);

/// Projected gradient ascent on the box-constrained dual of occupancy
/// matching: gradient is (empirical occupancy - occupancy of the current
/// soft-optimal policy), rewards clipped to [0, 1] every step. Returns the
/// final reward, its soft Q table, and the softmax policy.
SolveResult dual_qdm_exact(const LayeredMdp& mdp, const DemoDataset& demo,
                           const SolverConfig& cfg);

/// Same iteration as dual_qdm_exact run under the adversarial-IL label; the
/// trace records the saddle value through the policy side,
///   E_demo[ sum r ] - ( E_pi[ sum r ] + alpha * sum_h action entropy ).
SolveResult ail_fit(const LayeredMdp& mdp, const DemoDataset& demo, const SolverConfig& cfg);

/// Replay-buffer form: ascends the demo objective minus
///   beta * E_buffer[ relu(lse(Qbar)(s') - Q)^2 + relu(Q - lse(Qbar)(s') - 1)^2 ],
/// rolling out the current softmax policy into an append-only buffer each
/// iteration and tracking the target table Qbar by Polyak averaging.
SolveResult dual_qdm_penalty(const LayeredMdp& mdp, const DemoDataset& demo,
                             const SolverConfig& cfg);

SolveResult solve(const LayeredMdp& mdp, const DemoDataset& demo, Method method,
                  const SolverConfig& cfg);

/// Exact objective evaluators at arbitrary tables, shared with the finite-
/// difference gradient checks. Only the fixed-data variants are exposed.
double iq_objective(const LayeredMdp& mdp, const DemoDataset& demo, const QTable& q,
                    IqVariant variant);
std::vector<Layer> iq_gradient(const LayeredMdp& mdp, const DemoDataset& demo, const QTable& q,
                               IqVariant variant);

double value_dice_objective(const LayeredMdp& mdp, const DemoDataset& demo, const QTable& q);
std::vector<Layer> value_dice_subgradient(const LayeredMdp& mdp, const DemoDataset& demo,
                                          const QTable& q);

/// d_hat minus the occupancy of the soft-optimal policy for r, the exact
/// ascent direction of the dual objective.
std::vector<Layer> dual_gradient(const LayeredMdp& mdp, const OccupancyMeasure& d_hat,
                                 const RewardTable& r, double alpha);

}  // namespace ildm
