#include "instances.hpp"

#include <algorithm>
#include <cmath>

#include "rng.hpp"

namespace ildm {

InstancePair reset_cliff(const ResetCliffSpec& spec) {
  if (spec.S < 2) throw std::invalid_argument("reset_cliff needs at least 2 states per layer");
  if (spec.A < 1) throw std::invalid_argument("reset_cliff needs at least 1 action");
  if (spec.H < 1) throw std::invalid_argument("reset_cliff needs a positive horizon");
  if (spec.N < 1) throw std::invalid_argument("reset_cliff needs a positive trajectory count");
  if (spec.S - 2 > spec.N + 1)
    throw std::invalid_argument("reset_cliff requires S - 2 <= N + 1, got S = " +
                                std::to_string(spec.S) + ", N = " + std::to_string(spec.N));
  const int S = spec.S, A = spec.A, H = spec.H;
  const int bad = S - 1;

  std::vector<double> rho(S, 0.0);
  for (int s = 0; s < S - 2; ++s) rho[s] = 1.0 / (spec.N + 1);
  rho[S - 2] = 1.0 - static_cast<double>(S - 2) / (spec.N + 1);
  rho[bad] = 0.0;

  LayeredMdp mdp;
  mdp.horizon = H;
  mdp.layer_sizes.assign(H, S);
  mdp.num_actions = A;
  mdp.initial = rho;
  mdp.transitions.resize(H - 1);
  mdp.reward.resize(H);
  for (int h = 0; h < H; ++h) {
    mdp.reward[h].assign(static_cast<size_t>(S) * A, 0.0);
    for (int s = 0; s < S - 1; ++s) mdp.reward[h][static_cast<size_t>(s) * A + 0] = 1.0;
  }
  for (int h = 0; h + 1 < H; ++h) {
    auto& t = mdp.transitions[h];
    t.assign(static_cast<size_t>(S) * A * S, 0.0);
    auto row = [&](int s, int a) { return (static_cast<size_t>(s) * A + a) * S; };
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        if (s != bad && a == 0) {
          for (int s2 = 0; s2 < S; ++s2) t[row(s, a) + s2] = rho[s2];
        } else {
          t[row(s, a) + bad] = 1.0;
        }
      }
    }
  }
  validate_mdp(mdp);

  TabularPolicy expert;
  expert.probs.resize(H);
  for (int h = 0; h < H; ++h) {
    expert.probs[h].assign(static_cast<size_t>(S) * A, 0.0);
    for (int s = 0; s < S; ++s) expert.probs[h][static_cast<size_t>(s) * A + 0] = 1.0;
  }
  return {std::move(mdp), std::move(expert)};
}

double reset_cliff_epsilon(int S, int N) {
  std::vector<double> rho(S, 0.0);
  for (int s = 0; s < S - 2; ++s) rho[s] = 1.0 / (N + 1);
  rho[S - 2] = 1.0 - static_cast<double>(S - 2) / (N + 1);
  double eps = 0.0;
  for (int s = 0; s < S - 1; ++s) eps += rho[s] * std::pow(1.0 - rho[s], N);
  return eps;
}

double reset_cliff_epsilon_lower_bound(int S, int N) {
  return (S - 2) / (std::exp(1.0) * (N + 1));
}

ExampleD5 example_d5() {
  LayeredMdp mdp;
  mdp.horizon = 2;
  mdp.layer_sizes = {2, 2};
  mdp.num_actions = 2;
  mdp.initial = {0.5, 0.5};
  mdp.transitions.resize(1);
  mdp.transitions[0].assign(2 * 2 * 2, 0.0);
  // Action a at either first-layer state reaches second-layer state a.
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) mdp.transitions[0][(static_cast<size_t>(s) * 2 + a) * 2 + a] = 1.0;
  mdp.reward.assign(2, Layer(4, 0.0));
  validate_mdp(mdp);

  TabularPolicy expert;
  expert.probs.assign(2, Layer(4, 0.0));
  for (int h = 0; h < 2; ++h)
    for (int s = 0; s < 2; ++s) expert.probs[h][static_cast<size_t>(s) * 2 + 0] = 1.0;

  Trajectory traj;
  traj.steps = {{0, 0}, {0, 0}};
  DemoDataset demo = demos_from_trajectories(mdp, {traj});
  return {std::move(mdp), std::move(expert), std::move(demo)};
}

InstancePair random_layered_mdp(const std::vector<int>& layer_sizes, int num_actions, Rng& rng,
                                ExpertKind expert_kind) {
  if (layer_sizes.empty()) throw std::invalid_argument("random_layered_mdp needs layers");
  for (int s : layer_sizes)
    if (s < 1) throw std::invalid_argument("random_layered_mdp layer sizes must be positive");
  if (num_actions < 1) throw std::invalid_argument("random_layered_mdp needs actions");
  const int H = static_cast<int>(layer_sizes.size());
  const int A = num_actions;

  LayeredMdp mdp;
  mdp.horizon = H;
  mdp.layer_sizes = layer_sizes;
  mdp.num_actions = A;
  mdp.initial.resize(layer_sizes[0]);
  rng.dirichlet(mdp.initial);
  mdp.transitions.resize(H - 1);
  for (int h = 0; h + 1 < H; ++h) {
    mdp.transitions[h].resize(static_cast<size_t>(layer_sizes[h]) * A * layer_sizes[h + 1]);
    for (int s = 0; s < layer_sizes[h]; ++s)
      for (int a = 0; a < A; ++a)
        rng.dirichlet({mdp.transitions[h].data() +
                           (static_cast<size_t>(s) * A + a) * layer_sizes[h + 1],
                       static_cast<size_t>(layer_sizes[h + 1])});
  }
  mdp.reward.resize(H);
  for (int h = 0; h < H; ++h) {
    mdp.reward[h].resize(static_cast<size_t>(layer_sizes[h]) * A);
    for (double& r : mdp.reward[h]) r = rng.uniform();
  }
  validate_mdp(mdp);

  TabularPolicy expert;
  expert.probs.resize(H);
  for (int h = 0; h < H; ++h) {
    expert.probs[h].assign(static_cast<size_t>(layer_sizes[h]) * A, 0.0);
    for (int s = 0; s < layer_sizes[h]; ++s) {
      int a = expert_kind == ExpertKind::kAction0 ? 0 : rng.uniform_int(A);
      expert.probs[h][static_cast<size_t>(s) * A + a] = 1.0;
    }
  }
  return {std::move(mdp), std::move(expert)};
}

// Deterministic action per (h, s); throws if a row is not (numerically) one-hot.
std::vector<std::vector<int>> expert_actions(const LayeredMdp& mdp, const TabularPolicy& expert) {
  std::vector<std::vector<int>> actions(mdp.horizon);
  for (int h = 0; h < mdp.horizon; ++h) {
    actions[h].resize(mdp.layer_sizes[h]);
    for (int s = 0; s < mdp.layer_sizes[h]; ++s) {
      auto row = expert.row(h, s, mdp.num_actions);
      int best = -1;
      for (int a = 0; a < mdp.num_actions; ++a) {
        if (row[a] > 1.0 - 1e-9) best = a;
        else if (row[a] > 1e-9)
          throw PreconditionError("expert policy is not deterministic at step " +
                                  std::to_string(h) + ", state " + std::to_string(s));
      }
      if (best < 0)
        throw PreconditionError("expert policy row does not select an action at step " +
                                std::to_string(h) + ", state " + std::to_string(s));
      actions[h][s] = best;
    }
  }
  return actions;
}

TdMdpReport is_td_mdp(const LayeredMdp& mdp, const TabularPolicy& expert) {
  const int H = mdp.horizon;
  auto ae = expert_actions(mdp, expert);

  TdMdpReport report;
  report.expert_reachable.resize(H);
  std::vector<std::vector<bool>> reach(H);
  reach[0].assign(mdp.layer_sizes[0], false);
  for (int s = 0; s < mdp.layer_sizes[0]; ++s) reach[0][s] = mdp.initial[s] > 0.0;
  for (int h = 0; h + 1 < H; ++h) {
    reach[h + 1].assign(mdp.layer_sizes[h + 1], false);
    for (int s = 0; s < mdp.layer_sizes[h]; ++s)
      for (int s2 = 0; s2 < mdp.layer_sizes[h + 1]; ++s2)
        if (mdp.trans(h, s, ae[h][s], s2) > 0.0) reach[h + 1][s2] = true;
  }
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < mdp.layer_sizes[h]; ++s)
      if (reach[h][s]) report.expert_reachable[h].push_back(s);

  report.is_td = true;
  for (int h = 0; h + 1 < H && report.is_td; ++h) {
    // Property 1: strict per-target dominance of the expert action.
    for (int s = 0; s < mdp.layer_sizes[h] && report.is_td; ++s) {
      for (int s2 : report.expert_reachable[h + 1]) {
        double pe = mdp.trans(h, s, ae[h][s], s2);
        for (int a = 0; a < mdp.num_actions; ++a) {
          if (a == ae[h][s]) continue;
          if (!(pe > mdp.trans(h, s, a, s2))) {
            report.is_td = false;
            report.violation = TdViolation{
                1, h, s, a, s2, 0,
                "property 1 fails at h=" + std::to_string(h) + ", s=" + std::to_string(s) +
                    ": action " + std::to_string(a) + " reaches expert state " +
                    std::to_string(s2) + " with probability >= the expert action"};
            break;
          }
        }
        if (!report.is_td) break;
      }
    }
    if (!report.is_td) break;
    // Property 2: expert-reachable sources dominate the rest per target.
    for (int s2 : report.expert_reachable[h + 1]) {
      for (int a = 0; a < mdp.num_actions; ++a) {
        double worst_reachable = 2.0;
        int worst_re = -1;
        double best_outside = -1.0;
        int best_out = -1;
        for (int s = 0; s < mdp.layer_sizes[h]; ++s) {
          double p = mdp.trans(h, s, a, s2);
          if (reach[h][s]) {
            if (p < worst_reachable) worst_reachable = p, worst_re = s;
          } else {
            if (p > best_outside) best_outside = p, best_out = s;
          }
        }
        if (best_out >= 0 && worst_re >= 0 && worst_reachable < best_outside) {
          report.is_td = false;
          report.violation = TdViolation{
              2, h, worst_re, a, s2, best_out,
              "property 2 fails at h=" + std::to_string(h) + ": non-reachable state " +
                  std::to_string(best_out) + " reaches expert state " + std::to_string(s2) +
                  " under action " + std::to_string(a) + " with higher probability than state " +
                  std::to_string(worst_re)};
          break;
        }
      }
      if (!report.is_td) break;
    }
  }
  return report;
}

InstancePair random_td_mdp(const std::vector<int>& layer_sizes, int num_actions, Rng& rng) {
  if (layer_sizes.empty()) throw std::invalid_argument("random_td_mdp needs layers");
  if (layer_sizes[0] < 1) throw std::invalid_argument("random_td_mdp first layer must be nonempty");
  for (size_t h = 1; h < layer_sizes.size(); ++h)
    if (layer_sizes[h] < 2)
      throw std::invalid_argument("random_td_mdp layers beyond the first need >= 2 states");
  if (num_actions < 1) throw std::invalid_argument("random_td_mdp needs actions");
  const int H = static_cast<int>(layer_sizes.size());
  const int A = num_actions;

  // Tiered proposal. Expert rows within a step are identical and supported on
  // a proper subset E of the next layer; non-expert rows put clearly less mass
  // on E, with another tier split between reachable and unreachable sources,
  // so both dominance properties hold by construction. Rejection via
  // is_td_mdp guards the jitter margins.
  for (int attempt = 0; attempt < 100; ++attempt) {
    LayeredMdp mdp;
    mdp.horizon = H;
    mdp.layer_sizes = layer_sizes;
    mdp.num_actions = A;
    mdp.initial.resize(layer_sizes[0]);
    rng.dirichlet(mdp.initial);
    // Keep every start state in the support with nontrivial mass.
    for (double& p : mdp.initial) p = 0.5 * p + 0.5 / layer_sizes[0];

    std::vector<std::vector<bool>> in_e(H);
    in_e[0].assign(layer_sizes[0], true);  // support of rho is everything
    mdp.transitions.resize(H - 1);
    for (int h = 0; h + 1 < H; ++h) {
      const int S2 = layer_sizes[h + 1];
      const int k = 1 + rng.uniform_int(S2 - 1);  // |E| in [1, S2-1]
      in_e[h + 1].assign(S2, false);
      for (int j = 0; j < k; ++j) in_e[h + 1][j] = true;

      std::vector<double> expert_row(S2, 0.0);
      {
        double total = 0.0;
        for (int j = 0; j < k; ++j) {
          expert_row[j] = 1.0 + 0.04 * (rng.uniform() - 0.5);
          total += expert_row[j];
        }
        for (int j = 0; j < k; ++j) expert_row[j] /= total;
      }

      mdp.transitions[h].assign(static_cast<size_t>(layer_sizes[h]) * A * S2, 0.0);
      for (int s = 0; s < layer_sizes[h]; ++s) {
        for (int a = 0; a < A; ++a) {
          std::span<double> row{mdp.transitions[h].data() + (static_cast<size_t>(s) * A + a) * S2,
                                static_cast<size_t>(S2)};
          if (a == 0) {
            std::copy(expert_row.begin(), expert_row.end(), row.begin());
            continue;
          }
          const double tier = in_e[h][s] ? 0.40 : 0.20;
          double total = 0.0;
          for (int j = 0; j < k; ++j) {
            row[j] = 1.0 + 0.04 * (rng.uniform() - 0.5);
            total += row[j];
          }
          for (int j = 0; j < k; ++j) row[j] *= tier / total;
          total = 0.0;
          for (int j = k; j < S2; ++j) {
            row[j] = rng.exponential() + 0.05;
            total += row[j];
          }
          for (int j = k; j < S2; ++j) row[j] *= (1.0 - tier) / total;
        }
      }
    }
    mdp.reward.resize(H);
    for (int h = 0; h < H; ++h) {
      mdp.reward[h].resize(static_cast<size_t>(layer_sizes[h]) * A);
      for (double& r : mdp.reward[h]) r = rng.uniform();
    }
    validate_mdp(mdp);

    TabularPolicy expert;
    expert.probs.resize(H);
    for (int h = 0; h < H; ++h) {
      expert.probs[h].assign(static_cast<size_t>(layer_sizes[h]) * A, 0.0);
      for (int s = 0; s < layer_sizes[h]; ++s) expert.probs[h][static_cast<size_t>(s) * A + 0] = 1.0;
    }
    if (is_td_mdp(mdp, expert).is_td) return {std::move(mdp), std::move(expert)};
  }
  throw std::runtime_error("random_td_mdp rejection sampling failed to produce an instance");
}

}  // namespace ildm
