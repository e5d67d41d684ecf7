#include "mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "rng.hpp"

namespace ildm {

namespace {

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

constexpr double kSimplexTol = 1e-9;

}  // namespace

void validate_mdp(const LayeredMdp& mdp) {
  if (mdp.horizon < 1) throw ValidationError("horizon must be at least 1, got " + std::to_string(mdp.horizon));
  if (static_cast<int>(mdp.layer_sizes.size()) != mdp.horizon)
    throw ValidationError("layer_sizes has " + std::to_string(mdp.layer_sizes.size()) +
                          " entries, expected horizon = " + std::to_string(mdp.horizon));
  for (int h = 0; h < mdp.horizon; ++h)
    if (mdp.layer_sizes[h] < 1)
      throw ValidationError("layer_sizes[" + std::to_string(h) + "] must be at least 1");
  if (mdp.num_actions < 1) throw ValidationError("num_actions must be at least 1");

  const int A = mdp.num_actions;
  if (static_cast<int>(mdp.initial.size()) != mdp.layer_sizes[0])
    throw ValidationError("initial distribution has " + std::to_string(mdp.initial.size()) +
                          " entries, expected " + std::to_string(mdp.layer_sizes[0]));
  double rho_sum = 0.0;
  for (int s = 0; s < mdp.layer_sizes[0]; ++s) {
    double p = mdp.initial[s];
    if (!std::isfinite(p) || p < 0.0)
      throw ValidationError("initial distribution entry for state " + std::to_string(s) +
                            " is " + num(p));
    rho_sum += p;
  }
  if (std::abs(rho_sum - 1.0) > kSimplexTol)
    throw ValidationError("initial distribution sums to " + num(rho_sum));

  if (static_cast<int>(mdp.transitions.size()) != mdp.horizon - 1)
    throw ValidationError("transitions has " + std::to_string(mdp.transitions.size()) +
                          " steps, expected " + std::to_string(mdp.horizon - 1));
  for (int h = 0; h + 1 < mdp.horizon; ++h) {
    const size_t want = static_cast<size_t>(mdp.layer_sizes[h]) * A * mdp.layer_sizes[h + 1];
    if (mdp.transitions[h].size() != want)
      throw ValidationError("transitions[" + std::to_string(h) + "] has " +
                            std::to_string(mdp.transitions[h].size()) + " entries, expected " +
                            std::to_string(want));
    for (int s = 0; s < mdp.layer_sizes[h]; ++s) {
      for (int a = 0; a < A; ++a) {
        double row_sum = 0.0;
        for (int s2 = 0; s2 < mdp.layer_sizes[h + 1]; ++s2) {
          double p = mdp.trans(h, s, a, s2);
          if (!std::isfinite(p) || p < 0.0)
            throw ValidationError("transition probability at (h=" + std::to_string(h) +
                                  ", s=" + std::to_string(s) + ", a=" + std::to_string(a) +
                                  ", s'=" + std::to_string(s2) + ") is " + num(p));
          row_sum += p;
        }
        if (std::abs(row_sum - 1.0) > kSimplexTol)
          throw ValidationError("transition row at (h=" + std::to_string(h) + ", s=" +
                                std::to_string(s) + ", a=" + std::to_string(a) + ") sums to " +
                                num(row_sum));
      }
    }
  }

  if (static_cast<int>(mdp.reward.size()) != mdp.horizon)
    throw ValidationError("reward has " + std::to_string(mdp.reward.size()) +
                          " steps, expected " + std::to_string(mdp.horizon));
  for (int h = 0; h < mdp.horizon; ++h) {
    const size_t want = static_cast<size_t>(mdp.layer_sizes[h]) * A;
    if (mdp.reward[h].size() != want)
      throw ValidationError("reward[" + std::to_string(h) + "] has " +
                            std::to_string(mdp.reward[h].size()) + " entries, expected " +
                            std::to_string(want));
    for (int s = 0; s < mdp.layer_sizes[h]; ++s) {
      for (int a = 0; a < A; ++a) {
        double r = mdp.reward[h][static_cast<size_t>(s) * A + a];
        if (!std::isfinite(r) || r < -kSimplexTol || r > 1.0 + kSimplexTol)
          throw ValidationError("reward at (h=" + std::to_string(h) + ", s=" + std::to_string(s) +
                                ", a=" + std::to_string(a) + ") is " + num(r) +
                                ", outside [0, 1]");
      }
    }
  }
}

double lse(std::span<const double> x, double alpha) {
  if (x.empty()) throw std::invalid_argument("lse of empty vector");
  if (!(alpha > 0.0)) throw std::invalid_argument("lse temperature must be positive");
  double m = x[0];
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double v : x) acc += std::exp((v - m) / alpha);
  return m + alpha * std::log(acc);
}

namespace {

// Writes softmax(x / alpha) into out; stable under large magnitudes.
void softmax_row(std::span<const double> x, double alpha, std::span<double> out) {
  double m = x[0];
  for (double v : x) m = std::max(m, v);
  double acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp((x[i] - m) / alpha);
    acc += out[i];
  }
  for (size_t i = 0; i < x.size(); ++i) out[i] /= acc;
}

}  // namespace

QTable soft_value_iteration(const LayeredMdp& mdp, const RewardTable& r, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("soft_value_iteration temperature must be positive");
  const int H = mdp.horizon;
  const int A = mdp.num_actions;
  QTable q;
  q.alpha = alpha;
  q.q.resize(H);
  std::vector<double> next_v;  // V_{h+1}; empty past the horizon
  for (int h = H - 1; h >= 0; --h) {
    const int S = mdp.layer_sizes[h];
    q.q[h].assign(static_cast<size_t>(S) * A, 0.0);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        double val = r.r[h][static_cast<size_t>(s) * A + a];
        if (h + 1 < H) {
          auto row = mdp.trans_row(h, s, a);
          for (int s2 = 0; s2 < mdp.layer_sizes[h + 1]; ++s2) val += row[s2] * next_v[s2];
        }
        q.q[h][static_cast<size_t>(s) * A + a] = val;
      }
    }
    next_v.resize(S);
    for (int s = 0; s < S; ++s)
      next_v[s] = lse({q.q[h].data() + static_cast<size_t>(s) * A, static_cast<size_t>(A)}, alpha);
  }
  return q;
}

ValueTable state_values(const LayeredMdp& mdp, const QTable& q) {
  const int A = mdp.num_actions;
  ValueTable v;
  v.v.resize(mdp.horizon);
  for (int h = 0; h < mdp.horizon; ++h) {
    const int S = mdp.layer_sizes[h];
    v.v[h].resize(S);
    for (int s = 0; s < S; ++s)
      v.v[h][s] = lse({q.q[h].data() + static_cast<size_t>(s) * A, static_cast<size_t>(A)}, q.alpha);
  }
  return v;
}

TabularPolicy softmax_policy(const LayeredMdp& mdp, const QTable& q) {
  const int A = mdp.num_actions;
  TabularPolicy pi;
  pi.probs.resize(mdp.horizon);
  for (int h = 0; h < mdp.horizon; ++h) {
    const int S = mdp.layer_sizes[h];
    pi.probs[h].assign(static_cast<size_t>(S) * A, 0.0);
    for (int s = 0; s < S; ++s) {
      softmax_row({q.q[h].data() + static_cast<size_t>(s) * A, static_cast<size_t>(A)}, q.alpha,
                  {pi.probs[h].data() + static_cast<size_t>(s) * A, static_cast<size_t>(A)});
    }
  }
  return pi;
}

OccupancyMeasure occupancy(const LayeredMdp& mdp, const TabularPolicy& pi) {
  const int H = mdp.horizon;
  const int A = mdp.num_actions;
  OccupancyMeasure d;
  d.d.resize(H);
  std::vector<double> state_marg(mdp.initial.begin(), mdp.initial.end());
  for (int h = 0; h < H; ++h) {
    const int S = mdp.layer_sizes[h];
    d.d[h].assign(static_cast<size_t>(S) * A, 0.0);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a)
        d.d[h][static_cast<size_t>(s) * A + a] =
            state_marg[s] * pi.probs[h][static_cast<size_t>(s) * A + a];
    if (h + 1 < H) {
      std::vector<double> next(mdp.layer_sizes[h + 1], 0.0);
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
          double mass = d.d[h][static_cast<size_t>(s) * A + a];
          if (mass == 0.0) continue;
          auto row = mdp.trans_row(h, s, a);
          for (int s2 = 0; s2 < mdp.layer_sizes[h + 1]; ++s2) next[s2] += mass * row[s2];
        }
      }
      state_marg = std::move(next);
    }
  }
  return d;
}

double policy_return(const LayeredMdp& mdp, const TabularPolicy& pi) {
  OccupancyMeasure d = occupancy(mdp, pi);
  double total = 0.0;
  for (int h = 0; h < mdp.horizon; ++h)
    for (size_t i = 0; i < d.d[h].size(); ++i) total += d.d[h][i] * mdp.reward[h][i];
  return total;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw std::invalid_argument("tv_distance shape mismatch: " + std::to_string(p.size()) +
                                " vs " + std::to_string(q.size()));
  double acc = 0.0;
  for (size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc;
}

double occupancy_entropy(const Layer& d, int num_actions) {
  if (num_actions < 1 || d.size() % num_actions != 0)
    throw std::invalid_argument("occupancy_entropy table size not divisible by num_actions");
  const int S = static_cast<int>(d.size()) / num_actions;
  double acc = 0.0;
  for (int s = 0; s < S; ++s) {
    double ds = 0.0;
    for (int a = 0; a < num_actions; ++a) ds += d[static_cast<size_t>(s) * num_actions + a];
    if (ds <= 0.0) continue;
    for (int a = 0; a < num_actions; ++a) {
      double dsa = d[static_cast<size_t>(s) * num_actions + a];
      if (dsa > 0.0) acc -= dsa * std::log(dsa / ds);
    }
  }
  return acc;
}

double primal_objective(const LayeredMdp& mdp, const TabularPolicy& pi,
                        const OccupancyMeasure& d_hat, double alpha) {
  OccupancyMeasure d = occupancy(mdp, pi);
  double acc = 0.0;
  for (int h = 0; h < mdp.horizon; ++h)
    acc += tv_distance(d_hat.d[h], d.d[h]) - alpha * occupancy_entropy(d.d[h], mdp.num_actions);
  return acc;
}

double dual_objective(const LayeredMdp& mdp, const RewardTable& r,
                      const OccupancyMeasure& d_hat, double alpha) {
  for (int h = 0; h < mdp.horizon; ++h)
    for (size_t i = 0; i < r.r[h].size(); ++i) {
      double x = r.r[h][i];
      if (!std::isfinite(x) || x < -1e-12 || x > 1.0 + 1e-12)
        throw ValidationError("dual_objective reward entry at step " + std::to_string(h) +
                              ", index " + std::to_string(i) + " is " + num(x) +
                              ", outside [0, 1]");
    }
  QTable q = soft_value_iteration(mdp, r, alpha);
  const int A = mdp.num_actions;
  double rho_value = 0.0;
  for (int s = 0; s < mdp.layer_sizes[0]; ++s)
    rho_value += mdp.initial[s] *
                 lse({q.q[0].data() + static_cast<size_t>(s) * A, static_cast<size_t>(A)}, alpha);
  double demo_reward = 0.0;
  for (int h = 0; h < mdp.horizon; ++h)
    for (size_t i = 0; i < r.r[h].size(); ++i) demo_reward += d_hat.d[h][i] * r.r[h][i];
  return demo_reward - rho_value;
}

RewardTable induced_reward(const LayeredMdp& mdp, const QTable& q) {
  const int H = mdp.horizon;
  const int A = mdp.num_actions;
  RewardTable r;
  r.r.resize(H);
  for (int h = 0; h < H; ++h) {
    const int S = mdp.layer_sizes[h];
    r.r[h].assign(static_cast<size_t>(S) * A, 0.0);
    std::vector<double> next_v;
    if (h + 1 < H) {
      const int S2 = mdp.layer_sizes[h + 1];
      next_v.resize(S2);
      for (int s2 = 0; s2 < S2; ++s2)
        next_v[s2] =
            lse({q.q[h + 1].data() + static_cast<size_t>(s2) * A, static_cast<size_t>(A)}, q.alpha);
    }
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        double val = q.q[h][static_cast<size_t>(s) * A + a];
        if (h + 1 < H) {
          auto row = mdp.trans_row(h, s, a);
          for (int s2 = 0; s2 < mdp.layer_sizes[h + 1]; ++s2) val -= row[s2] * next_v[s2];
        }
        r.r[h][static_cast<size_t>(s) * A + a] = val;
      }
    }
  }
  return r;
}

Trajectory rollout(const LayeredMdp& mdp, const TabularPolicy& pi, Rng& rng) {
  const int A = mdp.num_actions;
  Trajectory traj;
  traj.steps.reserve(mdp.horizon);
  int s = rng.categorical(mdp.initial);
  for (int h = 0; h < mdp.horizon; ++h) {
    int a = rng.categorical(pi.row(h, s, A));
    traj.steps.emplace_back(s, a);
    if (h + 1 < mdp.horizon) s = rng.categorical(mdp.trans_row(h, s, a));
  }
  return traj;
}

TabularPolicy uniform_policy(const LayeredMdp& mdp) {
  TabularPolicy pi;
  pi.probs.resize(mdp.horizon);
  for (int h = 0; h < mdp.horizon; ++h)
    pi.probs[h].assign(static_cast<size_t>(mdp.layer_sizes[h]) * mdp.num_actions,
                       1.0 / mdp.num_actions);
  return pi;
}

TabularPolicy deterministic_policy(const LayeredMdp& mdp,
                                   const std::vector<std::vector<int>>& actions) {
  const int A = mdp.num_actions;
  if (static_cast<int>(actions.size()) != mdp.horizon) {
    throw PreconditionError("deterministic_policy: need one action table per step");
  }
  TabularPolicy pi;
  pi.probs.resize(mdp.horizon);
  for (int h = 0; h < mdp.horizon; ++h) {
    const int S = mdp.layer_sizes[h];
    if (static_cast<int>(actions[h].size()) != S) {
      throw PreconditionError("deterministic_policy: action table size mismatch at step " +
                              std::to_string(h + 1));
    }
    pi.probs[h].assign(static_cast<size_t>(S) * A, 0.0);
    for (int s = 0; s < S; ++s) {
      const int a = actions[h][s];
      if (a < 0 || a >= A) {
        throw PreconditionError("deterministic_policy: action index " + std::to_string(a) +
                                " out of range at step " + std::to_string(h + 1));
      }
      pi.probs[h][static_cast<size_t>(s) * A + a] = 1.0;
    }
  }
  return pi;
}

}  // namespace ildm
