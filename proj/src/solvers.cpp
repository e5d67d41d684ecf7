#include "solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <tuple>
#include <utility>

#include "rng.hpp"

namespace ildm {

namespace {

struct MethodInfo {
  Method method;
  const char* name;
  bool reward_space;
};

constexpr MethodInfo kMethods[] = {
    {Method::kBc, "bc", false},
    {Method::kIqTv, "iq_tv", false},
    {Method::kIqChi2, "iq_chi2", false},
    {Method::kIqReg, "iq_reg", false},
    {Method::kValueDice, "value_dice", false},
    {Method::kDualQdmExact, "dual_qdm_exact", true},
    {Method::kDualQdmPenalty, "dual_qdm_penalty", false},
    {Method::kAil, "ail", true},
};

const MethodInfo& info(Method m) {
  for (const auto& mi : kMethods) {
    if (mi.method == m) return mi;
  }
  throw std::logic_error("unknown method");
}

SolverConfig resolve_config(Method m, SolverConfig cfg) {
  if (cfg.learning_rate <= 0.0) cfg.learning_rate = info(m).reward_space ? 0.5 : 0.1;
  if (cfg.grad_tol <= 0.0) cfg.grad_tol = (m == Method::kDualQdmPenalty) ? 1e-5 : 1e-8;
  if (cfg.alpha <= 0.0) throw PreconditionError("alpha must be positive");
  if (cfg.max_iters < 0) throw PreconditionError("max_iters must be nonnegative");
  return cfg;
}

std::vector<Layer> zero_tables(const LayeredMdp& mdp) {
  std::vector<Layer> t(mdp.horizon);
  for (int h = 0; h < mdp.horizon; ++h) {
    t[h].assign(static_cast<size_t>(mdp.layer_sizes[h]) * mdp.num_actions, 0.0);
  }
  return t;
}

std::vector<Layer> const_tables(const LayeredMdp& mdp, double v) {
  auto t = zero_tables(mdp);
  for (auto& layer : t) std::fill(layer.begin(), layer.end(), v);
  return t;
}

// One pass per row computing both the log-sum-exp value and the softmax
// probabilities, sharing the exponentials.
struct SoftRows {
  std::vector<std::vector<double>> v;  // [h][s]
  std::vector<Layer> pi;               // [h][s*A+a]
};

SoftRows soft_rows(const LayeredMdp& mdp, const std::vector<Layer>& q, double alpha) {
  SoftRows out;
  out.v.resize(mdp.horizon);
  out.pi.resize(mdp.horizon);
  const int A = mdp.num_actions;
  for (int h = 0; h < mdp.horizon; ++h) {
    const int S = mdp.layer_sizes[h];
    out.v[h].resize(S);
    out.pi[h].resize(static_cast<size_t>(S) * A);
    for (int s = 0; s < S; ++s) {
      const double* row = q[h].data() + static_cast<size_t>(s) * A;
      double mx = row[0];
      for (int a = 1; a < A; ++a) mx = std::max(mx, row[a]);
      double z = 0.0;
      double* prow = out.pi[h].data() + static_cast<size_t>(s) * A;
      for (int a = 0; a < A; ++a) {
        prow[a] = std::exp((row[a] - mx) / alpha);
        z += prow[a];
      }
      for (int a = 0; a < A; ++a) prow[a] /= z;
      out.v[h][s] = mx + alpha * std::log(z);
    }
  }
  return out;
}

// Projected ascent direction under optional box constraints: coordinates
// pinned at a bound with the gradient pointing outward contribute zero.
double projected_inf_norm(const std::vector<Layer>& x, const std::vector<Layer>& g, bool boxed,
                          double lo, double hi) {
  double n = 0.0;
  for (size_t h = 0; h < x.size(); ++h) {
    for (size_t i = 0; i < x[h].size(); ++i) {
      double gi = g[h][i];
      if (boxed) {
        if (x[h][i] <= lo && gi < 0.0) gi = 0.0;
        if (x[h][i] >= hi && gi > 0.0) gi = 0.0;
      }
      n = std::max(n, std::abs(gi));
    }
  }
  return n;
}

void ascend(std::vector<Layer>& x, const std::vector<Layer>& g, double lr, bool boxed, double lo,
            double hi) {
  for (size_t h = 0; h < x.size(); ++h) {
    for (size_t i = 0; i < x[h].size(); ++i) {
      x[h][i] += lr * g[h][i];
      if (boxed) x[h][i] = std::clamp(x[h][i], lo, hi);
    }
  }
}

void check_finite(const std::vector<Layer>& x, const char* what, int iter) {
  for (const auto& layer : x) {
    for (double v : layer) {
      if (!std::isfinite(v)) {
        throw SolverDivergence(std::string(what) + " became non-finite at iteration " +
                               std::to_string(iter));
      }
    }
  }
}

// Append-only rollout buffer with the same count layout as a demo set:
// per-step (s, a, s2) counts, with s2 = -1 at the final step.
struct TransitionBag {
  int num_trajectories = 0;
  std::vector<std::map<std::tuple<int, int, int>, int>> counts;

  explicit TransitionBag(int horizon) : counts(horizon) {}

  void add(const Trajectory& traj, int horizon) {
    for (int h = 0; h < horizon; ++h) {
      int s2 = (h + 1 < horizon) ? traj.steps[h + 1].first : -1;
      ++counts[h][{traj.steps[h].first, traj.steps[h].second, s2}];
    }
    ++num_trajectories;
  }
};

// Demo-side linear terms shared by the inverse-soft-Q family:
//   sum_h E_demo[Q(s_h, a_h)] - sum_{h>=1} E_demo[V(s_h)] - E_rho[V(s_1)].
double iq_linear_objective(const LayeredMdp& mdp, const DemoDataset& demo,
                           const std::vector<Layer>& q, const SoftRows& sr) {
  const double n = demo.num_trajectories;
  double obj = 0.0;
  for (int h = 0; h < mdp.horizon; ++h) {
    for (size_t i = 0; i < demo.pair_counts[h].size(); ++i) {
      if (demo.pair_counts[h][i] > 0) obj += demo.pair_counts[h][i] / n * q[h][i];
    }
    if (h >= 1) {
      for (size_t s = 0; s < demo.state_counts[h].size(); ++s) {
        if (demo.state_counts[h][s] > 0) obj -= demo.state_counts[h][s] / n * sr.v[h][s];
      }
    }
  }
  for (int s = 0; s < mdp.layer_sizes[0]; ++s) {
    if (mdp.initial[s] > 0.0) obj -= mdp.initial[s] * sr.v[0][s];
  }
  return obj;
}

void iq_linear_gradient(const LayeredMdp& mdp, const DemoDataset& demo, const SoftRows& sr,
                        std::vector<Layer>& g) {
  const double n = demo.num_trajectories;
  const int A = mdp.num_actions;
  for (int h = 0; h < mdp.horizon; ++h) {
    for (size_t i = 0; i < demo.pair_counts[h].size(); ++i) {
      if (demo.pair_counts[h][i] > 0) g[h][i] += demo.pair_counts[h][i] / n;
    }
    if (h >= 1) {
      for (size_t s = 0; s < demo.state_counts[h].size(); ++s) {
        if (demo.state_counts[h][s] == 0) continue;
        const double w = demo.state_counts[h][s] / n;
        for (int a = 0; a < A; ++a) g[h][s * A + a] -= w * sr.pi[h][s * A + a];
      }
    }
  }
  for (int s = 0; s < mdp.layer_sizes[0]; ++s) {
    if (mdp.initial[s] <= 0.0) continue;
    for (int a = 0; a < A; ++a) g[0][static_cast<size_t>(s) * A + a] -= mdp.initial[s] * sr.pi[0][static_cast<size_t>(s) * A + a];
  }
}

// Squared Bellman-gap term over a transition bag, weight scale = 1/(4 * M)
// with M the bag's trajectory count. The value at the landing state is the
// live soft value, so the gradient flows through both ends.
double square_term_objective(const LayeredMdp& mdp, const TransitionBag& bag,
                             const std::vector<Layer>& q, const SoftRows& sr) {
  const int A = mdp.num_actions;
  const double scale = 1.0 / (4.0 * bag.num_trajectories);
  double obj = 0.0;
  for (int h = 0; h < mdp.horizon; ++h) {
    for (const auto& [key, c] : bag.counts[h]) {
      const auto [s, a, s2] = key;
      const double b = q[h][static_cast<size_t>(s) * A + a] - (s2 >= 0 ? sr.v[h + 1][s2] : 0.0);
      obj -= scale * c * b * b;
    }
  }
  return obj;
}

void square_term_gradient(const LayeredMdp& mdp, const TransitionBag& bag,
                          const std::vector<Layer>& q, const SoftRows& sr,
                          std::vector<Layer>& g) {
  const int A = mdp.num_actions;
  const double scale = 1.0 / (4.0 * bag.num_trajectories);
  for (int h = 0; h < mdp.horizon; ++h) {
    for (const auto& [key, c] : bag.counts[h]) {
      const auto [s, a, s2] = key;
      const double b = q[h][static_cast<size_t>(s) * A + a] - (s2 >= 0 ? sr.v[h + 1][s2] : 0.0);
      const double w = 2.0 * scale * c * b;
      g[h][static_cast<size_t>(s) * A + a] -= w;
      if (s2 >= 0) {
        for (int a2 = 0; a2 < A; ++a2) {
          g[h + 1][static_cast<size_t>(s2) * A + a2] += w * sr.pi[h + 1][static_cast<size_t>(s2) * A + a2];
        }
      }
    }
  }
}

TransitionBag demo_bag(const DemoDataset& demo) {
  TransitionBag bag(demo.horizon);
  for (const auto& traj : demo.trajectories) bag.add(traj, demo.horizon);
  return bag;
}

TabularPolicy policy_from_rows(const LayeredMdp& mdp, std::vector<Layer> rows) {
  TabularPolicy pi;
  pi.probs = std::move(rows);
  (void)mdp;
  return pi;
}

SolveResult run_q_space(const LayeredMdp& mdp, const DemoDataset& demo, Method method,
                        const SolverConfig& raw) {
  SolverConfig cfg = resolve_config(method, raw);
  const bool boxed = cfg.q_box_C.has_value();
  const double box_hi = boxed ? *cfg.q_box_C : 0.0;
  const bool online = (method == Method::kIqReg || method == Method::kDualQdmPenalty);
  const bool penalty = (method == Method::kDualQdmPenalty);

  std::vector<Layer> q = const_tables(mdp, cfg.q_init);
  if (boxed) {
    for (auto& layer : q)
      for (auto& v : layer) v = std::clamp(v, 0.0, box_hi);
  }
  std::vector<Layer> q_target = q;  // penalty solver only
  TransitionBag bag = online ? TransitionBag(mdp.horizon) : demo_bag(demo);
  const bool squares = (method == Method::kIqChi2 || method == Method::kIqReg || penalty);
  Rng rng(cfg.seed);

  SolveResult res;
  res.method = method;
  res.config = cfg;

  int t = 0;
  for (;; ++t) {
    SoftRows sr = soft_rows(mdp, q, cfg.alpha);
    if (online) {
      TabularPolicy pi = policy_from_rows(mdp, sr.pi);
      for (int k = 0; k < cfg.online_rollouts_per_iter; ++k) {
        bag.add(rollout(mdp, pi, rng), mdp.horizon);
      }
    }

    double obj = iq_linear_objective(mdp, demo, q, sr);
    std::vector<Layer> g = zero_tables(mdp);
    iq_linear_gradient(mdp, demo, sr, g);
    if (squares && !penalty) {
      obj += square_term_objective(mdp, bag, q, sr);
      square_term_gradient(mdp, bag, q, sr, g);
    }
    if (penalty) {
      // Value targets come from the Polyak table; no gradient flows there.
      SoftRows tgt = soft_rows(mdp, q_target, cfg.alpha);
      const int A = mdp.num_actions;
      const double scale = cfg.beta / std::max(1, bag.num_trajectories);
      for (int h = 0; h < mdp.horizon; ++h) {
        for (const auto& [key, c] : bag.counts[h]) {
          const auto [s, a, s2] = key;
          const double v =
              q[h][static_cast<size_t>(s) * A + a] - (s2 >= 0 ? tgt.v[h + 1][s2] : 0.0);
          const double lo_viol = std::max(0.0, -v);
          const double hi_viol = std::max(0.0, v - 1.0);
          obj -= scale * c * (lo_viol * lo_viol + hi_viol * hi_viol);
          g[h][static_cast<size_t>(s) * A + a] -= scale * c * (-2.0 * lo_viol + 2.0 * hi_viol);
        }
      }
    }

    const double pg = projected_inf_norm(q, g, boxed, 0.0, box_hi);
    if (cfg.record_trace) res.trace.push_back({t, obj, pg});
    res.final_objective = obj;
    res.final_grad_norm = pg;
    if (pg <= cfg.grad_tol) {
      res.converged = true;
      break;
    }
    if (t >= cfg.max_iters) break;

    ascend(q, g, cfg.learning_rate, boxed, 0.0, box_hi);
    check_finite(q, "Q table", t + 1);
    if (penalty) {
      for (int h = 0; h < mdp.horizon; ++h) {
        for (size_t i = 0; i < q[h].size(); ++i) {
          q_target[h][i] = cfg.polyak_tau * q[h][i] + (1.0 - cfg.polyak_tau) * q_target[h][i];
        }
      }
    }
  }

  res.iters = t;
  SoftRows sr = soft_rows(mdp, q, cfg.alpha);
  res.policy = policy_from_rows(mdp, std::move(sr.pi));
  QTable qt;
  qt.q = std::move(q);
  qt.alpha = cfg.alpha;
  res.q = std::move(qt);
  return res;
}

// Exact argmax set of a row, ties by exact float equality.
void argmax_set(const double* row, int A, double& mx, std::vector<int>& ties) {
  mx = row[0];
  for (int a = 1; a < A; ++a) mx = std::max(mx, row[a]);
  ties.clear();
  for (int a = 0; a < A; ++a) {
    if (row[a] == mx) ties.push_back(a);
  }
}

struct MaxRows {
  std::vector<std::vector<double>> m;           // [h][s]
  std::vector<std::vector<std::vector<int>>> ties;  // [h][s] -> argmax actions
};

MaxRows max_rows(const LayeredMdp& mdp, const std::vector<Layer>& q) {
  MaxRows out;
  out.m.resize(mdp.horizon);
  out.ties.resize(mdp.horizon);
  const int A = mdp.num_actions;
  for (int h = 0; h < mdp.horizon; ++h) {
    const int S = mdp.layer_sizes[h];
    out.m[h].resize(S);
    out.ties[h].resize(S);
    for (int s = 0; s < S; ++s) {
      argmax_set(q[h].data() + static_cast<size_t>(s) * A, A, out.m[h][s], out.ties[h][s]);
    }
  }
  return out;
}

double vd_objective_impl(const LayeredMdp& mdp, const DemoDataset& demo,
                         const std::vector<Layer>& q, const TransitionBag& bag,
                         const MaxRows& mr, std::vector<Layer>* grad) {
  const int A = mdp.num_actions;
  const double n = demo.num_trajectories;

  // Stable log of (1/N) sum c * exp(-Q + max-value at landing state).
  double emax = -std::numeric_limits<double>::infinity();
  for (int h = 0; h < mdp.horizon; ++h) {
    for (const auto& [key, c] : bag.counts[h]) {
      const auto [s, a, s2] = key;
      (void)c;
      const double e = -q[h][static_cast<size_t>(s) * A + a] + (s2 >= 0 ? mr.m[h + 1][s2] : 0.0);
      emax = std::max(emax, e);
    }
  }
  double zsum = 0.0;
  for (int h = 0; h < mdp.horizon; ++h) {
    for (const auto& [key, c] : bag.counts[h]) {
      const auto [s, a, s2] = key;
      const double e = -q[h][static_cast<size_t>(s) * A + a] + (s2 >= 0 ? mr.m[h + 1][s2] : 0.0);
      zsum += c * std::exp(e - emax);
    }
  }
  double obj = -(emax + std::log(zsum / n));
  for (int s = 0; s < mdp.layer_sizes[0]; ++s) {
    if (mdp.initial[s] > 0.0) obj -= mdp.initial[s] * mr.m[0][s];
  }

  if (grad != nullptr) {
    // Derivative of -log Z spreads softmax weights over bag entries; max
    // values contribute a uniform split across the exact argmax set.
    for (int h = 0; h < mdp.horizon; ++h) {
      for (const auto& [key, c] : bag.counts[h]) {
        const auto [s, a, s2] = key;
        const double e = -q[h][static_cast<size_t>(s) * A + a] + (s2 >= 0 ? mr.m[h + 1][s2] : 0.0);
        const double w = c * std::exp(e - emax) / zsum;
        (*grad)[h][static_cast<size_t>(s) * A + a] += w;
        if (s2 >= 0) {
          const auto& ties = mr.ties[h + 1][s2];
          for (int a2 : ties) (*grad)[h + 1][static_cast<size_t>(s2) * A + a2] -= w / ties.size();
        }
      }
    }
    for (int s = 0; s < mdp.layer_sizes[0]; ++s) {
      if (mdp.initial[s] <= 0.0) continue;
      const auto& ties = mr.ties[0][s];
      for (int a : ties) (*grad)[0][static_cast<size_t>(s) * A + a] -= mdp.initial[s] / ties.size();
    }
  }
  return obj;
}

SolveResult run_dual_reward(const LayeredMdp& mdp, const DemoDataset& demo, Method method,
                            const SolverConfig& raw) {
  SolverConfig cfg = resolve_config(method, raw);
  const OccupancyMeasure& d_hat = empirical_occupancy(demo);

  std::vector<Layer> r = zero_tables(mdp);
  SolveResult res;
  res.method = method;
  res.config = cfg;

  QTable qt;
  qt.alpha = cfg.alpha;
  TabularPolicy pi;

  int t = 0;
  for (;; ++t) {
    RewardTable rt;
    rt.r = r;
    qt = soft_value_iteration(mdp, rt, cfg.alpha);
    pi = softmax_policy(mdp, qt);
    OccupancyMeasure d = occupancy(mdp, pi);

    std::vector<Layer> g = zero_tables(mdp);
    for (int h = 0; h < mdp.horizon; ++h) {
      for (size_t i = 0; i < g[h].size(); ++i) g[h][i] = d_hat.d[h][i] - d.d[h][i];
    }

    double obj;
    if (method == Method::kDualQdmExact) {
      obj = dual_objective(mdp, rt, d_hat, cfg.alpha);
    } else {
      // Saddle value through the policy side: demo return minus entropy-
      // regularized return of the current policy, both under the live reward.
      double demo_ret = 0.0, pol_ret = 0.0, ent = 0.0;
      for (int h = 0; h < mdp.horizon; ++h) {
        for (size_t i = 0; i < r[h].size(); ++i) {
          demo_ret += d_hat.d[h][i] * r[h][i];
          pol_ret += d.d[h][i] * r[h][i];
        }
        ent += occupancy_entropy(d.d[h], mdp.num_actions);
      }
      obj = demo_ret - (pol_ret + cfg.alpha * ent);
    }

    const double pg = projected_inf_norm(r, g, true, 0.0, 1.0);
    if (cfg.record_trace) res.trace.push_back({t, obj, pg});
    res.final_objective = obj;
    res.final_grad_norm = pg;
    if (pg <= cfg.grad_tol) {
      res.converged = true;
      break;
    }
    if (t >= cfg.max_iters) break;

    ascend(r, g, cfg.learning_rate, true, 0.0, 1.0);
    for (const auto& layer : r) {
      for (double v : layer) {
        if (!(v >= 0.0 && v <= 1.0)) {
          throw SolverDivergence("reward iterate left the unit box at iteration " +
                                 std::to_string(t + 1));
        }
      }
    }
  }

  res.iters = t;
  res.policy = std::move(pi);
  RewardTable rt;
  rt.r = std::move(r);
  res.reward = std::move(rt);
  res.q = std::move(qt);
  return res;
}

}  // namespace

const char* method_name(Method m) { return info(m).name; }

std::optional<Method> parse_method(const std::string& name) {
  for (const auto& mi : kMethods) {
    if (name == mi.name) return mi.method;
  }
  return std::nullopt;
}

SolveResult bc_fit(const LayeredMdp& mdp, const DemoDataset& demo) {
  SolveResult res;
  res.method = Method::kBc;
  res.config = resolve_config(Method::kBc, SolverConfig{});
  res.converged = true;

  const int A = mdp.num_actions;
  std::vector<Layer> rows = zero_tables(mdp);
  double loglik = 0.0;
  const double n = demo.num_trajectories;
  for (int h = 0; h < mdp.horizon; ++h) {
    for (int s = 0; s < mdp.layer_sizes[h]; ++s) {
      const int cs = demo.state_counts[h][s];
      double* row = rows[h].data() + static_cast<size_t>(s) * A;
      if (cs == 0) {
        std::fill(row, row + A, 1.0 / A);
        continue;
      }
      for (int a = 0; a < A; ++a) {
        const int c = demo.pair_counts[h][static_cast<size_t>(s) * A + a];
        row[a] = static_cast<double>(c) / cs;
        if (c > 0) loglik += c / n * std::log(row[a]);
      }
    }
  }
  res.policy = policy_from_rows(mdp, std::move(rows));
  res.final_objective = loglik;
  res.final_grad_norm = 0.0;
  return res;
}

SolveResult iq_learn_fit(const LayeredMdp& mdp, const DemoDataset& demo, IqVariant variant,
                         const SolverConfig& cfg) {
  Method m = variant == IqVariant::kTv    ? Method::kIqTv
             : variant == IqVariant::kChi2 ? Method::kIqChi2
                                           : Method::kIqReg;
  return run_q_space(mdp, demo, m, cfg);
}

SolveResult value_dice_fit(const LayeredMdp& mdp, const DemoDataset& demo,
                           const SolverConfig& raw) {
  SolverConfig cfg = resolve_config(Method::kValueDice, raw);
  const bool boxed = cfg.q_box_C.has_value();
  const double box_hi = boxed ? *cfg.q_box_C : 0.0;
  TransitionBag bag = demo_bag(demo);

  std::vector<Layer> q = const_tables(mdp, cfg.q_init);
  SolveResult res;
  res.method = Method::kValueDice;
  res.config = cfg;

  int t = 0;
  for (;; ++t) {
    MaxRows mr = max_rows(mdp, q);
    std::vector<Layer> g = zero_tables(mdp);
    const double obj = vd_objective_impl(mdp, demo, q, bag, mr, &g);
    const double pg = projected_inf_norm(q, g, boxed, 0.0, box_hi);
    if (cfg.record_trace) res.trace.push_back({t, obj, pg});
    res.final_objective = obj;
    res.final_grad_norm = pg;
    if (pg <= cfg.grad_tol) {
      res.converged = true;
      break;
    }
    if (t >= cfg.max_iters) break;
    ascend(q, g, cfg.learning_rate, boxed, 0.0, box_hi);
    check_finite(q, "Q table", t + 1);
  }

  res.iters = t;
  // Greedy policy, uniform over the exact argmax set of each row.
  MaxRows mr = max_rows(mdp, q);
  std::vector<Layer> rows = zero_tables(mdp);
  const int A = mdp.num_actions;
  for (int h = 0; h < mdp.horizon; ++h) {
    for (int s = 0; s < mdp.layer_sizes[h]; ++s) {
      const auto& ties = mr.ties[h][s];
      for (int a : ties) rows[h][static_cast<size_t>(s) * A + a] = 1.0 / ties.size();
    }
  }
  res.policy = policy_from_rows(mdp, std::move(rows));
  QTable qt;
  qt.q = std::move(q);
  qt.alpha = cfg.alpha;
  res.q = std::move(qt);
  return res;
}

SolveResult dual_qdm_exact(const LayeredMdp& mdp, const DemoDataset& demo,
                           const SolverConfig& cfg) {
  return run_dual_reward(mdp, demo, Method::kDualQdmExact, cfg);
}

SolveResult ail_fit(const LayeredMdp& mdp, const DemoDataset& demo, const SolverConfig& cfg) {
  return run_dual_reward(mdp, demo, Method::kAil, cfg);
}

SolveResult dual_qdm_penalty(const LayeredMdp& mdp, const DemoDataset& demo,
                             const SolverConfig& cfg) {
  return run_q_space(mdp, demo, Method::kDualQdmPenalty, cfg);
}

SolveResult solve(const LayeredMdp& mdp, const DemoDataset& demo, Method method,
                  const SolverConfig& cfg) {
  switch (method) {
    case Method::kBc:
      return bc_fit(mdp, demo);
    case Method::kIqTv:
      return iq_learn_fit(mdp, demo, IqVariant::kTv, cfg);
    case Method::kIqChi2:
      return iq_learn_fit(mdp, demo, IqVariant::kChi2, cfg);
    case Method::kIqReg:
      return iq_learn_fit(mdp, demo, IqVariant::kReg, cfg);
    case Method::kValueDice:
      return value_dice_fit(mdp, demo, cfg);
    case Method::kDualQdmExact:
      return dual_qdm_exact(mdp, demo, cfg);
    case Method::kDualQdmPenalty:
      return dual_qdm_penalty(mdp, demo, cfg);
    case Method::kAil:
      return ail_fit(mdp, demo, cfg);
  }
  throw std::logic_error("unknown method");
}

double iq_objective(const LayeredMdp& mdp, const DemoDataset& demo, const QTable& q,
                    IqVariant variant) {
  if (variant == IqVariant::kReg) {
    throw PreconditionError("the replay-buffer objective is not a fixed function of Q");
  }
  SoftRows sr = soft_rows(mdp, q.q, q.alpha);
  double obj = iq_linear_objective(mdp, demo, q.q, sr);
  if (variant == IqVariant::kChi2) {
    TransitionBag bag = demo_bag(demo);
    obj += square_term_objective(mdp, bag, q.q, sr);
  }
  return obj;
}

std::vector<Layer> iq_gradient(const LayeredMdp& mdp, const DemoDataset& demo, const QTable& q,
                               IqVariant variant) {
  if (variant == IqVariant::kReg) {
    throw PreconditionError("the replay-buffer objective is not a fixed function of Q");
  }
  SoftRows sr = soft_rows(mdp, q.q, q.alpha);
  std::vector<Layer> g = zero_tables(mdp);
  iq_linear_gradient(mdp, demo, sr, g);
  if (variant == IqVariant::kChi2) {
    TransitionBag bag = demo_bag(demo);
    square_term_gradient(mdp, bag, q.q, sr, g);
  }
  return g;
}

double value_dice_objective(const LayeredMdp& mdp, const DemoDataset& demo, const QTable& q) {
  TransitionBag bag = demo_bag(demo);
  MaxRows mr = max_rows(mdp, q.q);
  return vd_objective_impl(mdp, demo, q.q, bag, mr, nullptr);
}

std::vector<Layer> value_dice_subgradient(const LayeredMdp& mdp, const DemoDataset& demo,
                                          const QTable& q) {
  TransitionBag bag = demo_bag(demo);
  MaxRows mr = max_rows(mdp, q.q);
  std::vector<Layer> g = zero_tables(mdp);
  vd_objective_impl(mdp, demo, q.q, bag, mr, &g);
  return g;
}

std::vector<Layer> dual_gradient(const LayeredMdp& mdp, const OccupancyMeasure& d_hat,
                                 const RewardTable& r, double alpha) {
  QTable q = soft_value_iteration(mdp, r, alpha);
  TabularPolicy pi = softmax_policy(mdp, q);
  OccupancyMeasure d = occupancy(mdp, pi);
  std::vector<Layer> g(mdp.horizon);
  for (int h = 0; h < mdp.horizon; ++h) {
    g[h].resize(d.d[h].size());
    for (size_t i = 0; i < g[h].size(); ++i) g[h][i] = d_hat.d[h][i] - d.d[h][i];
  }
  return g;
}

}  // namespace ildm
