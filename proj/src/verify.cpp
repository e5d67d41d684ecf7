#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "bench.hpp"
#include "rng.hpp"
#include "serialize.hpp"

namespace ildm {

namespace {

using Json = nlohmann::ordered_json;

std::string loc(int h, int s) {
  return "step " + std::to_string(h + 1) + ", state " + std::to_string(s + 1);
}

std::string fmt(double x) { return num_str(x); }

double row_tv(const double* a, const double* b, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += std::abs(a[i] - b[i]);
  return 0.5 * acc;
}

// Deterministic expert action per state; assumes a near-one-hot row.
int det_action(const TabularPolicy& pi, int h, int s, int A) {
  const double* row = pi.probs[h].data() + static_cast<size_t>(s) * A;
  int best = 0;
  for (int a = 1; a < A; ++a)
    if (row[a] > row[best]) best = a;
  return best;
}

}  // namespace

std::string report_to_json(const CheckReport& report) {
  Json j;
  j["name"] = report.name;
  j["passed"] = report.passed;
  j["tolerance"] = report.tolerance;
  Json m = Json::object();
  for (const auto& [k, v] : report.metrics) m[k] = v;
  j["metrics"] = std::move(m);
  j["details"] = report.details;
  return j.dump(2) + "\n";
}

std::string reports_to_json(const std::string& suite, const std::vector<CheckReport>& reports) {
  Json j;
  j["suite"] = suite;
  j["passed"] = all_passed(reports);
  Json arr = Json::array();
  for (const auto& r : reports) arr.push_back(Json::parse(report_to_json(r)));
  j["reports"] = std::move(arr);
  return j.dump(2) + "\n";
}

bool all_passed(const std::vector<CheckReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.passed; });
}

CheckReport check_thm1(const LayeredMdp& mdp, const DemoDataset& demo, const SolverConfig& iq_cfg,
                       double tv_tol, double uniform_tol) {
  CheckReport rep;
  rep.name = "thm1";
  rep.tolerance = tv_tol;

  SolveResult iq = iq_learn_fit(mdp, demo, IqVariant::kTv, iq_cfg);
  SolveResult bc = bc_fit(mdp, demo);
  const int A = mdp.num_actions;

  double max_tv = 0.0;
  int tv_h = -1, tv_s = -1;
  for (int h = 1; h < mdp.horizon; ++h) {
    for (int s = 0; s < mdp.layer_sizes[h]; ++s) {
      const double tv = row_tv(iq.policy.probs[h].data() + static_cast<size_t>(s) * A,
                               bc.policy.probs[h].data() + static_cast<size_t>(s) * A, A);
      if (tv > max_tv) max_tv = tv, tv_h = h, tv_s = s;
    }
  }

  double max_unif = 0.0;
  int u_s = -1;
  for (int s = 0; s < mdp.layer_sizes[0]; ++s) {
    if (visited(demo, 0, s)) continue;
    for (int a = 0; a < A; ++a) {
      const double dev = std::abs(iq.policy.probs[0][static_cast<size_t>(s) * A + a] - 1.0 / A);
      if (dev > max_unif) max_unif = dev, u_s = s;
    }
  }

  rep.metrics = {{"max_tv_from_step2", max_tv},
                 {"max_uniform_dev_uncovered_initial", max_unif},
                 {"uniform_tol", uniform_tol},
                 {"iq_iters", static_cast<double>(iq.iters)}};
  if (max_tv > tv_tol) {
    rep.details = "policy TV " + fmt(max_tv) + " at " + loc(tv_h, tv_s) + " exceeds " + fmt(tv_tol);
  } else if (max_unif > uniform_tol) {
    rep.details = "uniform deviation " + fmt(max_unif) + " at uncovered initial state " +
                  std::to_string(u_s + 1) + " exceeds " + fmt(uniform_tol);
  }
  rep.passed = rep.details.empty();
  return rep;
}

double bc_gap_closed_form(const ResetCliffSpec& spec) {
  const double eps = reset_cliff_epsilon(spec.S, spec.N);
  double sum = 0.0;
  for (int h = 1; h <= spec.H; ++h) {
    sum += std::pow(1.0 - eps, h - 1) * (spec.H - h + 1) * eps;
  }
  return (1.0 - 1.0 / spec.A) * sum;
}

Cor1Measurements measure_cor1(const Cor1Config& cfg) {
  Cor1Measurements out;
  out.horizons = cfg.horizons;
  const double eps = reset_cliff_epsilon(cfg.S, cfg.N);
  for (int H : cfg.horizons) {
    out.closed_form.push_back(bc_gap_closed_form({cfg.S, cfg.A, H, cfg.N}));
    out.regime.push_back(eps * H / 2.0);
  }

  // Reward-ascent methods get their own, larger iteration budget.
  std::vector<Method> q_group, r_group;
  for (Method m : cfg.methods) {
    (m == Method::kDualQdmExact || m == Method::kAil ? r_group : q_group).push_back(m);
    out.methods.push_back(method_name(m));
  }

  auto run = [&](std::vector<Method> methods, int max_iters) {
    BenchConfig bcfg;
    bcfg.instance = BenchInstance::kResetCliff;
    bcfg.methods = std::move(methods);
    bcfg.S = cfg.S;
    bcfg.A = cfg.A;
    bcfg.N = cfg.N;
    bcfg.horizons = cfg.horizons;
    bcfg.num_seeds = cfg.num_seeds;
    bcfg.base_seed = cfg.seed;
    bcfg.solver.alpha = cfg.alpha;
    bcfg.solver.max_iters = max_iters;
    return run_bench(bcfg);
  };
  std::vector<BenchRow> rows;
  if (!q_group.empty()) {
    BenchResult q_rows = run(q_group, cfg.q_space_max_iters);
    rows.insert(rows.end(), q_rows.rows.begin(), q_rows.rows.end());
  }
  if (!r_group.empty()) {
    BenchResult r_rows = run(r_group, cfg.reward_space_max_iters);
    rows.insert(rows.end(), r_rows.rows.begin(), r_rows.rows.end());
  }
  for (const auto& row : rows) {
    if (!row.error.empty()) {
      throw SolverDivergence("sweep cell failed (" + row.method + ", H=" + std::to_string(row.H) +
                             ", seed=" + std::to_string(row.seed) + "): " + row.error);
    }
  }

  out.cells.assign(out.methods.size(), std::vector<Cor1Cell>(cfg.horizons.size()));
  for (size_t mi = 0; mi < out.methods.size(); ++mi) {
    for (size_t hi = 0; hi < cfg.horizons.size(); ++hi) {
      double sum = 0.0, sumsq = 0.0;
      int n = 0;
      for (const auto& row : rows) {
        if (row.method == out.methods[mi] && row.H == cfg.horizons[hi]) {
          sum += row.gap;
          sumsq += row.gap * row.gap;
          ++n;
        }
      }
      Cor1Cell cell;
      cell.n = n;
      cell.mean = sum / n;
      if (n > 1) {
        const double var = std::max(0.0, (sumsq - n * cell.mean * cell.mean) / (n - 1));
        cell.stderr_mean = std::sqrt(var / n);
      }
      out.cells[mi][hi] = cell;
    }
  }
  return out;
}

CheckReport check_cor1(const Cor1Config& cfg) {
  const double eps = reset_cliff_epsilon(cfg.S, cfg.N);
  for (int H : cfg.horizons) {
    if (eps * H / 2.0 > 1.0) {
      throw PreconditionError(
          "outside the quadratic regime: eps*H/2 = " + fmt(eps * H / 2.0) + " > 1 at H = " +
          std::to_string(H) +
          " (eps = " + fmt(eps) + "); the closed-form gap target is not valid here");
    }
  }

  CheckReport rep;
  rep.name = "cor1";
  rep.tolerance = 3.0;  // standard-error multiplier

  Cor1Measurements m = measure_cor1(cfg);
  const size_t last = cfg.horizons.size() - 1;
  auto idx = [&](const std::string& name) {
    return static_cast<size_t>(std::find(m.methods.begin(), m.methods.end(), name) -
                               m.methods.begin());
  };
  auto present = [&](const std::string& name) { return idx(name) < m.methods.size(); };
  if (!present("bc")) {
    throw PreconditionError("gap-growth check needs the count-ratio baseline in cfg.methods");
  }
  const size_t bc_i = idx("bc");

  for (size_t hi = 0; hi < cfg.horizons.size(); ++hi) {
    const std::string hs = std::to_string(cfg.horizons[hi]);
    rep.metrics.push_back({"closed_form_h" + hs, m.closed_form[hi]});
    rep.metrics.push_back({"bc_mean_h" + hs, m.cells[bc_i][hi].mean});
    rep.metrics.push_back({"bc_se_h" + hs, m.cells[bc_i][hi].stderr_mean});
    if (present("iq_tv"))
      rep.metrics.push_back({"iq_tv_mean_h" + hs, m.cells[idx("iq_tv")][hi].mean});
  }

  for (const auto& name : {std::string("bc"), std::string("iq_tv")}) {
    if (!present(name)) continue;
    const size_t mi = idx(name);
    for (size_t hi = 0; hi < cfg.horizons.size(); ++hi) {
      const Cor1Cell& c = m.cells[mi][hi];
      const double dev = std::abs(c.mean - m.closed_form[hi]);
      if (rep.details.empty() && dev > 3.0 * c.stderr_mean) {
        rep.details = name + " mean gap " + fmt(c.mean) + " at H=" +
                      std::to_string(cfg.horizons[hi]) + " is " + fmt(dev / c.stderr_mean) +
                      " standard errors from the closed form " + fmt(m.closed_form[hi]);
      }
    }
    for (size_t hi = 0; hi + 1 < cfg.horizons.size(); ++hi) {
      if (cfg.horizons[hi + 1] != 2 * cfg.horizons[hi]) continue;
      const double ratio = m.cells[mi][hi + 1].mean / m.cells[mi][hi].mean;
      rep.metrics.push_back(
          {name + "_ratio_h" + std::to_string(cfg.horizons[hi + 1]), ratio});
      if (rep.details.empty() && (ratio < 3.0 || ratio > 5.0)) {
        rep.details = name + " doubling ratio " + fmt(ratio) + " at H=" +
                      std::to_string(cfg.horizons[hi + 1]) + " is outside [3, 5]";
      }
    }
  }

  const double bc_last = m.cells[bc_i][last].mean;
  for (const auto& name : {std::string("dual_qdm_exact"), std::string("ail")}) {
    if (!present(name)) continue;
    const double g = m.cells[idx(name)][last].mean;
    rep.metrics.push_back({name + "_gap_largest_h", g});
    if (rep.details.empty() && g > 0.1 * bc_last) {
      rep.details = name + " gap " + fmt(g) + " at the largest horizon exceeds a tenth of the " +
                    "baseline gap " + fmt(bc_last);
    }
  }

  rep.passed = rep.details.empty();
  return rep;
}

CheckReport check_thm2_saddle(const LayeredMdp& mdp, const DemoDataset& demo,
                              const SolveResult& result, double best_response_tol, double box_tol,
                              double value_tol) {
  if (!result.converged) {
    throw PreconditionError("saddle certification requires a converged reward-ascent result");
  }
  if (!result.reward.has_value()) {
    throw PreconditionError("saddle certification requires a reward-space result");
  }
  const double alpha = result.config.alpha;
  const RewardTable& rt = *result.reward;
  const OccupancyMeasure& d_hat = empirical_occupancy(demo);
  const int A = mdp.num_actions;

  CheckReport rep;
  rep.name = "thm2";
  rep.tolerance = best_response_tol;

  // (i) The returned policy is the soft best response to the returned reward.
  QTable q2 = soft_value_iteration(mdp, rt, alpha);
  TabularPolicy pi2 = softmax_policy(mdp, q2);
  double max_tv = 0.0;
  int tv_h = -1, tv_s = -1;
  for (int h = 0; h < mdp.horizon; ++h) {
    for (int s = 0; s < mdp.layer_sizes[h]; ++s) {
      const double tv = row_tv(result.policy.probs[h].data() + static_cast<size_t>(s) * A,
                               pi2.probs[h].data() + static_cast<size_t>(s) * A, A);
      if (tv > max_tv) max_tv = tv, tv_h = h, tv_s = s;
    }
  }

  // (ii) The reward maximizes the linear matching term given the policy:
  // wherever the matching gradient is decisively signed, the reward sits at
  // the corresponding end of the box.
  OccupancyMeasure d = occupancy(mdp, result.policy);
  double box_worst = 0.0;
  int box_h = -1, box_i = -1;
  for (int h = 0; h < mdp.horizon; ++h) {
    for (size_t i = 0; i < d.d[h].size(); ++i) {
      const double g = d_hat.d[h][i] - d.d[h][i];
      double miss = 0.0;
      if (g > box_tol) miss = 1.0 - rt.r[h][i];
      if (g < -box_tol) miss = rt.r[h][i];
      if (miss > box_worst) {
        box_worst = miss;
        box_h = h;
        box_i = static_cast<int>(i);
      }
    }
  }

  // (iii) Dual value equals the primal value read through the policy side.
  double demo_ret = 0.0, pol_ret = 0.0, ent = 0.0;
  for (int h = 0; h < mdp.horizon; ++h) {
    for (size_t i = 0; i < rt.r[h].size(); ++i) {
      demo_ret += d_hat.d[h][i] * rt.r[h][i];
      pol_ret += d.d[h][i] * rt.r[h][i];
    }
    ent += occupancy_entropy(d.d[h], A);
  }
  const double primal_side = demo_ret - (pol_ret + alpha * ent);
  const double dual_side = dual_objective(mdp, rt, d_hat, alpha);
  const double value_diff = std::abs(dual_side - primal_side);

  rep.metrics = {{"best_response_max_tv", max_tv},
                 {"box_worst_miss", box_worst},
                 {"box_tol", box_tol},
                 {"value_abs_diff", value_diff},
                 {"value_tol", value_tol},
                 {"dual_value", dual_side}};
  if (max_tv > best_response_tol) {
    rep.details = "best-response TV " + fmt(max_tv) + " at " + loc(tv_h, tv_s) + " exceeds " +
                  fmt(best_response_tol);
  } else if (box_worst > box_tol) {
    rep.details = "reward at step " + std::to_string(box_h + 1) + ", state " +
                  std::to_string(box_i / A + 1) + ", action " + std::to_string(box_i % A + 1) +
                  " misses its box end by " + fmt(box_worst);
  } else if (value_diff > value_tol) {
    rep.details = "dual value " + fmt(dual_side) + " and policy-side value " + fmt(primal_side) +
                  " differ by " + fmt(value_diff);
  }
  rep.passed = rep.details.empty();
  return rep;
}

CheckReport check_lemma1(const LayeredMdp& mdp, const DemoDataset& demo, const QTable& q,
                         double tol) {
  CheckReport rep;
  rep.name = "lemma1";
  rep.tolerance = tol;

  RewardTable induced = induced_reward(mdp, q);
  const int A = mdp.num_actions;
  double min_visited_max = std::numeric_limits<double>::infinity();
  double max_unvisited = 0.0;
  int bad_h = -1;
  for (int h = 0; h < mdp.horizon; ++h) {
    double vmax = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < mdp.layer_sizes[h]; ++s) {
      for (int a = 0; a < A; ++a) {
        const double r = induced.r[h][static_cast<size_t>(s) * A + a];
        if (visited_pair(demo, h, s, a)) {
          vmax = std::max(vmax, r);
        } else {
          max_unvisited = std::max(max_unvisited, std::abs(r));
        }
      }
    }
    if (vmax < min_visited_max) {
      min_visited_max = vmax;
      bad_h = h;
    }
  }

  rep.metrics = {{"min_step_max_visited", min_visited_max},
                 {"max_unvisited_abs", max_unvisited}};
  if (min_visited_max < 1.0 - tol) {
    rep.details = "no demonstrated pair at step " + std::to_string(bad_h + 1) +
                  " reaches induced reward " + fmt(1.0 - tol) + " (max " + fmt(min_visited_max) +
                  ")";
  } else if (max_unvisited > tol) {
    rep.details =
        "an undemonstrated pair has induced reward magnitude " + fmt(max_unvisited);
  }
  rep.passed = rep.details.empty();
  return rep;
}

CheckReport check_prop1(const LayeredMdp& mdp, const TabularPolicy& expert,
                        const DemoDataset& demo, const SolverConfig& cfg, double margin_tol,
                        double spread_tol) {
  TdMdpReport td = is_td_mdp(mdp, expert);
  if (!td.is_td) {
    throw PreconditionError("instance is not transition-dominant: " + td.violation->message);
  }

  CheckReport rep;
  rep.name = "prop1";
  rep.tolerance = margin_tol;

  SolveResult dual = dual_qdm_exact(mdp, demo, cfg);
  SolveResult iq = iq_learn_fit(mdp, demo, IqVariant::kTv, cfg);
  const int A = mdp.num_actions;

  double min_margin = std::numeric_limits<double>::infinity();
  double max_spread = 0.0;
  int uncovered = 0;
  int m_h = -1, m_s = -1;
  for (int h = 0; h + 1 < mdp.horizon; ++h) {
    for (int s = 0; s < mdp.layer_sizes[h]; ++s) {
      if (visited(demo, h, s)) continue;
      ++uncovered;
      const int ea = det_action(expert, h, s, A);
      const double* qrow = dual.q->q[h].data() + static_cast<size_t>(s) * A;
      double best_other = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a)
        if (a != ea) best_other = std::max(best_other, qrow[a]);
      const double margin = A > 1 ? qrow[ea] - best_other
                                  : std::numeric_limits<double>::infinity();
      if (margin < min_margin) min_margin = margin, m_h = h, m_s = s;

      const double* irow = iq.q->q[h].data() + static_cast<size_t>(s) * A;
      const auto [lo, hi] = std::minmax_element(irow, irow + A);
      max_spread = std::max(max_spread, *hi - *lo);
    }
  }

  rep.metrics = {{"uncovered_states", static_cast<double>(uncovered)},
                 {"min_expert_margin", min_margin},
                 {"max_flat_row_spread", max_spread},
                 {"spread_tol", spread_tol},
                 {"dual_converged", dual.converged ? 1.0 : 0.0}};
  if (!dual.converged) {
    rep.details = "reward ascent did not converge; margins are not certified";
  } else if (uncovered > 0 && min_margin <= margin_tol) {
    rep.details = "expert-action margin " + fmt(min_margin) + " at " + loc(m_h, m_s) +
                  " is not strictly positive at tolerance " + fmt(margin_tol);
  } else if (max_spread > spread_tol) {
    rep.details = "soft-Q matcher row spread " + fmt(max_spread) +
                  " at an undemonstrated state exceeds " + fmt(spread_tol);
  }
  rep.passed = rep.details.empty();
  return rep;
}

CheckReport grad_check(GradObjective objective, const LayeredMdp& mdp, const DemoDataset& demo,
                       double alpha, int num_points, uint64_t seed, double rel_tol,
                       double abs_floor) {
  CheckReport rep;
  rep.tolerance = rel_tol;
  switch (objective) {
    case GradObjective::kDual:
      rep.name = "gradcheck/dual";
      break;
    case GradObjective::kIqTv:
      rep.name = "gradcheck/iq_tv";
      break;
    case GradObjective::kIqChi2:
      rep.name = "gradcheck/iq_chi2";
      break;
  }
  const OccupancyMeasure& d_hat = empirical_occupancy(demo);
  const double step = 3e-6;

  double max_rel = 0.0, max_abs = 0.0;
  for (int p = 0; p < num_points; ++p) {
    Rng rng(mix_seed(seed, {static_cast<uint64_t>(p)}));
    std::vector<Layer> x(mdp.horizon);
    for (int h = 0; h < mdp.horizon; ++h) {
      x[h].resize(static_cast<size_t>(mdp.layer_sizes[h]) * mdp.num_actions);
      for (double& v : x[h]) {
        v = objective == GradObjective::kDual ? 0.05 + 0.9 * rng.uniform()
                                              : -1.0 + 2.0 * rng.uniform();
      }
    }

    auto eval = [&](const std::vector<Layer>& t) {
      if (objective == GradObjective::kDual) {
        RewardTable rt;
        rt.r = t;
        return dual_objective(mdp, rt, d_hat, alpha);
      }
      QTable qt;
      qt.q = t;
      qt.alpha = alpha;
      return iq_objective(mdp, demo, qt,
                          objective == GradObjective::kIqTv ? IqVariant::kTv : IqVariant::kChi2);
    };
    std::vector<Layer> analytic;
    if (objective == GradObjective::kDual) {
      RewardTable rt;
      rt.r = x;
      analytic = dual_gradient(mdp, d_hat, rt, alpha);
    } else {
      QTable qt;
      qt.q = x;
      qt.alpha = alpha;
      analytic = iq_gradient(mdp, demo, qt,
                             objective == GradObjective::kIqTv ? IqVariant::kTv : IqVariant::kChi2);
    }

    for (int h = 0; h < mdp.horizon; ++h) {
      for (size_t i = 0; i < x[h].size(); ++i) {
        const double keep = x[h][i];
        x[h][i] = keep + step;
        const double up = eval(x);
        x[h][i] = keep - step;
        const double dn = eval(x);
        x[h][i] = keep;
        const double fd = (up - dn) / (2.0 * step);
        const double a = analytic[h][i];
        const double abs_err = std::abs(a - fd);
        max_abs = std::max(max_abs, abs_err);
        if (abs_err > abs_floor) {
          max_rel = std::max(max_rel, abs_err / std::max({std::abs(a), std::abs(fd), abs_floor}));
        }
      }
    }
  }

  rep.metrics = {{"max_rel_err", max_rel},
                 {"max_abs_err", max_abs},
                 {"abs_floor", abs_floor},
                 {"num_points", static_cast<double>(num_points)}};
  if (max_rel > rel_tol) {
    rep.details = "analytic and finite-difference gradients disagree: relative error " +
                  fmt(max_rel);
  }
  rep.passed = rep.details.empty();
  return rep;
}

CheckReport check_round_trip(int num_pairs, uint64_t seed, double tol) {
  CheckReport rep;
  rep.name = "gradcheck/reward-round-trip";
  rep.tolerance = tol;

  double max_err = 0.0;
  for (int i = 0; i < num_pairs; ++i) {
    Rng rng(mix_seed(seed, {static_cast<uint64_t>(i)}));
    const int H = 2 + static_cast<int>(rng.uniform_int(4));
    std::vector<int> sizes(H);
    for (int& s : sizes) s = 2 + static_cast<int>(rng.uniform_int(4));
    const int A = 2 + static_cast<int>(rng.uniform_int(3));
    InstancePair inst = random_layered_mdp(sizes, A, rng, ExpertKind::kAction0);
    const double alpha = 0.1 + 1.9 * rng.uniform();

    RewardTable rt;
    rt.r.resize(H);
    for (int h = 0; h < H; ++h) {
      rt.r[h].resize(static_cast<size_t>(sizes[h]) * A);
      for (double& v : rt.r[h]) v = rng.uniform();
    }
    QTable q = soft_value_iteration(inst.mdp, rt, alpha);
    RewardTable back = induced_reward(inst.mdp, q);
    for (int h = 0; h < H; ++h) {
      for (size_t k = 0; k < rt.r[h].size(); ++k) {
        max_err = std::max(max_err, std::abs(back.r[h][k] - rt.r[h][k]));
      }
    }
  }

  rep.metrics = {{"max_abs_err", max_err}, {"num_pairs", static_cast<double>(num_pairs)}};
  if (max_err > tol) {
    rep.details = "reward recovery error " + fmt(max_err) + " exceeds " + fmt(tol);
  }
  rep.passed = rep.details.empty();
  return rep;
}

namespace {

struct SuiteNames {
  Suite suite;
  const char* name;
};

constexpr SuiteNames kSuites[] = {
    {Suite::kThm1, "thm1"},   {Suite::kCor1, "cor1"},           {Suite::kThm2, "thm2"},
    {Suite::kLemma1, "lemma1"}, {Suite::kProp1, "prop1"}, {Suite::kGradCheck, "gradcheck"},
    {Suite::kAll, "all"},
};

// A checker that throws is recorded as a failed report carrying the message.
template <typename Fn>
void run_named(std::vector<CheckReport>& out, const std::string& name, Fn&& fn) {
  try {
    CheckReport rep = fn();
    rep.name = name;
    out.push_back(std::move(rep));
  } catch (const std::exception& e) {
    CheckReport rep;
    rep.name = name;
    rep.passed = false;
    rep.details = e.what();
    out.push_back(std::move(rep));
  }
}

struct RandomInstance {
  LayeredMdp mdp;
  TabularPolicy expert;
  DemoDataset demo;
};

RandomInstance random_instance(uint64_t gen_seed, uint64_t demo_seed, int max_extra_h,
                               int max_extra_a, int size_lo, int size_span, int n_demos,
                               uint64_t salt) {
  Rng rng(mix_seed(gen_seed, {salt}));
  const int H = 2 + static_cast<int>(salt % static_cast<uint64_t>(max_extra_h + 1));
  const int A = 2 + static_cast<int>(salt % static_cast<uint64_t>(max_extra_a + 1));
  std::vector<int> sizes(H);
  for (int& s : sizes) s = size_lo + static_cast<int>(rng.uniform_int(size_span));
  RandomInstance inst;
  InstancePair pair = random_layered_mdp(sizes, A, rng, ExpertKind::kRandomAction);
  inst.mdp = std::move(pair.mdp);
  inst.expert = std::move(pair.expert);
  inst.demo = collect_demos(inst.mdp, inst.expert, n_demos, demo_seed);
  return inst;
}

RandomInstance random_td_instance(uint64_t gen_seed, uint64_t demo_seed, uint64_t salt) {
  Rng rng(mix_seed(gen_seed, {salt}));
  const int H = 2 + static_cast<int>(salt % 3);
  const int A = 2 + static_cast<int>(salt % 2);
  std::vector<int> sizes(H);
  for (int& s : sizes) s = 2 + static_cast<int>(rng.uniform_int(3));
  RandomInstance inst;
  InstancePair pair = random_td_mdp(sizes, A, rng);
  inst.mdp = std::move(pair.mdp);
  inst.expert = std::move(pair.expert);
  inst.demo = collect_demos(inst.mdp, inst.expert, 1, demo_seed);
  return inst;
}

}  // namespace

std::optional<Suite> parse_suite(const std::string& name) {
  for (const auto& s : kSuites) {
    if (name == s.name) return s.suite;
  }
  return std::nullopt;
}

const char* suite_name(Suite s) {
  for (const auto& e : kSuites) {
    if (e.suite == s) return e.name;
  }
  return "unknown";
}

std::vector<CheckReport> verify_suite(Suite suite, uint64_t seed, double tol_override) {
  std::vector<CheckReport> out;
  auto tol = [&](double dflt) { return tol_override > 0.0 ? tol_override : dflt; };

  switch (suite) {
    case Suite::kThm1: {
      SolverConfig iq_cfg;
      iq_cfg.alpha = 1.0;
      iq_cfg.max_iters = 200000;
      for (uint64_t i = 0; i < 10; ++i) {
        run_named(out, "thm1/random-" + std::to_string(i), [&] {
          RandomInstance inst = random_instance(mix_seed(seed, {11}), mix_seed(seed, {12, i}), 3,
                                                2, 2, 5, 3, i);
          return check_thm1(inst.mdp, inst.demo, iq_cfg, tol(1e-3), 1e-6);
        });
      }
      run_named(out, "thm1/reset-cliff", [&] {
        InstancePair pair = reset_cliff({5, 5, 10, 2});
        DemoDataset demo = collect_demos(pair.mdp, pair.expert, 2, mix_seed(seed, {13}));
        return check_thm1(pair.mdp, demo, iq_cfg, tol(1e-3), 1e-6);
      });
      break;
    }
    case Suite::kCor1: {
      run_named(out, "cor1/reset-cliff-sweep", [&] {
        Cor1Config cfg;
        cfg.seed = mix_seed(seed, {14});
        return check_cor1(cfg);
      });
      break;
    }
    case Suite::kThm2: {
      run_named(out, "thm2/d5", [&] {
        ExampleD5 d5 = example_d5();
        SolverConfig cfg;
        cfg.alpha = kD5Alpha;
        SolveResult res = dual_qdm_exact(d5.mdp, d5.demo, cfg);
        return check_thm2_saddle(d5.mdp, d5.demo, res, tol(1e-9), 1e-3, 1e-6);
      });
      for (uint64_t i = 0; i < 10; ++i) {
        run_named(out, "thm2/random-" + std::to_string(i), [&] {
          RandomInstance inst = random_instance(mix_seed(seed, {21}), mix_seed(seed, {22, i}), 2,
                                                1, 2, 4, 2, i);
          SolverConfig cfg;
          cfg.alpha = 1.0;
          cfg.max_iters = 500000;
          SolveResult res = dual_qdm_exact(inst.mdp, inst.demo, cfg);
          return check_thm2_saddle(inst.mdp, inst.demo, res, tol(1e-9), 1e-3, 1e-6);
        });
      }
      break;
    }
    case Suite::kLemma1: {
      run_named(out, "lemma1/d5", [&] {
        ExampleD5 d5 = example_d5();
        SolverConfig cfg;
        cfg.alpha = kD5Alpha;
        SolveResult res = dual_qdm_exact(d5.mdp, d5.demo, cfg);
        return check_lemma1(d5.mdp, d5.demo, *res.q, tol(1e-3));
      });
      for (uint64_t i = 0; i < 10; ++i) {
        run_named(out, "lemma1/td-" + std::to_string(i), [&] {
          RandomInstance inst =
              random_td_instance(mix_seed(seed, {31}), mix_seed(seed, {32, i}), i);
          SolverConfig cfg;
          SolveResult res = dual_qdm_exact(inst.mdp, inst.demo, cfg);
          return check_lemma1(inst.mdp, inst.demo, *res.q, tol(1e-3));
        });
      }
      break;
    }
    case Suite::kProp1: {
      run_named(out, "prop1/d5", [&] {
        ExampleD5 d5 = example_d5();
        SolverConfig cfg;
        cfg.alpha = kD5Alpha;
        return check_prop1(d5.mdp, d5.expert, d5.demo, cfg, tol(1e-4), 1e-9);
      });
      for (uint64_t i = 0; i < 10; ++i) {
        run_named(out, "prop1/td-" + std::to_string(i), [&] {
          RandomInstance inst =
              random_td_instance(mix_seed(seed, {41}), mix_seed(seed, {42, i}), i);
          SolverConfig cfg;
          return check_prop1(inst.mdp, inst.expert, inst.demo, cfg, tol(1e-4), 1e-9);
        });
      }
      break;
    }
    case Suite::kGradCheck: {
      RandomInstance inst;
      bool built = false;
      auto build = [&]() -> RandomInstance& {
        if (!built) {
          Rng rng(mix_seed(seed, {51}));
          InstancePair pair =
              random_layered_mdp({3, 4, 4, 3}, 3, rng, ExpertKind::kRandomAction);
          inst.mdp = std::move(pair.mdp);
          inst.expert = std::move(pair.expert);
          inst.demo = collect_demos(inst.mdp, inst.expert, 3, mix_seed(seed, {52}));
          built = true;
        }
        return inst;
      };
      run_named(out, "gradcheck/dual", [&] {
        RandomInstance& r = build();
        return grad_check(GradObjective::kDual, r.mdp, r.demo, 1.0, 20, mix_seed(seed, {53, 0}),
                          tol(1e-5), 1e-8);
      });
      run_named(out, "gradcheck/iq_tv", [&] {
        RandomInstance& r = build();
        return grad_check(GradObjective::kIqTv, r.mdp, r.demo, 1.0, 20, mix_seed(seed, {53, 1}),
                          tol(1e-5), 1e-8);
      });
      run_named(out, "gradcheck/iq_chi2", [&] {
        RandomInstance& r = build();
        return grad_check(GradObjective::kIqChi2, r.mdp, r.demo, 1.0, 20,
                          mix_seed(seed, {53, 2}), tol(1e-5), 1e-8);
      });
      run_named(out, "gradcheck/reward-round-trip",
                [&] { return check_round_trip(20, mix_seed(seed, {54}), tol(1e-10)); });
      break;
    }
    case Suite::kAll: {
      for (Suite s : {Suite::kThm1, Suite::kCor1, Suite::kThm2, Suite::kLemma1, Suite::kProp1,
                      Suite::kGradCheck}) {
        auto part = verify_suite(s, seed, tol_override);
        out.insert(out.end(), part.begin(), part.end());
      }
      break;
    }
  }
  return out;
}

}  // namespace ildm
