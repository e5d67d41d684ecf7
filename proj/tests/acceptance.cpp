// Release gate: eight end-to-end checks, one pass/fail line each. Every
// tolerance is pinned here, not read from configuration, so reruns answer
// the same question. Run with a criterion number 1..8, or no argument to
// run all of them.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "demos.hpp"
#include "instances.hpp"
#include "mdp.hpp"
#include "serialize.hpp"
#include "solvers.hpp"
#include "verify.hpp"

using namespace ildm;

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

struct Verdict {
  bool passed = false;
  std::string detail;
};

Verdict suite_verdict(Suite suite, const std::string& what) {
  const std::vector<CheckReport> reports = verify_suite(suite, kDefaultVerifySeed);
  Verdict v;
  v.passed = all_passed(reports);
  int ok = 0;
  for (const auto& r : reports)
    if (r.passed) ++ok;
  v.detail = std::to_string(ok) + "/" + std::to_string(reports.size()) + " " + what;
  if (!v.passed) {
    for (const auto& r : reports) {
      if (!r.passed) {
        v.detail += "; first failure " + r.name + ": " + r.details;
        break;
      }
    }
  }
  return v;
}

// Largest per-state total variation between two policies over steps
// h_lo .. H-1.
double max_state_tv(const LayeredMdp& mdp, const TabularPolicy& a, const TabularPolicy& b,
                    int h_lo) {
  double worst = 0.0;
  for (int h = h_lo; h < mdp.horizon; ++h) {
    for (int s = 0; s < mdp.layer_sizes[h]; ++s) {
      double tv = 0.0;
      for (int ac = 0; ac < mdp.num_actions; ++ac) {
        tv += std::abs(a.probs[h][s * mdp.num_actions + ac] -
                       b.probs[h][s * mdp.num_actions + ac]);
      }
      worst = std::max(worst, 0.5 * tv);
    }
  }
  return worst;
}

Verdict criterion1() { return suite_verdict(Suite::kThm1, "policy-match checks passed"); }

// Gap-growth sweep on the pinned reset-cliff configuration. Four
// sub-verdicts; all must hold.
Verdict criterion2() {
  Cor1Config cfg;  // S=4, A=5, N=2, H in {10,20,40,80}, 100 seeds, five methods
  cfg.seed = kDefaultVerifySeed;
  const Cor1Measurements m = measure_cor1(cfg);

  const auto method_idx = [&](const char* name) {
    return static_cast<size_t>(
        std::find(m.methods.begin(), m.methods.end(), name) - m.methods.begin());
  };
  const size_t bc = method_idx("bc");
  const size_t iq = method_idx("iq_tv");
  const size_t vd = method_idx("value_dice");
  const size_t dual = method_idx("dual_qdm_exact");
  const size_t ail = method_idx("ail");
  const size_t last = m.horizons.size() - 1;

  // (a) count-ratio baseline mean within 3 standard errors of the closed
  // form at every horizon.
  bool a_ok = true;
  double a_worst_z = 0.0;
  int a_worst_h = m.horizons[0];
  for (size_t i = 0; i < m.horizons.size(); ++i) {
    const Cor1Cell& c = m.cells[bc][i];
    const double z = std::abs(c.mean - m.closed_form[i]) / c.stderr_mean;
    if (z > a_worst_z) {
      a_worst_z = z;
      a_worst_h = m.horizons[i];
    }
    if (z > 3.0) a_ok = false;
  }

  // (b) baseline doubling ratios inside [3, 5].
  bool b_ok = true;
  std::string b_note;
  for (size_t i = 1; i < m.horizons.size(); ++i) {
    const double ratio = m.cells[bc][i].mean / m.cells[bc][i - 1].mean;
    if (ratio < 3.0 || ratio > 5.0) {
      b_ok = false;
      if (b_note.empty())
        b_note = fmt(ratio) + " at H=" + std::to_string(m.horizons[i - 1]) + "->" +
                 std::to_string(m.horizons[i]);
    }
  }

  // (c) soft-Q matcher and the ratio estimator overlap the baseline curve
  // within 10% relative at every horizon.
  bool c_ok = true;
  double c_worst = 0.0;
  for (size_t mi : {iq, vd}) {
    for (size_t i = 0; i < m.horizons.size(); ++i) {
      const double rel =
          std::abs(m.cells[mi][i].mean - m.cells[bc][i].mean) / m.cells[bc][i].mean;
      c_worst = std::max(c_worst, rel);
      if (rel > 0.10) c_ok = false;
    }
  }

  // (d) reward-matching solvers at most a tenth of the baseline gap at the
  // largest horizon.
  const double d_cap = 0.1 * m.cells[bc][last].mean;
  const double d_dual = m.cells[dual][last].mean;
  const double d_ail = m.cells[ail][last].mean;
  const bool d_ok = d_dual <= d_cap && d_ail <= d_cap;

  Verdict v;
  v.passed = a_ok && b_ok && c_ok && d_ok;
  v.detail = std::string("(a) ") + (a_ok ? "PASS" : "FAIL") + " worst |mean-closed_form| " +
             fmt(a_worst_z) + " SE at H=" + std::to_string(a_worst_h) + "; (b) " +
             (b_ok ? "PASS doubling ratios in [3, 5]" : "FAIL ratio " + b_note) + "; (c) " +
             (c_ok ? "PASS" : "FAIL") + " worst overlap deviation " + fmt(100.0 * c_worst) +
             "%; (d) " + (d_ok ? "PASS" : "FAIL") + " dual " + fmt(d_dual) + ", ail " +
             fmt(d_ail) + " vs cap " + fmt(d_cap);
  return v;
}

Verdict criterion3() { return suite_verdict(Suite::kThm2, "saddle certifications passed"); }

Verdict criterion4() { return suite_verdict(Suite::kLemma1, "reward saturation checks passed"); }

// Suite verdict plus the worked example's two pinned numbers: the reward
// matcher's Q gap at the undemonstrated initial state, and the soft-Q
// matcher's exactly flat row there.
Verdict criterion5() {
  Verdict v = suite_verdict(Suite::kProp1, "generalization contrast checks passed");

  const auto d5 = example_d5();
  const int A = d5.mdp.num_actions;

  SolverConfig cfg;
  cfg.alpha = 0.1;
  const SolveResult dual = solve(d5.mdp, d5.demo, Method::kDualQdmExact, cfg);
  const double gap = std::abs(dual.q->q[0][1 * A + 0] - dual.q->q[0][1 * A + 1]);
  const double target = 0.1 * std::log((std::exp(10.0) + 1.0) / 2.0);
  const bool gap_ok = dual.converged && std::abs(gap - target) <= 1e-3;

  const SolveResult iq = solve(d5.mdp, d5.demo, Method::kIqTv, cfg);
  const double spread = std::abs(iq.q->q[0][1 * A + 0] - iq.q->q[0][1 * A + 1]);
  const bool spread_ok = spread <= 1e-9;

  v.passed = v.passed && gap_ok && spread_ok;
  v.detail += "; worked example: dual Q gap " + fmt(gap) + " vs " + fmt(target) +
              " (tol 1e-3), soft-Q row spread " + fmt(spread) + " (tol 1e-9)";
  return v;
}

Verdict criterion6() { return suite_verdict(Suite::kGradCheck, "gradient and round-trip checks passed"); }

// Penalized solver against its exact counterpart on the worked example,
// and its reduction to the count-ratio baseline at zero penalty.
Verdict criterion7() {
  const auto d5 = example_d5();

  SolverConfig exact_cfg;
  exact_cfg.alpha = 0.1;
  const SolveResult exact = solve(d5.mdp, d5.demo, Method::kDualQdmExact, exact_cfg);

  SolverConfig pen_cfg;
  pen_cfg.alpha = 0.1;
  pen_cfg.beta = 100.0;
  pen_cfg.learning_rate = 0.01;
  pen_cfg.max_iters = 20000;
  pen_cfg.seed = 5;
  const SolveResult pen = solve(d5.mdp, d5.demo, Method::kDualQdmPenalty, pen_cfg);
  const double tv_exact = max_state_tv(d5.mdp, pen.policy, exact.policy, 0);

  SolverConfig zero_cfg;
  zero_cfg.alpha = 0.1;
  zero_cfg.beta = 0.0;
  zero_cfg.learning_rate = 0.1;
  zero_cfg.max_iters = 20000;
  zero_cfg.seed = 5;
  const SolveResult zero = solve(d5.mdp, d5.demo, Method::kDualQdmPenalty, zero_cfg);
  const SolveResult bc = bc_fit(d5.mdp, d5.demo);
  const double tv_bc = max_state_tv(d5.mdp, zero.policy, bc.policy, 1);

  Verdict v;
  v.passed = exact.converged && tv_exact <= 0.05 && tv_bc <= 1e-2;
  v.detail = "penalty 100 vs exact max state TV " + fmt(tv_exact) +
             " (tol 0.05); penalty 0 vs count ratio from step 2 " + fmt(tv_bc) +
             " (tol 1e-2)";
  return v;
}

// Every artifact the other criteria produce, generated twice with the same
// seeds and compared byte for byte. None of these artifacts contain
// timing fields.
Verdict criterion8() {
  const auto artifacts = [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (Suite s : {Suite::kThm1, Suite::kThm2, Suite::kLemma1, Suite::kProp1,
                    Suite::kGradCheck}) {
      out.emplace_back(std::string("suite ") + suite_name(s),
                       reports_to_json(suite_name(s), verify_suite(s, kDefaultVerifySeed)));
    }

    Cor1Config ccfg;
    ccfg.seed = kDefaultVerifySeed;
    const Cor1Measurements m = measure_cor1(ccfg);
    std::string sweep = "method,H,n,mean_gap,stderr_gap\n";
    for (size_t mi = 0; mi < m.methods.size(); ++mi) {
      for (size_t i = 0; i < m.horizons.size(); ++i) {
        sweep += m.methods[mi] + ',' + std::to_string(m.horizons[i]) + ',' +
                 std::to_string(m.cells[mi][i].n) + ',' + num_str(m.cells[mi][i].mean) + ',' +
                 num_str(m.cells[mi][i].stderr_mean) + '\n';
      }
    }
    out.emplace_back("gap sweep csv", sweep);

    const auto d5 = example_d5();
    SolverConfig cfg;
    cfg.alpha = 0.1;
    cfg.record_trace = true;
    for (Method method : {Method::kDualQdmExact, Method::kIqTv, Method::kDualQdmPenalty}) {
      SolverConfig c = cfg;
      if (method == Method::kDualQdmPenalty) {
        c.beta = 100.0;
        c.learning_rate = 0.01;
        c.seed = 5;
      }
      const SolveResult res = solve(d5.mdp, d5.demo, method, c);
      out.emplace_back(std::string("result json ") + method_name(method),
                       result_to_json(res, d5.mdp));
      out.emplace_back(std::string("trace csv ") + method_name(method), trace_csv(res));
    }
    return out;
  };

  const auto first = artifacts();
  const auto second = artifacts();

  Verdict v;
  v.passed = first.size() == second.size();
  for (size_t i = 0; v.passed && i < first.size(); ++i) {
    if (first[i] != second[i]) {
      v.passed = false;
      v.detail = "rerun differs in " + first[i].first;
    }
  }
  if (v.passed)
    v.detail = std::to_string(first.size()) + " artifacts byte-identical across reruns";
  return v;
}

Verdict run_criterion(int n) {
  switch (n) {
    case 1: return criterion1();
    case 2: return criterion2();
    case 3: return criterion3();
    case 4: return criterion4();
    case 5: return criterion5();
    case 6: return criterion6();
    case 7: return criterion7();
    default: return criterion8();
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  if (argc > 1) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > 8) {
      std::fprintf(stderr, "usage: %s [criterion 1..8]\n", argv[0]);
      return 2;
    }
    wanted.push_back(n);
  } else {
    for (int n = 1; n <= 8; ++n) wanted.push_back(n);
  }

  bool all_ok = true;
  for (int n : wanted) {
    Verdict v;
    try {
      v = run_criterion(n);
    } catch (const std::exception& e) {
      v.passed = false;
      v.detail = std::string("exception: ") + e.what();
    }
    all_ok = all_ok && v.passed;
    std::printf("criterion %d: %s -- %s\n", n, v.passed ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  return all_ok ? 0 : 1;
}
