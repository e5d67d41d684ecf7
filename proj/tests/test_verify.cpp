#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <doctest.h>

#include <json.hpp>

#include "instances.hpp"
#include "mdp.hpp"
#include "rng.hpp"
#include "solvers.hpp"
#include "verify.hpp"

using namespace ildm;

namespace {

Cor1Config sweep_base() {
  Cor1Config cfg;
  cfg.S = 3;
  cfg.A = 5;
  cfg.N = 45;
  cfg.num_seeds = 30;
  cfg.seed = 7;
  cfg.alpha = 0.1;
  cfg.q_space_max_iters = 5000;
  cfg.reward_space_max_iters = 2000;
  return cfg;
}

double metric(const CheckReport& rep, const std::string& key) {
  for (const auto& [k, v] : rep.metrics)
    if (k == key) return v;
  FAIL("missing metric ", key);
  return 0.0;
}

bool has_metric(const CheckReport& rep, const std::string& key) {
  for (const auto& [k, v] : rep.metrics) {
    (void)v;
    if (k == key) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("policy-matching check passes on the two-step example") {
  ExampleD5 d5 = example_d5();
  SolverConfig cfg;
  cfg.alpha = kD5Alpha;
  CheckReport rep = check_thm1(d5.mdp, d5.demo, cfg, 1e-3, 1e-6);
  CHECK(rep.passed);
  CHECK(rep.details.empty());
  CHECK(metric(rep, "max_tv_from_step2") <= 1e-3);
  CHECK(metric(rep, "max_uniform_dev_uncovered_initial") == 0.0);
  CHECK(metric(rep, "iq_iters") == 20000.0);
}

TEST_CASE("policy-matching check reports an undertrained fit") {
  ExampleD5 d5 = example_d5();
  SolverConfig cfg;
  cfg.alpha = kD5Alpha;
  cfg.max_iters = 10;
  CheckReport rep = check_thm1(d5.mdp, d5.demo, cfg, 1e-3, 1e-6);
  CHECK_FALSE(rep.passed);
  CHECK(rep.details.find("policy TV") != std::string::npos);
  CHECK(rep.details.find("exceeds") != std::string::npos);
}

TEST_CASE("closed-form gap matches hand sums at tiny horizons") {
  // S=4, N=2 gives miss probability eps = 3 * (1/3) * (2/3)^2 = 4/9.
  CHECK(bc_gap_closed_form({4, 5, 1, 2}) == doctest::Approx(16.0 / 45.0).epsilon(1e-15));
  const double eps = 4.0 / 9.0;
  const double h2 = 0.8 * (2.0 * eps + (1.0 - eps) * eps);
  CHECK(bc_gap_closed_form({4, 5, 2, 2}) == doctest::Approx(h2).epsilon(1e-14));
}

TEST_CASE("gap-growth sweep certifies the quadratic regime") {
  Cor1Config cfg = sweep_base();
  cfg.horizons = {10, 20, 40, 80};
  cfg.methods = {Method::kBc, Method::kDualQdmExact, Method::kAil};
  CheckReport rep = check_cor1(cfg);
  CHECK(rep.passed);
  CHECK(rep.details.empty());

  // Deterministic sweep: the cell statistics are frozen numbers.
  CHECK(metric(rep, "bc_mean_h80") == doctest::Approx(17.664384).epsilon(1e-5));
  CHECK(metric(rep, "bc_ratio_h20") == doctest::Approx(3.456860).epsilon(1e-5));
  CHECK(metric(rep, "bc_ratio_h40") == doctest::Approx(3.719416).epsilon(1e-5));
  CHECK(metric(rep, "bc_ratio_h80") == doctest::Approx(3.555593).epsilon(1e-5));
  // The occupancy matchers close all but a sliver of the baseline gap.
  const double dual_gap = metric(rep, "dual_qdm_exact_gap_largest_h");
  CHECK(dual_gap == doctest::Approx(0.017093).epsilon(1e-4));
  CHECK(metric(rep, "ail_gap_largest_h") == doctest::Approx(dual_gap).epsilon(1e-9));
  CHECK(dual_gap <= 0.1 * metric(rep, "bc_mean_h80"));
}

TEST_CASE("gap-growth sweep exposes the matcher's first-step bias") {
  // The demo-objective fixed point at step 1 weights actions by the true
  // initial distribution, not the empirical one, so whenever the draw
  // underrepresents a state the fitted row stops short of the count ratio.
  // The count-ratio baseline tracks the closed form; the matcher's full-
  // horizon gap inherits a persistent offset and the check reports it.
  Cor1Config cfg = sweep_base();
  cfg.horizons = {5, 10};
  cfg.q_space_max_iters = 20000;
  cfg.methods = {Method::kBc, Method::kIqTv};
  CheckReport rep = check_cor1(cfg);
  CHECK_FALSE(rep.passed);
  CHECK(rep.details.find("iq_tv") != std::string::npos);
  CHECK(has_metric(rep, "iq_tv_mean_h5"));
  CHECK(has_metric(rep, "iq_tv_mean_h10"));
  // The baseline itself stays healthy in the same sweep.
  CHECK(metric(rep, "bc_ratio_h10") >= 3.0);
  CHECK(metric(rep, "bc_ratio_h10") <= 5.0);
  CHECK(std::fabs(metric(rep, "bc_mean_h10") - metric(rep, "closed_form_h10")) <=
        3.0 * metric(rep, "bc_se_h10"));
}

TEST_CASE("gap-growth sweep rejects out-of-regime configurations") {
  // The default shape has eps = 4/9, far past where the quadratic target
  // approximates the true mean.
  CHECK_THROWS_WITH_AS(check_cor1(Cor1Config{}),
                       doctest::Contains("outside the quadratic regime"), PreconditionError);
}

TEST_CASE("gap-growth sweep flags a drifted closed form within the regime") {
  // eps is small enough to clear the regime gate but large enough that the
  // quadratic target visibly undershoots the true mean once enough seeds
  // shrink the standard error.
  Cor1Config cfg = sweep_base();
  cfg.N = 5;
  cfg.horizons = {10, 20};
  cfg.num_seeds = 150;
  cfg.methods = {Method::kBc};
  CheckReport rep = check_cor1(cfg);
  CHECK_FALSE(rep.passed);
  CHECK(rep.details.find("standard errors") != std::string::npos);
}

TEST_CASE("gap-growth sweep flags an untrained occupancy matcher") {
  Cor1Config cfg = sweep_base();
  cfg.horizons = {10, 20};
  cfg.reward_space_max_iters = 0;
  cfg.methods = {Method::kBc, Method::kDualQdmExact};
  CheckReport rep = check_cor1(cfg);
  CHECK_FALSE(rep.passed);
  CHECK(rep.details.find("exceeds a tenth") != std::string::npos);
}

TEST_CASE("gap-growth sweep requires the count-ratio baseline") {
  Cor1Config cfg = sweep_base();
  cfg.horizons = {5};
  cfg.num_seeds = 2;
  cfg.q_space_max_iters = 50;
  cfg.methods = {Method::kIqTv};
  CHECK_THROWS_WITH_AS(check_cor1(cfg), doctest::Contains("count-ratio baseline"),
                       PreconditionError);
}

TEST_CASE("saddle certificate accepts the converged dual and rejects tampering") {
  ExampleD5 d5 = example_d5();
  SolverConfig cfg;
  cfg.alpha = kD5Alpha;
  SolveResult res = dual_qdm_exact(d5.mdp, d5.demo, cfg);

  CheckReport good = check_thm2_saddle(d5.mdp, d5.demo, res, 1e-9, 1e-3, 1e-6);
  CHECK(good.passed);
  CHECK(metric(good, "best_response_max_tv") <= 1e-9);
  CHECK(metric(good, "value_abs_diff") <= 1e-6);
  CHECK(metric(good, "dual_value") == doctest::Approx(0.49999092032318604).epsilon(1e-12));

  SolveResult bent = res;
  bent.policy.probs[0][0] = 0.5;
  bent.policy.probs[0][1] = 0.5;
  CheckReport bad = check_thm2_saddle(d5.mdp, d5.demo, bent, 1e-9, 1e-3, 1e-6);
  CHECK_FALSE(bad.passed);
  CHECK(bad.details.find("best-response TV") != std::string::npos);
}

TEST_CASE("saddle certificate preconditions") {
  ExampleD5 d5 = example_d5();
  // Converged but not a reward-space result.
  SolveResult bc = bc_fit(d5.mdp, d5.demo);
  CHECK_THROWS_AS(check_thm2_saddle(d5.mdp, d5.demo, bc, 1e-9, 1e-3, 1e-6), PreconditionError);
  // Reward-space but out of budget.
  SolverConfig cfg;
  cfg.alpha = kD5Alpha;
  cfg.max_iters = 2;
  SolveResult stub = dual_qdm_exact(d5.mdp, d5.demo, cfg);
  REQUIRE_FALSE(stub.converged);
  CHECK_THROWS_AS(check_thm2_saddle(d5.mdp, d5.demo, stub, 1e-9, 1e-3, 1e-6), PreconditionError);
}

TEST_CASE("recovered-reward check separates demonstrated from undemonstrated pairs") {
  ExampleD5 d5 = example_d5();
  SolverConfig cfg;
  cfg.alpha = kD5Alpha;
  SolveResult res = dual_qdm_exact(d5.mdp, d5.demo, cfg);
  CheckReport good = check_lemma1(d5.mdp, d5.demo, *res.q, 1e-3);
  CHECK(good.passed);
  CHECK(metric(good, "min_step_max_visited") >= 1.0 - 1e-3);
  CHECK(metric(good, "max_unvisited_abs") <= 1e-3);

  // A zero table induces zero reward everywhere: no demonstrated pair
  // saturates.
  QTable zeros;
  zeros.alpha = kD5Alpha;
  zeros.q.assign(2, Layer(4, 0.0));
  CheckReport flat = check_lemma1(d5.mdp, d5.demo, zeros, 1e-3);
  CHECK_FALSE(flat.passed);
  CHECK(flat.details.find("no demonstrated pair") != std::string::npos);

  // Saturated on the demo support but leaking onto an undemonstrated pair.
  RewardTable leak;
  leak.r.assign(2, Layer(4, 0.0));
  leak.r[0][0] = 1.0;
  leak.r[1][0] = 1.0;
  leak.r[0][2] = 0.5;
  QTable ql = soft_value_iteration(d5.mdp, leak, kD5Alpha);
  CheckReport spread = check_lemma1(d5.mdp, d5.demo, ql, 1e-3);
  CHECK_FALSE(spread.passed);
  CHECK(spread.details.find("undemonstrated pair") != std::string::npos);
  CHECK(metric(spread, "max_unvisited_abs") == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("uncovered-state check needs dominance and a converged dual") {
  ExampleD5 d5 = example_d5();
  SolverConfig cfg;
  cfg.alpha = kD5Alpha;
  CheckReport good = check_prop1(d5.mdp, d5.expert, d5.demo, cfg, 1e-4, 1e-9);
  CHECK(good.passed);
  CHECK(metric(good, "uncovered_states") == 1.0);
  CHECK(metric(good, "min_expert_margin") > 1e-4);
  CHECK(metric(good, "max_flat_row_spread") <= 1e-9);

  // Collapse every transition onto state 1: both actions tie, dominance dies.
  LayeredMdp tied = d5.mdp;
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a)
      for (int s2 = 0; s2 < 2; ++s2) tied.transitions[0][(s * 2 + a) * 2 + s2] = (s2 == 0);
  CHECK_THROWS_AS(check_prop1(tied, d5.expert, d5.demo, cfg, 1e-4, 1e-9), PreconditionError);

  SolverConfig stub = cfg;
  stub.max_iters = 1;
  CheckReport unconv = check_prop1(d5.mdp, d5.expert, d5.demo, stub, 1e-4, 1e-9);
  CHECK_FALSE(unconv.passed);
  CHECK(unconv.details.find("did not converge") != std::string::npos);
}

TEST_CASE("gradient checks and reward recovery at direct call sites") {
  ExampleD5 d5 = example_d5();
  for (GradObjective obj : {GradObjective::kDual, GradObjective::kIqTv, GradObjective::kIqChi2}) {
    CheckReport rep = grad_check(obj, d5.mdp, d5.demo, 0.3, 2, 77, 1e-5, 1e-8);
    CHECK(rep.passed);
    CHECK(metric(rep, "max_rel_err") <= 1e-5);
  }
  CheckReport rt = check_round_trip(3, 123, 1e-10);
  CHECK(rt.passed);
  CHECK(metric(rt, "max_abs_err") <= 1e-10);
  // An absurd tolerance trips the same check honestly.
  CheckReport tight = check_round_trip(3, 123, 1e-18);
  CHECK_FALSE(tight.passed);
  CHECK(tight.details.find("reward recovery error") != std::string::npos);
}

TEST_CASE("suite names round-trip") {
  for (const char* name : {"thm1", "cor1", "thm2", "lemma1", "prop1", "gradcheck", "all"}) {
    auto s = parse_suite(name);
    REQUIRE(s.has_value());
    CHECK(std::string(suite_name(*s)) == name);
  }
  CHECK_FALSE(parse_suite("thm3").has_value());
  CHECK_FALSE(parse_suite("").has_value());
}

TEST_CASE("verification suites run green except the pinned sweep") {
  struct Expect {
    Suite suite;
    size_t count;
    bool all_pass;
  };
  const Expect expected[] = {
      {Suite::kThm1, 11, true},   {Suite::kCor1, 1, false},  {Suite::kThm2, 11, true},
      {Suite::kLemma1, 11, true}, {Suite::kProp1, 11, true}, {Suite::kGradCheck, 4, true},
  };
  for (const auto& e : expected) {
    std::vector<CheckReport> reps = verify_suite(e.suite, kDefaultVerifySeed, 0.0);
    CHECK(reps.size() == e.count);
    CHECK(all_passed(reps) == e.all_pass);
    for (const auto& r : reps) CHECK_FALSE(r.name.empty());
  }
  // The pinned sweep shape sits outside the quadratic regime and says so.
  std::vector<CheckReport> cor1 = verify_suite(Suite::kCor1, kDefaultVerifySeed, 0.0);
  REQUIRE(cor1.size() == 1);
  CHECK(cor1[0].name == "cor1/reset-cliff-sweep");
  CHECK(cor1[0].details.find("outside the quadratic regime") != std::string::npos);
}

TEST_CASE("reports serialize to JSON with their metrics") {
  CheckReport rep;
  rep.name = "demo-check";
  rep.passed = false;
  rep.tolerance = 0.25;
  rep.metrics = {{"alpha", 1.5}, {"beta", -2.0}};
  rep.details = "something drifted";
  auto j = nlohmann::ordered_json::parse(report_to_json(rep));
  CHECK(j["name"] == "demo-check");
  CHECK(j["passed"] == false);
  CHECK(j["tolerance"] == 0.25);
  CHECK(j["metrics"]["alpha"] == 1.5);
  CHECK(j["metrics"]["beta"] == -2.0);
  CHECK(j["details"] == "something drifted");

  CheckReport ok;
  ok.name = "other";
  ok.passed = true;
  auto js = nlohmann::ordered_json::parse(reports_to_json("unit", {rep, ok}));
  CHECK(js["suite"] == "unit");
  CHECK(js["passed"] == false);
  REQUIRE(js["reports"].size() == 2);
  CHECK(js["reports"][0]["name"] == "demo-check");
  CHECK(js["reports"][1]["passed"] == true);
}
