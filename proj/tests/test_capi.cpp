// Exercises the shared-library interface the way an external caller would:
// only through ildm/ildm.h, with every object crossing the boundary as an
// opaque handle or a heap string.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "ildm/ildm.h"
#include "json.hpp"

using Json = nlohmann::json;

namespace {

struct MdpFree {
  void operator()(ildm_mdp* m) const { ildm_mdp_free(m); }
};
struct PolicyFree {
  void operator()(ildm_policy* p) const { ildm_policy_free(p); }
};
struct DemosFree {
  void operator()(ildm_demos* d) const { ildm_demos_free(d); }
};
struct ResultFree {
  void operator()(ildm_result* r) const { ildm_result_free(r); }
};

using MdpPtr = std::unique_ptr<ildm_mdp, MdpFree>;
using PolicyPtr = std::unique_ptr<ildm_policy, PolicyFree>;
using DemosPtr = std::unique_ptr<ildm_demos, DemosFree>;
using ResultPtr = std::unique_ptr<ildm_result, ResultFree>;

// Takes ownership of a char* the library allocated.
std::string take(char* s) {
  REQUIRE(s != nullptr);
  std::string out(s);
  ildm_string_free(s);
  return out;
}

struct D5 {
  MdpPtr mdp;
  DemosPtr demo;
};

D5 make_d5() {
  ildm_mdp* m = nullptr;
  ildm_demos* d = nullptr;
  REQUIRE(ildm_gen_d5(&m, nullptr, &d) == ILDM_OK);
  return {MdpPtr(m), DemosPtr(d)};
}

// Drops the final comma-separated field of every line. Used to compare
// benchmark CSVs while ignoring the wall-time column.
std::string strip_last_column(const std::string& csv) {
  std::string out;
  size_t start = 0;
  while (start < csv.size()) {
    size_t end = csv.find('\n', start);
    if (end == std::string::npos) end = csv.size();
    const std::string line = csv.substr(start, end - start);
    const size_t comma = line.rfind(',');
    out += comma == std::string::npos ? line : line.substr(0, comma);
    out += '\n';
    start = end + 1;
  }
  return out;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("reset cliff generation and expert return") {
  ildm_mdp* m = nullptr;
  ildm_policy* e = nullptr;
  REQUIRE(ildm_gen_reset_cliff(4, 5, 6, 2, &m, &e) == ILDM_OK);
  MdpPtr mdp(m);
  PolicyPtr expert(e);

  double ret = 0.0;
  REQUIRE(ildm_policy_return(mdp.get(), expert.get(), &ret) == ILDM_OK);
  CHECK(ret == doctest::Approx(6.0).epsilon(1e-12));

  // The initial mixture needs S - 2 <= N + 1 covered slots.
  ildm_mdp* bad = nullptr;
  ildm_policy* bad_e = nullptr;
  CHECK(ildm_gen_reset_cliff(7, 5, 6, 2, &bad, &bad_e) == ILDM_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(ildm_last_error()) > 0);
  CHECK(bad == nullptr);
}

TEST_CASE("worked example generation with optional outputs") {
  ildm_mdp* m = nullptr;
  ildm_policy* e = nullptr;
  ildm_demos* d = nullptr;
  REQUIRE(ildm_gen_d5(&m, &e, &d) == ILDM_OK);
  MdpPtr mdp(m);
  PolicyPtr expert(e);
  DemosPtr demo(d);
  CHECK(mdp != nullptr);
  CHECK(expert != nullptr);
  CHECK(demo != nullptr);

  // Any output may be skipped, and the instance is always the same.
  ildm_mdp* only_m = nullptr;
  REQUIRE(ildm_gen_d5(&only_m, nullptr, nullptr) == ILDM_OK);
  MdpPtr mdp2(only_m);
  char* j1 = nullptr;
  char* j2 = nullptr;
  REQUIRE(ildm_mdp_to_json(mdp.get(), &j1) == ILDM_OK);
  REQUIRE(ildm_mdp_to_json(mdp2.get(), &j2) == ILDM_OK);
  CHECK(take(j1) == take(j2));
}

TEST_CASE("serialization round trips are byte stable") {
  ildm_mdp* m = nullptr;
  ildm_policy* e = nullptr;
  REQUIRE(ildm_gen_reset_cliff(4, 5, 3, 2, &m, &e) == ILDM_OK);
  MdpPtr mdp(m);
  PolicyPtr expert(e);

  char* mj = nullptr;
  REQUIRE(ildm_mdp_to_json(mdp.get(), &mj) == ILDM_OK);
  const std::string mdp_json = take(mj);

  ildm_mdp* m2 = nullptr;
  REQUIRE(ildm_mdp_from_json(mdp_json.c_str(), &m2) == ILDM_OK);
  MdpPtr mdp_rt(m2);
  char* mj2 = nullptr;
  REQUIRE(ildm_mdp_to_json(mdp_rt.get(), &mj2) == ILDM_OK);
  CHECK(take(mj2) == mdp_json);

  char* pj = nullptr;
  REQUIRE(ildm_policy_to_json(expert.get(), mdp.get(), &pj) == ILDM_OK);
  const std::string policy_json = take(pj);
  ildm_policy* p2 = nullptr;
  REQUIRE(ildm_policy_from_json(policy_json.c_str(), mdp.get(), &p2) == ILDM_OK);
  PolicyPtr expert_rt(p2);
  char* pj2 = nullptr;
  REQUIRE(ildm_policy_to_json(expert_rt.get(), mdp.get(), &pj2) == ILDM_OK);
  CHECK(take(pj2) == policy_json);

  ildm_demos* d = nullptr;
  REQUIRE(ildm_collect_demos(mdp.get(), expert.get(), 6, 42, &d) == ILDM_OK);
  DemosPtr demo(d);
  char* dj = nullptr;
  REQUIRE(ildm_demos_to_json(demo.get(), mdp.get(), &dj) == ILDM_OK);
  const std::string demo_json = take(dj);
  ildm_demos* d2 = nullptr;
  REQUIRE(ildm_demos_from_json(demo_json.c_str(), mdp.get(), &d2) == ILDM_OK);
  DemosPtr demo_rt(d2);
  char* dj2 = nullptr;
  REQUIRE(ildm_demos_to_json(demo_rt.get(), mdp.get(), &dj2) == ILDM_OK);
  CHECK(take(dj2) == demo_json);
}

TEST_CASE("demo collection is seed deterministic") {
  ildm_mdp* m = nullptr;
  ildm_policy* e = nullptr;
  REQUIRE(ildm_gen_reset_cliff(4, 5, 4, 2, &m, &e) == ILDM_OK);
  MdpPtr mdp(m);
  PolicyPtr expert(e);

  std::string a, b;
  for (std::string* out : {&a, &b}) {
    ildm_demos* d = nullptr;
    REQUIRE(ildm_collect_demos(mdp.get(), expert.get(), 5, 7, &d) == ILDM_OK);
    DemosPtr demo(d);
    char* dj = nullptr;
    REQUIRE(ildm_demos_to_json(demo.get(), mdp.get(), &dj) == ILDM_OK);
    *out = take(dj);
  }
  CHECK(a == b);

  ildm_demos* none = nullptr;
  CHECK(ildm_collect_demos(mdp.get(), expert.get(), 0, 7, &none) == ILDM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("solving the worked example through the boundary") {
  D5 d5 = make_d5();

  ildm_solver_config cfg;
  ildm_solver_config_default(&cfg);
  CHECK(cfg.alpha == 1.0);
  CHECK(cfg.max_iters == 20000);
  CHECK(cfg.beta == 100.0);
  CHECK(cfg.has_q_box == 0);
  CHECK(cfg.record_trace == 0);

  cfg.alpha = 0.1;
  cfg.record_trace = 1;
  ildm_result* r = nullptr;
  REQUIRE(ildm_solve(d5.mdp.get(), d5.demo.get(), "dual_qdm_exact", &cfg, &r) == ILDM_OK);
  ResultPtr res(r);

  int conv = 0;
  REQUIRE(ildm_result_converged(res.get(), &conv) == ILDM_OK);
  CHECK(conv == 1);

  char* rj = nullptr;
  REQUIRE(ildm_result_to_json(res.get(), d5.mdp.get(), &rj) == ILDM_OK);
  const Json j = Json::parse(take(rj));
  CHECK(j.at("method") == "dual_qdm_exact");
  CHECK(j.at("converged") == true);
  CHECK(j.at("iters") == 2198);
  CHECK(j.contains("reward"));

  char* tc = nullptr;
  REQUIRE(ildm_result_trace_csv(res.get(), &tc) == ILDM_OK);
  const std::string trace = take(tc);
  CHECK(trace.rfind("iter,objective,grad_norm\n", 0) == 0);
  CHECK(count_lines(trace) == 2200);  // header + 2199 recorded iterations

  ildm_policy* p = nullptr;
  REQUIRE(ildm_result_policy(res.get(), &p) == ILDM_OK);
  PolicyPtr policy(p);
  double ret = 0.0;
  REQUIRE(ildm_policy_return(d5.mdp.get(), policy.get(), &ret) == ILDM_OK);
  CHECK(std::isfinite(ret));
}

TEST_CASE("default configuration works and the box is honored") {
  D5 d5 = make_d5();

  // NULL config means defaults.
  ildm_result* r = nullptr;
  REQUIRE(ildm_solve(d5.mdp.get(), d5.demo.get(), "bc", nullptr, &r) == ILDM_OK);
  ResultPtr bc(r);
  int conv = 0;
  REQUIRE(ildm_result_converged(bc.get(), &conv) == ILDM_OK);
  CHECK(conv == 1);

  ildm_solver_config cfg;
  ildm_solver_config_default(&cfg);
  cfg.alpha = 0.1;
  cfg.has_q_box = 1;
  cfg.q_box_C = 0.5;
  ildm_result* r2 = nullptr;
  REQUIRE(ildm_solve(d5.mdp.get(), d5.demo.get(), "iq_tv", &cfg, &r2) == ILDM_OK);
  ResultPtr boxed(r2);
  REQUIRE(ildm_result_converged(boxed.get(), &conv) == ILDM_OK);
  CHECK(conv == 1);
  char* rj = nullptr;
  REQUIRE(ildm_result_to_json(boxed.get(), d5.mdp.get(), &rj) == ILDM_OK);
  const Json j = Json::parse(take(rj));
  CHECK(j.at("iters") == 151);
  CHECK(j.at("config").at("q_box_C") == 0.5);
}

TEST_CASE("argument and parse failures set distinct codes") {
  CHECK(ildm_gen_reset_cliff(4, 5, 3, 2, nullptr, nullptr) == ILDM_ERR_INVALID_ARGUMENT);
  CHECK(std::string(ildm_last_error()).find("null or invalid argument") != std::string::npos);

  char* s = nullptr;
  CHECK(ildm_mdp_to_json(nullptr, &s) == ILDM_ERR_INVALID_ARGUMENT);

  ildm_mdp* m = nullptr;
  CHECK(ildm_mdp_from_json("{ not json", &m) == ILDM_ERR_PARSE);
  CHECK(m == nullptr);

  D5 d5 = make_d5();
  ildm_policy* p = nullptr;
  CHECK(ildm_policy_from_json("[]", d5.mdp.get(), &p) == ILDM_ERR_PARSE);

  // Demos pinned to a different MDP are rejected on hash mismatch.
  ildm_mdp* cm = nullptr;
  ildm_policy* ce = nullptr;
  REQUIRE(ildm_gen_reset_cliff(4, 5, 2, 2, &cm, &ce) == ILDM_OK);
  MdpPtr cliff(cm);
  PolicyPtr cliff_expert(ce);
  ildm_demos* cd = nullptr;
  REQUIRE(ildm_collect_demos(cliff.get(), cliff_expert.get(), 3, 1, &cd) == ILDM_OK);
  DemosPtr cliff_demo(cd);
  char* dj = nullptr;
  REQUIRE(ildm_demos_to_json(cliff_demo.get(), cliff.get(), &dj) == ILDM_OK);
  const std::string demo_json = take(dj);
  ildm_demos* wrong = nullptr;
  CHECK(ildm_demos_from_json(demo_json.c_str(), d5.mdp.get(), &wrong) == ILDM_ERR_PARSE);
}

TEST_CASE("solver failures map to precondition and divergence codes") {
  D5 d5 = make_d5();

  ildm_result* r = nullptr;
  CHECK(ildm_solve(d5.mdp.get(), d5.demo.get(), "gail", nullptr, &r) ==
        ILDM_ERR_INVALID_ARGUMENT);
  CHECK(std::string(ildm_last_error()).find("unknown method") != std::string::npos);

  ildm_solver_config cfg;
  ildm_solver_config_default(&cfg);
  cfg.alpha = 0.0;
  CHECK(ildm_solve(d5.mdp.get(), d5.demo.get(), "iq_tv", &cfg, &r) == ILDM_ERR_PRECONDITION);

  ildm_solver_config_default(&cfg);
  cfg.max_iters = -1;
  CHECK(ildm_solve(d5.mdp.get(), d5.demo.get(), "iq_tv", &cfg, &r) == ILDM_ERR_PRECONDITION);

  ildm_solver_config_default(&cfg);
  cfg.alpha = 0.1;
  cfg.learning_rate = 1e5;
  CHECK(ildm_solve(d5.mdp.get(), d5.demo.get(), "iq_chi2", &cfg, &r) == ILDM_ERR_DIVERGENCE);
}

TEST_CASE("verification suites run through the boundary") {
  char* report = nullptr;
  int passed = -1;
  REQUIRE(ildm_verify("gradcheck", 20260823, 0.0, &report, &passed) == ILDM_OK);
  CHECK(passed == 1);
  const Json j = Json::parse(take(report));
  CHECK(j.at("suite") == "gradcheck");
  CHECK(j.at("passed") == true);
  CHECK(j.at("reports").size() == 4);
  for (const auto& rep : j.at("reports")) CHECK(rep.at("passed") == true);

  // The gap-growth suite's pinned instance sits outside its own regime
  // gate, so the suite reports a failure; the call itself succeeds.
  passed = -1;
  REQUIRE(ildm_verify("cor1", 20260823, 0.0, nullptr, &passed) == ILDM_OK);
  CHECK(passed == 0);

  CHECK(ildm_verify("thm99", 1, 0.0, nullptr, &passed) == ILDM_ERR_INVALID_ARGUMENT);
  CHECK(std::string(ildm_last_error()).find("unknown suite") != std::string::npos);
  CHECK(ildm_verify(nullptr, 1, 0.0, nullptr, &passed) == ILDM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("benchmark sweep is deterministic apart from wall time") {
  ildm_solver_config cfg;
  ildm_solver_config_default(&cfg);
  cfg.alpha = 0.1;

  std::string csv[2], summary[2];
  for (int i = 0; i < 2; ++i) {
    char* c = nullptr;
    char* s = nullptr;
    REQUIRE(ildm_bench("d5", "bc,dual_qdm_exact", nullptr, 0, 0, 0, 3, 9, &cfg, nullptr,
                       nullptr, &c, &s) == ILDM_OK);
    csv[i] = take(c);
    summary[i] = take(s);
  }

  CHECK(csv[0].rfind("method,H,S,A,N,seed,gap,converged,wall_time_ms\n", 0) == 0);
  CHECK(count_lines(csv[0]) == 7);  // header + 2 methods x 3 seeds
  CHECK(strip_last_column(csv[0]) == strip_last_column(csv[1]));
  CHECK(summary[0].rfind("method,H,n,mean_gap,stderr_gap\n", 0) == 0);
  CHECK(count_lines(summary[0]) == 3);
  CHECK(summary[0] == summary[1]);

  char* c = nullptr;
  CHECK(ildm_bench("grid", "bc", nullptr, 4, 5, 2, 1, 0, nullptr, nullptr, nullptr, &c,
                   nullptr) == ILDM_ERR_INVALID_ARGUMENT);
  CHECK(std::string(ildm_last_error()).find("unknown bench instance") != std::string::npos);

  CHECK(ildm_bench("reset_cliff", "bc", "ten", 4, 5, 2, 1, 0, nullptr, nullptr, nullptr, &c,
                   nullptr) == ILDM_ERR_INVALID_ARGUMENT);

  CHECK(ildm_bench("d5", "bc", nullptr, 0, 0, 0, 0, 0, nullptr, nullptr, nullptr, &c,
                   nullptr) == ILDM_ERR_PRECONDITION);
}
