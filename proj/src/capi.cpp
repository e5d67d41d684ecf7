#include "ildm/ildm.h"

#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

#include "bench.hpp"
#include "demos.hpp"
#include "instances.hpp"
#include "mdp.hpp"
#include "rng.hpp"
#include "serialize.hpp"
#include "solvers.hpp"
#include "verify.hpp"

struct ildm_mdp {
  ildm::LayeredMdp v;
};
struct ildm_policy {
  ildm::TabularPolicy v;
};
struct ildm_demos {
  ildm::DemoDataset v;
};
struct ildm_result {
  ildm::SolveResult v;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename Fn>
int guard(Fn&& fn) {
  try {
    fn();
    return ILDM_OK;
  } catch (const ildm::ValidationError& e) {
    return fail(ILDM_ERR_VALIDATION, e.what());
  } catch (const ildm::PreconditionError& e) {
    return fail(ILDM_ERR_PRECONDITION, e.what());
  } catch (const ildm::SolverDivergence& e) {
    return fail(ILDM_ERR_DIVERGENCE, e.what());
  } catch (const ildm::IoError& e) {
    return fail(ILDM_ERR_IO, e.what());
  } catch (const ildm::ParseError& e) {
    return fail(ILDM_ERR_PARSE, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(ILDM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(ILDM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(ILDM_ERR_INTERNAL, e.what());
  }
}

int require_arg(bool ok, const char* what) {
  if (ok) return ILDM_OK;
  return fail(ILDM_ERR_INVALID_ARGUMENT, std::string("null or invalid argument: ") + what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ildm::SolverConfig to_cpp(const ildm_solver_config* cfg) {
  ildm::SolverConfig out;
  if (cfg == nullptr) return out;
  out.alpha = cfg->alpha;
  out.learning_rate = cfg->learning_rate;
  out.max_iters = cfg->max_iters;
  out.grad_tol = cfg->grad_tol;
  out.beta = cfg->beta;
  out.polyak_tau = cfg->polyak_tau;
  out.online_rollouts_per_iter = cfg->online_rollouts_per_iter;
  out.seed = cfg->seed;
  out.q_init = cfg->q_init;
  if (cfg->has_q_box != 0) out.q_box_C = cfg->q_box_C;
  out.record_trace = cfg->record_trace != 0;
  return out;
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

extern "C" {

const char* ildm_last_error(void) { return g_last_error.c_str(); }

void ildm_string_free(char* s) { std::free(s); }
void ildm_mdp_free(ildm_mdp* m) { delete m; }
void ildm_policy_free(ildm_policy* p) { delete p; }
void ildm_demos_free(ildm_demos* d) { delete d; }
void ildm_result_free(ildm_result* r) { delete r; }

int ildm_gen_reset_cliff(int S, int A, int H, int N, ildm_mdp** out_mdp,
                         ildm_policy** out_expert) {
  if (int rc = require_arg(out_mdp != nullptr && out_expert != nullptr, "output handles")) return rc;
  return guard([&] {
    ildm::InstancePair pair = ildm::reset_cliff({S, A, H, N});
    *out_mdp = new ildm_mdp{std::move(pair.mdp)};
    *out_expert = new ildm_policy{std::move(pair.expert)};
  });
}

int ildm_gen_d5(ildm_mdp** out_mdp, ildm_policy** out_expert, ildm_demos** out_demo) {
  return guard([&] {
    ildm::ExampleD5 d5 = ildm::example_d5();
    if (out_mdp != nullptr) *out_mdp = new ildm_mdp{std::move(d5.mdp)};
    if (out_expert != nullptr) *out_expert = new ildm_policy{std::move(d5.expert)};
    if (out_demo != nullptr) *out_demo = new ildm_demos{std::move(d5.demo)};
  });
}

int ildm_gen_random(int H, int S, int A, uint64_t seed, int td, ildm_mdp** out_mdp,
                    ildm_policy** out_expert) {
  if (int rc = require_arg(out_mdp != nullptr && out_expert != nullptr, "output handles")) return rc;
  return guard([&] {
    ildm::Rng rng(seed);
    std::vector<int> sizes(H, S);
    ildm::InstancePair pair =
        td != 0 ? ildm::random_td_mdp(sizes, A, rng)
                : ildm::random_layered_mdp(sizes, A, rng, ildm::ExpertKind::kRandomAction);
    *out_mdp = new ildm_mdp{std::move(pair.mdp)};
    *out_expert = new ildm_policy{std::move(pair.expert)};
  });
}

int ildm_mdp_from_json(const char* text, ildm_mdp** out) {
  if (int rc = require_arg(text != nullptr && out != nullptr, "text/output")) return rc;
  return guard([&] { *out = new ildm_mdp{ildm::mdp_from_json(text)}; });
}

int ildm_mdp_to_json(const ildm_mdp* m, char** out) {
  if (int rc = require_arg(m != nullptr && out != nullptr, "mdp/output")) return rc;
  return guard([&] { *out = dup_string(ildm::mdp_to_json(m->v)); });
}

int ildm_policy_from_json(const char* text, const ildm_mdp* m, ildm_policy** out) {
  if (int rc = require_arg(text != nullptr && m != nullptr && out != nullptr, "text/mdp/output"))
    return rc;
  return guard([&] { *out = new ildm_policy{ildm::policy_from_json(text, m->v)}; });
}

int ildm_policy_to_json(const ildm_policy* p, const ildm_mdp* m, char** out) {
  if (int rc = require_arg(p != nullptr && m != nullptr && out != nullptr, "policy/mdp/output"))
    return rc;
  return guard([&] { *out = dup_string(ildm::policy_to_json(p->v, m->v)); });
}

int ildm_demos_from_json(const char* text, const ildm_mdp* m, ildm_demos** out) {
  if (int rc = require_arg(text != nullptr && m != nullptr && out != nullptr, "text/mdp/output"))
    return rc;
  return guard([&] { *out = new ildm_demos{ildm::demos_from_json(text, m->v)}; });
}

int ildm_demos_to_json(const ildm_demos* d, const ildm_mdp* m, char** out) {
  if (int rc = require_arg(d != nullptr && m != nullptr && out != nullptr, "demos/mdp/output"))
    return rc;
  return guard([&] { *out = dup_string(ildm::demos_to_json(d->v, m->v)); });
}

int ildm_collect_demos(const ildm_mdp* m, const ildm_policy* expert, int num_trajectories,
                       uint64_t seed, ildm_demos** out) {
  if (int rc = require_arg(m != nullptr && expert != nullptr && out != nullptr,
                           "mdp/expert/output"))
    return rc;
  return guard([&] {
    *out = new ildm_demos{ildm::collect_demos(m->v, expert->v, num_trajectories, seed)};
  });
}

void ildm_solver_config_default(ildm_solver_config* cfg) {
  if (cfg == nullptr) return;
  ildm::SolverConfig d;
  cfg->alpha = d.alpha;
  cfg->learning_rate = d.learning_rate;
  cfg->max_iters = d.max_iters;
  cfg->grad_tol = d.grad_tol;
  cfg->beta = d.beta;
  cfg->polyak_tau = d.polyak_tau;
  cfg->online_rollouts_per_iter = d.online_rollouts_per_iter;
  cfg->seed = d.seed;
  cfg->q_init = d.q_init;
  cfg->has_q_box = 0;
  cfg->q_box_C = 0.0;
  cfg->record_trace = 0;
}

int ildm_solve(const ildm_mdp* m, const ildm_demos* d, const char* method,
               const ildm_solver_config* cfg, ildm_result** out) {
  if (int rc = require_arg(m != nullptr && d != nullptr && method != nullptr && out != nullptr,
                           "mdp/demos/method/output"))
    return rc;
  auto parsed = ildm::parse_method(method);
  if (!parsed.has_value()) {
    return fail(ILDM_ERR_INVALID_ARGUMENT, std::string("unknown method '") + method + "'");
  }
  return guard([&] {
    *out = new ildm_result{ildm::solve(m->v, d->v, *parsed, to_cpp(cfg))};
  });
}

int ildm_result_to_json(const ildm_result* r, const ildm_mdp* m, char** out) {
  if (int rc = require_arg(r != nullptr && m != nullptr && out != nullptr, "result/mdp/output"))
    return rc;
  return guard([&] { *out = dup_string(ildm::result_to_json(r->v, m->v)); });
}

int ildm_result_trace_csv(const ildm_result* r, char** out) {
  if (int rc = require_arg(r != nullptr && out != nullptr, "result/output")) return rc;
  return guard([&] { *out = dup_string(ildm::trace_csv(r->v)); });
}

int ildm_result_converged(const ildm_result* r, int* out) {
  if (int rc = require_arg(r != nullptr && out != nullptr, "result/output")) return rc;
  *out = r->v.converged ? 1 : 0;
  return ILDM_OK;
}

int ildm_result_policy(const ildm_result* r, ildm_policy** out) {
  if (int rc = require_arg(r != nullptr && out != nullptr, "result/output")) return rc;
  return guard([&] { *out = new ildm_policy{r->v.policy}; });
}

int ildm_policy_return(const ildm_mdp* m, const ildm_policy* p, double* out) {
  if (int rc = require_arg(m != nullptr && p != nullptr && out != nullptr, "mdp/policy/output"))
    return rc;
  return guard([&] { *out = ildm::policy_return(m->v, p->v); });
}

int ildm_verify(const char* suite, uint64_t seed, double tol, char** report_json, int* passed) {
  if (int rc = require_arg(suite != nullptr && passed != nullptr, "suite/passed")) return rc;
  auto parsed = ildm::parse_suite(suite);
  if (!parsed.has_value()) {
    return fail(ILDM_ERR_INVALID_ARGUMENT, std::string("unknown suite '") + suite + "'");
  }
  return guard([&] {
    std::vector<ildm::CheckReport> reports = ildm::verify_suite(*parsed, seed, tol);
    *passed = ildm::all_passed(reports) ? 1 : 0;
    if (report_json != nullptr) {
      *report_json = dup_string(ildm::reports_to_json(suite, reports));
    }
  });
}

int ildm_bench(const char* instance, const char* methods, const char* horizons, int S, int A,
               int N, int num_seeds, uint64_t base_seed, const ildm_solver_config* cfg,
               const char* mdp_path, const char* expert_path, char** csv_out,
               char** summary_out) {
  if (int rc = require_arg(instance != nullptr && methods != nullptr && csv_out != nullptr,
                           "instance/methods/output"))
    return rc;
  ildm::BenchConfig bcfg;
  const std::string inst = instance;
  if (inst == "reset_cliff") {
    bcfg.instance = ildm::BenchInstance::kResetCliff;
  } else if (inst == "d5") {
    bcfg.instance = ildm::BenchInstance::kD5;
  } else if (inst == "random") {
    bcfg.instance = ildm::BenchInstance::kRandom;
  } else if (inst == "from_file") {
    bcfg.instance = ildm::BenchInstance::kFromFile;
    if (int rc = require_arg(mdp_path != nullptr && expert_path != nullptr,
                             "mdp_path/expert_path for from_file"))
      return rc;
    bcfg.mdp_path = mdp_path;
    bcfg.expert_path = expert_path;
  } else {
    return fail(ILDM_ERR_INVALID_ARGUMENT, "unknown bench instance '" + inst + "'");
  }
  for (const std::string& name : split_csv(methods)) {
    auto m = ildm::parse_method(name);
    if (!m.has_value()) {
      return fail(ILDM_ERR_INVALID_ARGUMENT, "unknown method '" + name + "'");
    }
    bcfg.methods.push_back(*m);
  }
  if (horizons != nullptr) {
    bcfg.horizons.clear();
    for (const std::string& h : split_csv(horizons)) {
      try {
        bcfg.horizons.push_back(std::stoi(h));
      } catch (const std::exception&) {
        return fail(ILDM_ERR_INVALID_ARGUMENT, "bad horizon '" + h + "'");
      }
    }
  }
  bcfg.S = S;
  bcfg.A = A;
  bcfg.N = N;
  bcfg.num_seeds = num_seeds;
  bcfg.base_seed = base_seed;
  bcfg.solver = to_cpp(cfg);
  return guard([&] {
    ildm::BenchResult result = ildm::run_bench(bcfg);
    *csv_out = dup_string(ildm::bench_csv(result));
    if (summary_out != nullptr) *summary_out = dup_string(ildm::bench_summary_csv(result));
  });
}

}  // extern "C"
