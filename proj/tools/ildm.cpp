// Command-line front end. Talks to the library exclusively through the C
// interface so the shared library surface stays exercised end to end.
//
// Exit codes: 0 success, 1 a verification check failed, 2 usage or
// operational error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "ildm/ildm.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitError = 2;

[[nodiscard]] int fail_api(const char* what) {
  std::cerr << "error: " << what << ": " << ildm_last_error() << "\n";
  return kExitError;
}

bool write_file(const std::string& path, const char* text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot open '" << path << "' for writing\n";
    return false;
  }
  out << text;
  out.flush();
  if (!out) {
    std::cerr << "error: write failure on '" << path << "'\n";
    return false;
  }
  return true;
}

bool read_file(const std::string& path, std::string& text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open '" << path << "' for reading\n";
    return false;
  }
  text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  if (in.bad()) {
    std::cerr << "error: read failure on '" << path << "'\n";
    return false;
  }
  return true;
}

struct StringGuard {
  char* s = nullptr;
  ~StringGuard() { ildm_string_free(s); }
};

struct MdpGuard {
  ildm_mdp* p = nullptr;
  ~MdpGuard() { ildm_mdp_free(p); }
};
struct PolicyGuard {
  ildm_policy* p = nullptr;
  ~PolicyGuard() { ildm_policy_free(p); }
};
struct DemosGuard {
  ildm_demos* p = nullptr;
  ~DemosGuard() { ildm_demos_free(p); }
};
struct ResultGuard {
  ildm_result* p = nullptr;
  ~ResultGuard() { ildm_result_free(p); }
};

// Writes the generated artifact set under a common path prefix.
int emit_instance(ildm_mdp* mdp, ildm_policy* expert, ildm_demos* demos,
                  const std::string& prefix) {
  StringGuard mdp_json, expert_json, demo_json;
  if (ildm_mdp_to_json(mdp, &mdp_json.s) != ILDM_OK) return fail_api("serializing mdp");
  if (!write_file(prefix + ".mdp.json", mdp_json.s)) return kExitError;
  if (ildm_policy_to_json(expert, mdp, &expert_json.s) != ILDM_OK) {
    return fail_api("serializing expert policy");
  }
  if (!write_file(prefix + ".expert.json", expert_json.s)) return kExitError;
  if (demos != nullptr) {
    if (ildm_demos_to_json(demos, mdp, &demo_json.s) != ILDM_OK) {
      return fail_api("serializing demos");
    }
    if (!write_file(prefix + ".demos.json", demo_json.s)) return kExitError;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"imitation-learning lab on layered finite-horizon MDPs"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI file");

  ildm_solver_config solver;
  ildm_solver_config_default(&solver);
  bool q_box_set = false;
  double q_box_value = 0.0;
  bool record_trace = false;

  auto add_solver_opts = [&](CLI::App* cmd) {
    cmd->add_option("--alpha", solver.alpha, "entropy temperature");
    cmd->add_option("--lr", solver.learning_rate, "step size (0 = per-method default)");
    cmd->add_option("--max-iters", solver.max_iters, "iteration budget");
    cmd->add_option("--grad-tol", solver.grad_tol,
                    "projected-gradient stopping tolerance (0 = per-method default)");
    cmd->add_option("--beta", solver.beta, "penalty weight (dual_qdm_penalty)");
    cmd->add_option("--tau", solver.polyak_tau, "target-table mixing rate (dual_qdm_penalty)");
    cmd->add_option("--rollouts", solver.online_rollouts_per_iter,
                    "online rollouts per iteration (iq_reg / dual_qdm_penalty)");
    cmd->add_option("--q-init", solver.q_init, "constant Q initialization");
    cmd->add_option("--q-box", q_box_value, "clip Q entries to [0, C]");
    cmd->add_flag("--trace-objective", record_trace, "record the per-iteration trace");
  };

  // gen -------------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "generate instances");
  gen->require_subcommand(1);

  int S = 4, A = 5, H = 10, N = 2;
  int demo_count = -1;
  uint64_t seed = 0;
  bool td = false;
  std::string out_path, mdp_path, demos_path, expert_path, trace_path, summary_path;

  auto* gen_rc = gen->add_subcommand("reset-cliff", "reset-cliff family instance");
  gen_rc->add_option("--S", S, "states per layer")->capture_default_str();
  gen_rc->add_option("--A", A, "actions")->capture_default_str();
  gen_rc->add_option("--H", H, "horizon")->capture_default_str();
  gen_rc->add_option("--N", N, "mixture knob; default demo count")->capture_default_str();
  gen_rc->add_option("--demos", demo_count, "demo trajectories (-1 = N, 0 = none)");
  gen_rc->add_option("--seed", seed, "demo draw seed");
  gen_rc->add_option("--out", out_path, "output path prefix")->required();

  auto* gen_d5 = gen->add_subcommand("d5", "two-step worked example with its demo");
  gen_d5->add_option("--out", out_path, "output path prefix")->required();

  auto* gen_rand = gen->add_subcommand("random", "random layered instance");
  gen_rand->add_option("--H", H, "horizon")->capture_default_str();
  gen_rand->add_option("--S", S, "states per layer")->capture_default_str();
  gen_rand->add_option("--A", A, "actions")->capture_default_str();
  gen_rand->add_option("--seed", seed, "generator seed");
  gen_rand->add_flag("--td", td, "rejection-sample a transition-dominant instance");
  gen_rand->add_option("--demos", demo_count, "demo trajectories (0 = none)");
  gen_rand->add_option("--out", out_path, "output path prefix")->required();

  // solve -----------------------------------------------------------------
  auto* solve = app.add_subcommand("solve", "fit one method on an instance");
  std::string method;
  solve->add_option("--method", method, "bc|iq_tv|iq_chi2|iq_reg|value_dice|dual_qdm_exact|dual_qdm_penalty|ail")
      ->required();
  solve->add_option("--mdp", mdp_path, "MDP JSON path")->required();
  solve->add_option("--demos", demos_path, "demo JSON path")->required();
  solve->add_option("--out", out_path, "result JSON path")->required();
  solve->add_option("--trace", trace_path, "also write the objective trace CSV here");
  solve->add_option("--seed", solver.seed, "solver seed (online methods)");
  add_solver_opts(solve);

  // bench -----------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "gap sweep over methods and horizons");
  std::string instance = "reset_cliff";
  std::string methods = "bc,iq_tv,value_dice,dual_qdm_exact,ail";
  std::string horizons = "10,20,40,80";
  int num_seeds = 100;
  bench->add_option("--instance", instance, "reset_cliff|d5|random|from_file")
      ->capture_default_str();
  bench->add_option("--methods", methods, "comma-separated method list")->capture_default_str();
  bench->add_option("--horizons", horizons, "comma-separated horizon list")
      ->capture_default_str();
  bench->add_option("--S", S, "states per layer")->capture_default_str();
  bench->add_option("--A", A, "actions")->capture_default_str();
  bench->add_option("--N", N, "demo trajectories per seed")->capture_default_str();
  bench->add_option("--seeds", num_seeds, "demo seeds per cell")->capture_default_str();
  bench->add_option("--seed", seed, "base seed");
  bench->add_option("--mdp", mdp_path, "MDP JSON path (from_file)");
  bench->add_option("--expert", expert_path, "expert policy JSON path (from_file)");
  bench->add_option("--out", out_path, "per-run CSV path (default stdout)");
  bench->add_option("--summary", summary_path, "per-(method, H) aggregate CSV path");
  add_solver_opts(bench);

  // verify ----------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  std::string suite = "all";
  uint64_t verify_seed = 20260823;
  double tol = 0.0;
  verify->add_option("suite", suite, "thm1|cor1|thm2|lemma1|prop1|gradcheck|all")
      ->capture_default_str();
  verify->add_option("--seed", verify_seed, "suite seed")->capture_default_str();
  verify->add_option("--tol", tol, "override each check's primary tolerance");
  verify->add_option("--out", out_path, "write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  solver.record_trace = record_trace ? 1 : 0;
  q_box_set = solve->count("--q-box") > 0 || bench->count("--q-box") > 0;
  if (q_box_set) {
    solver.has_q_box = 1;
    solver.q_box_C = q_box_value;
  }

  if (gen_rc->parsed()) {
    MdpGuard mdp;
    PolicyGuard expert;
    DemosGuard demos;
    if (ildm_gen_reset_cliff(S, A, H, N, &mdp.p, &expert.p) != ILDM_OK) {
      return fail_api("generating reset-cliff instance");
    }
    const int n = demo_count < 0 ? N : demo_count;
    if (n > 0 && ildm_collect_demos(mdp.p, expert.p, n, seed, &demos.p) != ILDM_OK) {
      return fail_api("collecting demos");
    }
    return emit_instance(mdp.p, expert.p, demos.p, out_path);
  }
  if (gen_d5->parsed()) {
    MdpGuard mdp;
    PolicyGuard expert;
    DemosGuard demos;
    if (ildm_gen_d5(&mdp.p, &expert.p, &demos.p) != ILDM_OK) {
      return fail_api("generating the worked example");
    }
    return emit_instance(mdp.p, expert.p, demos.p, out_path);
  }
  if (gen_rand->parsed()) {
    MdpGuard mdp;
    PolicyGuard expert;
    DemosGuard demos;
    if (ildm_gen_random(H, S, A, seed, td ? 1 : 0, &mdp.p, &expert.p) != ILDM_OK) {
      return fail_api("generating a random instance");
    }
    if (demo_count > 0 &&
        ildm_collect_demos(mdp.p, expert.p, demo_count, seed + 1, &demos.p) != ILDM_OK) {
      return fail_api("collecting demos");
    }
    return emit_instance(mdp.p, expert.p, demos.p, out_path);
  }

  if (solve->parsed()) {
    std::string mdp_text, demo_text;
    if (!read_file(mdp_path, mdp_text) || !read_file(demos_path, demo_text)) return kExitError;
    MdpGuard mdp;
    if (ildm_mdp_from_json(mdp_text.c_str(), &mdp.p) != ILDM_OK) {
      return fail_api("loading the MDP");
    }
    DemosGuard demos;
    if (ildm_demos_from_json(demo_text.c_str(), mdp.p, &demos.p) != ILDM_OK) {
      return fail_api("loading the demos");
    }
    if (!trace_path.empty()) solver.record_trace = 1;
    ResultGuard result;
    if (ildm_solve(mdp.p, demos.p, method.c_str(), &solver, &result.p) != ILDM_OK) {
      return fail_api("solving");
    }
    StringGuard json;
    if (ildm_result_to_json(result.p, mdp.p, &json.s) != ILDM_OK) {
      return fail_api("serializing the result");
    }
    if (!write_file(out_path, json.s)) return kExitError;
    if (!trace_path.empty()) {
      StringGuard csv;
      if (ildm_result_trace_csv(result.p, &csv.s) != ILDM_OK) {
        return fail_api("serializing the trace");
      }
      if (!write_file(trace_path, csv.s)) return kExitError;
    }
    return kExitOk;
  }

  if (bench->parsed()) {
    StringGuard csv, summary;
    if (ildm_bench(instance.c_str(), methods.c_str(), horizons.c_str(), S, A, N, num_seeds,
                   seed, &solver, mdp_path.empty() ? nullptr : mdp_path.c_str(),
                   expert_path.empty() ? nullptr : expert_path.c_str(), &csv.s,
                   summary_path.empty() ? nullptr : &summary.s) != ILDM_OK) {
      return fail_api("running the sweep");
    }
    if (out_path.empty()) {
      std::cout << csv.s;
    } else if (!write_file(out_path, csv.s)) {
      return kExitError;
    }
    if (!summary_path.empty() && !write_file(summary_path, summary.s)) return kExitError;
    return kExitOk;
  }

  if (verify->parsed()) {
    StringGuard report;
    int passed = 0;
    if (ildm_verify(suite.c_str(), verify_seed, tol, &report.s, &passed) != ILDM_OK) {
      return fail_api("running the verification suite");
    }
    if (out_path.empty()) {
      std::cout << report.s;
    } else {
      if (!write_file(out_path, report.s)) return kExitError;
      std::cout << "suite " << suite << (passed ? " passed" : " FAILED") << "\n";
    }
    return passed ? kExitOk : kExitCheckFailed;
  }

  std::cerr << "error: no subcommand\n";
  return kExitError;
}
