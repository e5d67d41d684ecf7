#ifndef ILDM_H
#define ILDM_H

/* Imitation-learning lab on finite-horizon layered MDPs: C interface.
 *
 * All functions return ILDM_OK (0) or a nonzero error code; on failure
 * ildm_last_error() describes the problem for the calling thread. Strings
 * returned through char** are heap-allocated; release them with
 * ildm_string_free. Objects returned through handle pointers are owned by
 * the caller and released with the matching _free function.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  ILDM_OK = 0,
  ILDM_ERR_INVALID_ARGUMENT = 1,
  ILDM_ERR_VALIDATION = 2,
  ILDM_ERR_PRECONDITION = 3,
  ILDM_ERR_DIVERGENCE = 4,
  ILDM_ERR_IO = 5,
  ILDM_ERR_PARSE = 6,
  ILDM_ERR_INTERNAL = 7
};

typedef struct ildm_mdp ildm_mdp;
typedef struct ildm_policy ildm_policy;
typedef struct ildm_demos ildm_demos;
typedef struct ildm_result ildm_result;

/* Message for the most recent failure on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread. */
const char* ildm_last_error(void);

void ildm_string_free(char* s);
void ildm_mdp_free(ildm_mdp* m);
void ildm_policy_free(ildm_policy* p);
void ildm_demos_free(ildm_demos* d);
void ildm_result_free(ildm_result* r);

/* --- Generators -------------------------------------------------------- */

/* Reset-cliff family: S states per layer, horizon H, initial mixture
 * parameterized by N. The expert policy is returned alongside. */
int ildm_gen_reset_cliff(int S, int A, int H, int N, ildm_mdp** out_mdp,
                         ildm_policy** out_expert);

/* The two-step worked example (alpha = 0.1) with its fixed one-trajectory
 * demo set. Any output pointer may be NULL to skip it. */
int ildm_gen_d5(ildm_mdp** out_mdp, ildm_policy** out_expert, ildm_demos** out_demo);

/* Random layered MDP with S states per layer and a deterministic random
 * expert; td != 0 rejection-samples a transition-dominant instance. */
int ildm_gen_random(int H, int S, int A, uint64_t seed, int td, ildm_mdp** out_mdp,
                    ildm_policy** out_expert);

/* --- Serialization ----------------------------------------------------- */

int ildm_mdp_from_json(const char* text, ildm_mdp** out);
int ildm_mdp_to_json(const ildm_mdp* m, char** out);
int ildm_policy_from_json(const char* text, const ildm_mdp* m, ildm_policy** out);
int ildm_policy_to_json(const ildm_policy* p, const ildm_mdp* m, char** out);
int ildm_demos_from_json(const char* text, const ildm_mdp* m, ildm_demos** out);
int ildm_demos_to_json(const ildm_demos* d, const ildm_mdp* m, char** out);

/* --- Demonstrations ---------------------------------------------------- */

int ildm_collect_demos(const ildm_mdp* m, const ildm_policy* expert, int num_trajectories,
                       uint64_t seed, ildm_demos** out);

/* --- Solving ----------------------------------------------------------- */

typedef struct {
  double alpha;
  double learning_rate; /* 0 picks the per-method default */
  int max_iters;
  double grad_tol; /* 0 picks the per-method default */
  double beta;
  double polyak_tau;
  int online_rollouts_per_iter;
  uint64_t seed;
  double q_init;
  int has_q_box; /* nonzero enables the [0, q_box_C] clip */
  double q_box_C;
  int record_trace;
} ildm_solver_config;

void ildm_solver_config_default(ildm_solver_config* cfg);

/* method: bc | iq_tv | iq_chi2 | iq_reg | value_dice | dual_qdm_exact |
 * dual_qdm_penalty | ail. cfg may be NULL for defaults. */
int ildm_solve(const ildm_mdp* m, const ildm_demos* d, const char* method,
               const ildm_solver_config* cfg, ildm_result** out);

int ildm_result_to_json(const ildm_result* r, const ildm_mdp* m, char** out);
int ildm_result_trace_csv(const ildm_result* r, char** out);
int ildm_result_converged(const ildm_result* r, int* out);
int ildm_result_policy(const ildm_result* r, ildm_policy** out);

/* --- Evaluation -------------------------------------------------------- */

/* Exact expected return under the true reward. */
int ildm_policy_return(const ildm_mdp* m, const ildm_policy* p, double* out);

/* --- Verification ------------------------------------------------------ */

/* suite: thm1 | cor1 | thm2 | lemma1 | prop1 | gradcheck | all. tol <= 0
 * keeps each check's default tolerance. On success *passed is 1 iff every
 * check in the suite passed and *report_json (optional) holds the full
 * report. A failing check is a successful call with *passed == 0. */
int ildm_verify(const char* suite, uint64_t seed, double tol, char** report_json, int* passed);

/* --- Benchmark sweeps -------------------------------------------------- */

/* instance: reset_cliff | d5 | random | from_file. methods and horizons are
 * comma-separated lists. mdp_path/expert_path are only read for from_file.
 * Writes the per-run CSV to *csv_out and, if summary_out is non-NULL, the
 * per-(method, horizon) aggregate CSV. */
int ildm_bench(const char* instance, const char* methods, const char* horizons, int S, int A,
               int N, int num_seeds, uint64_t base_seed, const ildm_solver_config* cfg,
               const char* mdp_path, const char* expert_path, char** csv_out,
               char** summary_out);

#ifdef __cplusplus
}
#endif

#endif /* ILDM_H */
