#ifndef NSLB_H
#define NSLB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NslbStatus {
  NSLB_STATUS_OK = 0,
  NSLB_STATUS_NULL_POINTER = 1,
  NSLB_STATUS_INVALID_INPUT = 2,
  NSLB_STATUS_CONFIG = 3,
  NSLB_STATUS_NUMERIC = 4,
  NSLB_STATUS_INSTANCE_TOO_LARGE = 5,
  NSLB_STATUS_PROTOCOL = 6,
  NSLB_STATUS_PARSE = 7,
  NSLB_STATUS_IO = 8,
  NSLB_STATUS_PANIC = 9,
} NslbStatus;

/**
 * A stand-alone agent driven by an external environment.
 */
typedef struct NslbAgent NslbAgent;

/**
 * A parsed experiment configuration.
 */
typedef struct NslbExperiment NslbExperiment;

/**
 * Aggregated results of a finished experiment.
 */
typedef struct NslbResult NslbResult;

/**
 * One agent acting in one replication of an experiment, stepped from C.
 */
typedef struct NslbSession NslbSession;

/**
 * Outcome of one round.
 */
typedef struct NslbRound {
  size_t action;
  double reward;
  size_t state;
  double regret;
} NslbRound;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *nslb_last_error(void);

/**
 * One filtering step over `n` states. `transition` is row-major `n x n`.
 * Writes the next-state belief to `out_belief` and the predictive
 * likelihood to `out_evidence`.
 *
 * # Safety
 * Array arguments must hold the stated number of elements.
 */
enum NslbStatus nslb_filter_update(size_t n,
                                   const double *belief,
                                   const double *transition,
                                   const double *likelihoods,
                                   double *out_belief,
                                   double *out_evidence);

/**
 * Cumulative regret of a run given the optimal and chosen mean reward of
 * each round.
 *
 * # Safety
 * All arrays must hold `len` elements.
 */
enum NslbStatus nslb_cumulative_regret(size_t len,
                                       const double *optimal,
                                       const double *chosen,
                                       double *out);

/**
 * Number of stationary segments in a latent state sequence.
 *
 * # Safety
 * `states` must hold `len` elements.
 */
enum NslbStatus nslb_segment_count(size_t len, const size_t *states, size_t *out);

/**
 * Parses and validates a TOML experiment description. Relative paths in
 * the description resolve against the working directory.
 *
 * # Safety
 * `toml` must be a nul-terminated string; `out` must be writable.
 */
enum NslbStatus nslb_experiment_from_toml(const char *toml, struct NslbExperiment **out);

/**
 * Loads an experiment from a file; relative paths resolve against the
 * file's directory.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out` must be writable.
 */
enum NslbStatus nslb_experiment_load(const char *path, struct NslbExperiment **out);

/**
 * Overrides the number of runs, horizon and seed. Zero leaves runs or
 * horizon unchanged.
 *
 * # Safety
 * `exp` must be a live experiment handle.
 */
enum NslbStatus nslb_experiment_set(struct NslbExperiment *exp,
                                    size_t runs,
                                    size_t horizon,
                                    uint64_t seed);

/**
 * # Safety
 * `exp` must be null or a handle from this library, freed at most once.
 */
void nslb_experiment_free(struct NslbExperiment *exp);

/**
 * Runs every agent in every replication.
 *
 * # Safety
 * `exp` must be a live experiment handle; `out` must be writable.
 */
enum NslbStatus nslb_experiment_run(const struct NslbExperiment *exp, struct NslbResult **out);

/**
 * # Safety
 * `res` must be null or a handle from this library, freed at most once.
 */
void nslb_result_free(struct NslbResult *res);

/**
 * # Safety
 * `res` must be a live result handle.
 */
size_t nslb_result_num_agents(const struct NslbResult *res);

/**
 * # Safety
 * `res` must be a live result handle.
 */
size_t nslb_result_horizon(const struct NslbResult *res);

/**
 * Label of agent `i`, owned by the result handle.
 *
 * # Safety
 * `res` must be a live result handle.
 */
const char *nslb_result_agent_name(const struct NslbResult *res, size_t i);

/**
 * Final metric mean and standard error of agent `i`.
 *
 * # Safety
 * `res` must be a live result handle; outputs must be writable.
 */
enum NslbStatus nslb_result_final(const struct NslbResult *res,
                                  size_t i,
                                  double *mean,
                                  double *stderr);

/**
 * Per-round mean and standard error of agent `i`; both buffers need
 * `horizon` elements.
 *
 * # Safety
 * `res` must be a live result handle; buffers must hold `len` elements.
 */
enum NslbStatus nslb_result_curve(const struct NslbResult *res,
                                  size_t i,
                                  size_t len,
                                  double *mean,
                                  double *stderr);

/**
 * Writes `curves.csv`, `summary.csv` and `config_echo.toml` into `dir`.
 *
 * # Safety
 * `res` must be a live result handle; `dir` a nul-terminated string.
 */
enum NslbStatus nslb_result_write(const struct NslbResult *res, const char *dir);

/**
 * Builds agent `agent` of `exp` against the environment of replication
 * `run`, with the same random streams the batch runner uses.
 *
 * # Safety
 * `exp` must be a live experiment handle; `out` must be writable.
 */
enum NslbStatus nslb_session_new(const struct NslbExperiment *exp,
                                 uint64_t run,
                                 size_t agent,
                                 struct NslbSession **out);

/**
 * Plays one round.
 *
 * # Safety
 * `s` must be a live session handle; `out` must be writable.
 */
enum NslbStatus nslb_session_step(struct NslbSession *s, struct NslbRound *out);

/**
 * # Safety
 * `s` must be null or a handle from this library, freed at most once.
 */
void nslb_session_free(struct NslbSession *s);

/**
 * mTS over a known tabular model. `means` is row-major `arms x states`,
 * `transition` row-major `states x states`; the initial belief is uniform.
 *
 * # Safety
 * Arrays must hold the stated number of elements; `out` must be writable.
 */
enum NslbStatus nslb_mts_new(size_t arms,
                             size_t states,
                             const double *means,
                             const double *transition,
                             double noise_std,
                             uint64_t seed,
                             struct NslbAgent **out);

/**
 * # Safety
 * `a` must be a live agent handle; `out` must be writable.
 */
enum NslbStatus nslb_agent_act(struct NslbAgent *a, size_t *out);

/**
 * # Safety
 * `a` must be a live agent handle.
 */
enum NslbStatus nslb_agent_update(struct NslbAgent *a, size_t action, double reward);

/**
 * # Safety
 * `a` must be null or a handle from this library, freed at most once.
 */
void nslb_agent_free(struct NslbAgent *a);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NSLB_H */
