#ifndef JPSRO_H
#define JPSRO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum JpsroStatus {
  JPSRO_STATUS_OK = 0,
  JPSRO_STATUS_NULL_POINTER = 1,
  JPSRO_STATUS_INVALID_ARGUMENT = 2,
  JPSRO_STATUS_UNKNOWN_GAME = 3,
  JPSRO_STATUS_SOLVER = 4,
  JPSRO_STATUS_RUNTIME = 5,
  JPSRO_STATUS_PANIC = 6,
  JPSRO_STATUS_BUFFER_TOO_SMALL = 7,
  JPSRO_STATUS_OUT_OF_RANGE = 8,
} JpsroStatus;

typedef enum JpsroAlgo {
  JPSRO_ALGO_JPSRO = 0,
  JPSRO_ALGO_NEUPL_TABULAR = 1,
  JPSRO_ALGO_NEUPL_PARAMETRIC = 2,
} JpsroAlgo;

typedef enum JpsroObjective {
  JPSRO_OBJECTIVE_MAX_GINI = 0,
  JPSRO_OBJECTIVE_MAX_WELFARE = 1,
  JPSRO_OBJECTIVE_MAX_ENTROPY = 2,
} JpsroObjective;

typedef struct JpsroGame JpsroGame;

typedef struct JpsroRun JpsroRun;

/**
 * Run settings. `algo` takes a `JpsroAlgo` value and `objective` a
 * `JpsroObjective` value.
 */
typedef struct JpsroRunOptions {
  uint32_t algo;
  uint32_t objective;
  double solver_epsilon;
  double termination_epsilon;
  size_t max_iterations;
  uint64_t seed;
} JpsroRunOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *jpsro_version(void);

/**
 * Bytes needed for the last error message including the terminating NUL,
 * or 0 when the last call on this thread succeeded.
 */
size_t jpsro_last_error_length(void);

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len` bytes).
 *
 * # Safety
 * `buf` must be valid for `len` bytes of writes.
 */
size_t jpsro_last_error_message(char *buf, size_t len);

/**
 * Build a game from a spec such as `kuhn_poker(players=3)`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be writable.
 */
enum JpsroStatus jpsro_game_new(const char *spec, struct JpsroGame **out);

/**
 * # Safety
 * `game` must come from `jpsro_game_new` and not be used afterwards.
 */
void jpsro_game_free(struct JpsroGame *game);

/**
 * # Safety
 * `game` must be a live game handle and `out` writable.
 */
enum JpsroStatus jpsro_game_num_players(const struct JpsroGame *game, size_t *out);

/**
 * # Safety
 * `game` must be a live game handle and `out` writable.
 */
enum JpsroStatus jpsro_game_num_infosets(const struct JpsroGame *game, size_t player, size_t *out);

/**
 * Defaults: exact JPSRO, Max-Gini, solver epsilon 0.01, termination
 * epsilon 1e-3, 60 iterations, seed 0.
 */
struct JpsroRunOptions jpsro_run_options_default(void);

/**
 * Run one seed to termination or the iteration cap.
 *
 * # Safety
 * `game` must be a live game handle, `options` readable and `out` writable.
 */
enum JpsroStatus jpsro_run_new(const struct JpsroGame *game,
                               const struct JpsroRunOptions *options,
                               struct JpsroRun **out);

/**
 * # Safety
 * `run` must come from `jpsro_run_new` and not be used afterwards.
 */
void jpsro_run_free(struct JpsroRun *run);

/**
 * # Safety
 * `run` must be a live run handle and `out` writable.
 */
enum JpsroStatus jpsro_run_converged(const struct JpsroRun *run, bool *out);

/**
 * # Safety
 * `run` must be a live run handle and `out` writable.
 */
enum JpsroStatus jpsro_run_num_records(const struct JpsroRun *run, size_t *out);

/**
 * CCE gap certified by record `index`.
 *
 * # Safety
 * `run` must be a live run handle and `out` writable.
 */
enum JpsroStatus jpsro_run_cce_gap(const struct JpsroRun *run, size_t index, double *out);

/**
 * Per-player CCE values of record `index` into `values[0..len]`.
 *
 * # Safety
 * `run` must be a live run handle; `values` valid for `len` writes;
 * `needed` null or writable.
 */
enum JpsroStatus jpsro_run_values(const struct JpsroRun *run,
                                  size_t index,
                                  double *values,
                                  size_t len,
                                  size_t *needed);

/**
 * Per-player deviation gains of record `index` into `gains[0..len]`.
 *
 * # Safety
 * As for `jpsro_run_values`.
 */
enum JpsroStatus jpsro_run_deviation_gains(const struct JpsroRun *run,
                                           size_t index,
                                           double *gains,
                                           size_t len,
                                           size_t *needed);

/**
 * Row-major probabilities of the meta-distribution certified by record
 * `index`; its shape is the record's population sizes.
 *
 * # Safety
 * As for `jpsro_run_values`.
 */
enum JpsroStatus jpsro_run_sigma(const struct JpsroRun *run,
                                 size_t index,
                                 double *probs,
                                 size_t len,
                                 size_t *needed);

/**
 * Trace in JSON-lines form, NUL-terminated. `needed` receives the byte
 * count including the NUL.
 *
 * # Safety
 * `run` must be a live run handle; `buf` valid for `len` writes; `needed`
 * null or writable.
 */
enum JpsroStatus jpsro_run_trace_jsonl(const struct JpsroRun *run,
                                       char *buf,
                                       size_t len,
                                       size_t *needed);

/**
 * Solve for a CCE of a normal-form game. `shape[0..num_players]` gives the
 * strategy counts; `payoffs` holds, for every joint strategy in row-major
 * order, one payoff per player. The distribution is written to
 * `probs[0..len]`.
 *
 * # Safety
 * `shape` must be valid for `num_players` reads, `payoffs` for
 * `payoffs_len` reads and `probs` for `len` writes.
 */
enum JpsroStatus jpsro_solve_cce(size_t num_players,
                                 const size_t *shape,
                                 const double *payoffs,
                                 size_t payoffs_len,
                                 uint32_t objective_code,
                                 double epsilon,
                                 double *probs,
                                 size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JPSRO_H */
