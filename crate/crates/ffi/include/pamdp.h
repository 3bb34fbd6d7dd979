#ifndef PAMDP_H
#define PAMDP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define PAMDP_OK 0

#define PAMDP_ERR_NULL 1

#define PAMDP_ERR_UTF8 2

#define PAMDP_ERR_CONFIG 3

#define PAMDP_ERR_CONTRACT 4

#define PAMDP_ERR_SOLVER 5

#define PAMDP_ERR_IO 6

#define PAMDP_ERR_JSON 7

#define PAMDP_ERR_RANGE 8

#define PAMDP_ERR_PANIC 9

/**
 * Returned by `pamdp_session_step` once every episode has been played.
 */
#define PAMDP_DONE 10

/**
 * The finished runs of every seed in a config.
 */
typedef struct PamdpRecord PamdpRecord;

/**
 * A single seed's episode loop.
 */
typedef struct PamdpSession PamdpSession;

/**
 * One episode of a session, 1-based `k`.
 */
typedef struct PamdpEpisode {
  size_t k;
  double learner_value;
  double sampled_loss;
  double cum_loss;
  double benchmark_cum;
  double regret;
} PamdpEpisode;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next call into this library on the same thread.
 */
const char *pamdp_last_error(void);

/**
 * Builds a session from experiment JSON; the config's seed list is ignored
 * in favour of `seed`.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `out` a valid pointer.
 */
int32_t pamdp_session_new(const char *config_json, uint64_t seed, struct PamdpSession **out);

/**
 * Plays one episode. Returns `PAMDP_DONE` without touching `out` when the
 * session is exhausted.
 *
 * # Safety
 * `session` must come from `pamdp_session_new`; `out` may be null.
 */
int32_t pamdp_session_step(struct PamdpSession *session, struct PamdpEpisode *out);

/**
 * Episodes played so far.
 *
 * # Safety
 * `session` must come from `pamdp_session_new`; `out` must be valid.
 */
int32_t pamdp_session_episodes(const struct PamdpSession *session, size_t *out);

/**
 * # Safety
 * `session` must come from `pamdp_session_new` and not be used afterwards.
 */
void pamdp_session_free(struct PamdpSession *session);

/**
 * Runs every seed of an experiment config.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `out` a valid pointer.
 */
int32_t pamdp_run(const char *config_json, struct PamdpRecord **out);

/**
 * Number of seeds and episodes per seed.
 *
 * # Safety
 * `record` must come from `pamdp_run`; `seeds` and `episodes` must be valid.
 */
int32_t pamdp_record_dims(const struct PamdpRecord *record, size_t *seeds, size_t *episodes);

/**
 * Copies `R_1..R_K` of seed number `seed_index` into `buf[0..len]`;
 * `len` must be at least `K`.
 *
 * # Safety
 * `record` must come from `pamdp_run`; `buf` must hold `len` doubles.
 */
int32_t pamdp_record_regret(const struct PamdpRecord *record,
                            size_t seed_index,
                            double *buf,
                            size_t len);

/**
 * Mean final regret over seeds and its 95% half-width.
 *
 * # Safety
 * `record` must come from `pamdp_run`; `mean` and `ci95` must be valid.
 */
int32_t pamdp_record_final_regret(const struct PamdpRecord *record, double *mean, double *ci95);

/**
 * Writes the run CSV to `path`.
 *
 * # Safety
 * `record` must come from `pamdp_run`; `path` must be NUL-terminated.
 */
int32_t pamdp_record_write_csv(const struct PamdpRecord *record, const char *path);

/**
 * # Safety
 * `record` must come from `pamdp_run` and not be used afterwards.
 */
void pamdp_record_free(struct PamdpRecord *record);

/**
 * Log-log slope of `regret[i] = R_{i+1}` over `k >= kmin`.
 *
 * # Safety
 * `regret` must hold `n` doubles; `out` must be valid.
 */
int32_t pamdp_slope(const double *regret, size_t n, size_t kmin, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PAMDP_H */
