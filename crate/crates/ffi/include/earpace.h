#ifndef EARPACE_H
#define EARPACE_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EpStatus {
  EP_STATUS_OK = 0,
  EP_STATUS_NULL_POINTER = 1,
  EP_STATUS_INVALID_CONFIG = 2,
  EP_STATUS_INVALID_ARGUMENT = 3,
  EP_STATUS_PIPELINE = 4,
  EP_STATUS_ALREADY_FINISHED = 5,
  EP_STATUS_NO_EVENT = 6,
  EP_STATUS_BUFFER_TOO_SMALL = 7,
  EP_STATUS_PANIC = 8,
} EpStatus;

/**
 * Opaque session handle.
 */
typedef struct EpSession EpSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create a session. `config_text` is an optional `key = value` config
 * (NULL for defaults); `seed` always overrides its `rng_seed`.
 *
 * # Safety
 * `config_text` must be NULL or a valid NUL-terminated string; `out` must
 * be a valid pointer.
 */
enum EpStatus ep_session_new(const char *config_text, uint64_t seed, struct EpSession **out);

/**
 * Push `len` mono 16 kHz PCM16 samples.
 *
 * # Safety
 * `session` must come from `ep_session_new`; `samples` must point to
 * `len` readable values (may be NULL when `len` is 0).
 */
enum EpStatus ep_session_push_pcm(struct EpSession *session, const int16_t *samples, size_t len);

/**
 * End of stream: flushes the last window and queues the summary.
 *
 * # Safety
 * `session` must come from `ep_session_new`.
 */
enum EpStatus ep_session_finish(struct EpSession *session);

/**
 * Number of event-log lines waiting to be read.
 *
 * # Safety
 * `session` must be NULL or come from `ep_session_new`.
 */
size_t ep_session_pending_events(const struct EpSession *session);

/**
 * Copy the next event-log line (JSON, NUL-terminated, no newline) into
 * `buf`. `*needed` receives the required size including the NUL. When
 * `cap` is too small nothing is consumed and `EP_STATUS_BUFFER_TOO_SMALL`
 * is returned.
 *
 * # Safety
 * `session` must come from `ep_session_new`; `buf` must hold `cap` bytes
 * (may be NULL when `cap` is 0); `needed` may be NULL.
 */
enum EpStatus ep_session_next_event(struct EpSession *session,
                                    char *buf,
                                    size_t cap,
                                    size_t *needed);

/**
 * Release a session. NULL is ignored.
 *
 * # Safety
 * `session` must be NULL or come from `ep_session_new` and not be used
 * afterwards.
 */
void ep_session_free(struct EpSession *session);

/**
 * Message for the last failure on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *ep_last_error(void);

/**
 * Swallow test for one inter-chew gap under the default thresholds.
 * Pass a negative or NaN `mean_gap_s` when no gap history exists.
 * Returns 1 for a swallow, 0 otherwise.
 */
int32_t ep_swallow_predicate(double gap_s, double mean_gap_s);

/**
 * Library version, static NUL-terminated string.
 */
const char *ep_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EARPACE_H */
