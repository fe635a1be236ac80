/* C interface to the modwd speech-enhancement library. */

#ifndef MODWD_H
#define MODWD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum ModwdStatus {
  ModwdOk = 0,
  ModwdNullPointer = 1,
  ModwdInvalidArgument = 2,
  ModwdIoError = 3,
  ModwdProcessingError = 4,
  ModwdPanic = 5,
} ModwdStatus;

/**
 * Opaque enhancement configuration: a method cascade plus framing.
 */
typedef struct ModwdHandle ModwdHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create a handle for the default single-stage pipeline at the given
 * detail-scaling factor. Returns null when `alpha` is outside [0, 1].
 */
struct ModwdHandle *modwd_handle_new(double alpha);

/**
 * Release a handle. Null is a no-op.
 */
void modwd_handle_free(struct ModwdHandle *handle);

/**
 * Replace the detail-scaling factor.
 */
enum ModwdStatus modwd_handle_set_alpha(struct ModwdHandle *handle, double alpha);

/**
 * Replace the method cascade, e.g. `"modwd"`, `"ss"`, or `"modwd-logstsa"`.
 *
 * # Safety
 * `method` must be a valid NUL-terminated C string.
 */
enum ModwdStatus modwd_handle_set_method(struct ModwdHandle *handle, const char *method);

/**
 * Enhance an in-memory buffer of samples in [-1, 1].
 *
 * On success `*out_samples` points to a malloc'd buffer of `*out_len`
 * doubles owned by the caller; release it with `modwd_buffer_free`. The
 * output can be up to one frame shorter than the input.
 *
 * # Safety
 * `samples` must point to `len` readable doubles; `out_samples` and
 * `out_len` must be valid for writes.
 */
enum ModwdStatus modwd_enhance_buffer(const struct ModwdHandle *handle,
                                      const double *samples,
                                      uintptr_t len,
                                      int sample_rate_hz,
                                      double **out_samples,
                                      uintptr_t *out_len);

/**
 * Release a buffer returned by `modwd_enhance_buffer`. Null is a no-op.
 */
void modwd_buffer_free(double *samples);

/**
 * Read a mono WAV, enhance it, and write the result as 16-bit PCM.
 *
 * # Safety
 * `input_path` and `output_path` must be valid NUL-terminated C strings.
 */
enum ModwdStatus modwd_enhance_file(const struct ModwdHandle *handle,
                                    const char *input_path,
                                    const char *output_path);

/**
 * Copy the most recent error message on this thread into `buf` (truncated
 * to `buf_len`, always NUL-terminated). Returns the full message length
 * excluding the NUL, or 0 when there is no pending error.
 *
 * # Safety
 * `buf` must be valid for `buf_len` writable bytes (or null to query the
 * required length).
 */
uintptr_t modwd_last_error(char *buf, uintptr_t buf_len);

/**
 * Number of samples expected from enhancing `len` input samples with the
 * default framing, or 0 when the input is too short to process.
 */
uintptr_t modwd_output_len(uintptr_t len);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MODWD_H */
