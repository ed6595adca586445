#ifndef OPENXXX_H
#define OPENXXX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OxStatus {
  OX_STATUS_OK = 0,
  OX_STATUS_NULL_POINTER = 1,
  OX_STATUS_INVALID_UTF8 = 2,
  OX_STATUS_CONFIG = 3,
  OX_STATUS_NUMERICAL = 4,
  OX_STATUS_BUFFER_TOO_SMALL = 5,
  OX_STATUS_PANIC = 6,
} OxStatus;

/**
 * Opaque handle to a validated experiment.
 */
typedef struct OxModel OxModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * failing call on the same thread.
 */
const char *ox_last_error(void);

/**
 * Parse and validate a JSON configuration. `seed` overrides the configured
 * seed when `override_seed` is nonzero.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer.
 */
enum OxStatus ox_model_from_json(const char *json,
                                 int32_t override_seed,
                                 uint64_t seed,
                                 struct OxModel **out);

/**
 * # Safety
 * `m` must come from [`ox_model_from_json`] and not be freed twice.
 */
void ox_model_free(struct OxModel *m);

/**
 * # Safety
 * `m` must be a live handle or null.
 */
size_t ox_model_rank(const struct OxModel *m);

/**
 * Dimension of the quantum space, 0 for a null handle.
 *
 * # Safety
 * `m` must be a live handle or null.
 */
size_t ox_model_quantum_dim(const struct OxModel *m);

/**
 * Write d(u) into `buf` as 2·dim² interleaved doubles.
 *
 * # Safety
 * `buf` must hold `len` doubles.
 */
enum OxStatus ox_transfer_matrix(const struct OxModel *m,
                                 double u_re,
                                 double u_im,
                                 double *buf,
                                 size_t len);

/**
 * Bethe eigenvalue Λ(u) for the root families given level by level:
 * `counts[k]` roots at level k, `roots` holding all of them interleaved.
 *
 * # Safety
 * `counts` must hold `levels` entries, `roots` 2·Σcounts doubles and `out`
 * two doubles.
 */
enum OxStatus ox_bethe_eigenvalue(const struct OxModel *m,
                                  double u_re,
                                  double u_im,
                                  const size_t *counts,
                                  size_t levels,
                                  const double *roots,
                                  double *out);

/**
 * Run the identity suite; `*json` receives the report, freed with
 * [`ox_string_free`]. Returns Ok even when checks fail; inspect `passed`.
 *
 * # Safety
 * `json` must be a valid pointer.
 */
enum OxStatus ox_identity_report(const struct OxModel *m, char **json);

/**
 * Solve every configured sector and match against exact diagonalization;
 * `*json` receives the spectrum report.
 *
 * # Safety
 * `json` must be a valid pointer.
 */
enum OxStatus ox_spectrum_report(const struct OxModel *m, char **json);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void ox_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPENXXX_H */
