/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef RANKONE_H
#define RANKONE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RoStatus {
  RO_STATUS_OK = 0,
  RO_STATUS_NULL_ARGUMENT = 1,
  RO_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed configuration, family, level selector or argument.
   */
  RO_STATUS_CONFIG = 3,
  /**
   * A size, pair or enumeration budget was exceeded.
   */
  RO_STATUS_BUDGET = 4,
  /**
   * A mathematical precondition of the request does not hold.
   */
  RO_STATUS_PRECONDITION = 5,
  /**
   * A theorem suite ran and at least one check failed.
   */
  RO_STATUS_SUITE_FAILED = 6,
  RO_STATUS_INTERNAL = 7,
} RoStatus;

/**
 * Opaque construction handle.
 */
typedef struct RoTower RoTower;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a construction document such as `{"family": "hk2"}` or
 * `{"stages": [[2, [0, 1]]]}` and returns a new handle in `*out`.
 *
 * Requires: `config_json` is a NUL-terminated string; `out` is writable.
 */
enum RoStatus ro_tower_new(const char *config_json, struct RoTower **out);

/**
 * Requires: `tower` is null or a handle from [`ro_tower_new`] not yet freed.
 */
void ro_tower_free(struct RoTower *tower);

/**
 * Height `h_stage` in decimal.
 *
 * Requires: `tower` is a live handle; `out` is writable.
 */
enum RoStatus ro_tower_height(const struct RoTower *tower, size_t stage, char **out);

/**
 * `mu(A ∩ T^k B)` as `p/q`. Levels use the selectors `I`, `J1`, `J2`,
 * `C<c>`, `C<c>:h` and `C<c>[h ..]`; `k` is a decimal integer.
 *
 * Requires: `tower` is a live handle; strings are NUL-terminated; `out` is writable.
 */
enum RoStatus ro_correlation(const struct RoTower *tower,
                             const char *a,
                             const char *b,
                             const char *k,
                             char **out);

/**
 * Runs a theorem suite on the tower and writes its JSON verdict to `*out`.
 * `depth = 0` selects the suite's default depth. The JSON is written even
 * when a check fails, in which case the status is `SuiteFailed`.
 *
 * Requires: `tower` is a live handle; `theorem_id` is NUL-terminated; `out` is writable.
 */
enum RoStatus ro_theorem_json(const struct RoTower *tower,
                              const char *theorem_id,
                              size_t depth,
                              char **out);

/**
 * Requires: `s` is null or a string returned by this library, not yet freed.
 */
void ro_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null.
 */
const char *ro_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RANKONE_H */
