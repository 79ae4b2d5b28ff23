#ifndef KHOVACABLE_H
#define KHOVACABLE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KcStatus {
  KC_STATUS_OK = 0,
  KC_STATUS_NULL_POINTER = 1,
  KC_STATUS_INVALID_UTF8 = 2,
  KC_STATUS_INPUT_ERROR = 3,
  KC_STATUS_IDENTITY_FAILURE = 4,
  KC_STATUS_CAP_EXCEEDED = 5,
  KC_STATUS_PANIC = 6,
} KcStatus;

/**
 * Opaque parsed diagram.
 */
typedef struct KcDiagram KcDiagram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Owned by the
 * library and valid until the next failing call on the same thread.
 */
const char *kc_last_error(void);

/**
 * Parses a PD-code JSON document into a new handle.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum KcStatus kc_diagram_parse(const char *json, struct KcDiagram **out);

/**
 * # Safety
 * `d` must come from `kc_diagram_parse` and not be freed twice. NULL is ignored.
 */
void kc_diagram_free(struct KcDiagram *d);

/**
 * # Safety
 * `d` must be a live handle and `out` writable.
 */
enum KcStatus kc_diagram_writhe(const struct KcDiagram *d, int64_t *out);

/**
 * # Safety
 * `d` must be a live handle and `out` writable.
 */
enum KcStatus kc_diagram_crossings(const struct KcDiagram *d, size_t *out);

/**
 * Jones polynomial as JSON. `cap` 0 selects the default state cap.
 *
 * # Safety
 * `d` must be a live handle and `out` writable.
 */
enum KcStatus kc_jones_json(const struct KcDiagram *d, uint64_t cap, char **out);

/**
 * Colored Jones polynomial as JSON.
 *
 * # Safety
 * `colors` must point to `len` values; `d` live; `out` writable.
 */
enum KcStatus kc_colored_jones_json(const struct KcDiagram *d,
                                    const uint32_t *colors_ptr,
                                    size_t len,
                                    uint64_t cap,
                                    char **out);

/**
 * Khovanov homology as JSON: nonzero (i, j) groups and the graded Euler
 * characteristic.
 *
 * # Safety
 * `d` must be a live handle and `out` writable.
 */
enum KcStatus kc_khovanov_json(const struct KcDiagram *d, uint64_t cap, char **out);

/**
 * Bicomplex identity suite with the Euler cross-check. The report is written
 * even when an identity fails; the status is then `IdentityFailure`.
 *
 * # Safety
 * `colors` must point to `len` values; `d` live; `out` writable.
 */
enum KcStatus kc_bicomplex_verify_json(const struct KcDiagram *d,
                                       const uint32_t *colors_ptr,
                                       size_t len,
                                       uint64_t cap,
                                       char **out);

/**
 * # Safety
 * `s` must come from this library and not be freed twice. NULL is ignored.
 */
void kc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KHOVACABLE_H */
