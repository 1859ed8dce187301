#ifndef IFACE_H
#define IFACE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IfaceClass {
  IFACE_CLASS_IDENTITY = 0,
  IFACE_CLASS_QNDI = 1,
  IFACE_CLASS_TMS = 2,
  IFACE_CLASS_BS = 3,
  IFACE_CLASS_STMS = 4,
  IFACE_CLASS_SQNDI = 5,
  IFACE_CLASS_SWAP = 6,
} IfaceClass;

typedef enum IfaceStatus {
  IFACE_STATUS_OK = 0,
  IFACE_STATUS_NULL_POINTER = 1,
  IFACE_STATUS_INVALID_INPUT = 2,
  IFACE_STATUS_AMBIGUOUS = 3,
  IFACE_STATUS_INFEASIBLE = 4,
  IFACE_STATUS_INTERNAL = 5,
} IfaceStatus;

/**
 * Opaque 4×4 symplectic matrix.
 */
typedef struct IfaceInterface IfaceInterface;

/**
 * Opaque component library.
 */
typedef struct IfaceLibrary IfaceLibrary;

/**
 * Opaque synthesized plan.
 */
typedef struct IfacePlan IfacePlan;

/**
 * Invariants of an interface. `lambda`/`kappa` are valid only when the
 * matching `has_*` flag is set.
 */
typedef struct IfaceInvariants {
  enum IfaceClass class_;
  double chi;
  uint8_t n_r;
  uint8_t n_t;
  bool has_lambda;
  double lambda;
  bool has_kappa;
  double kappa;
} IfaceInvariants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message into `buf` (NUL-terminated, truncated to `len`).
 * Returns the full message length without the terminator.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t iface_last_error(char *buf, size_t len);

/**
 * Build an interface from 16 row-major entries; rejects non-symplectic input.
 *
 * # Safety
 * `entries` must point to 16 doubles and `out` must be valid for writes.
 */
enum IfaceStatus iface_interface_new(const double *entries, struct IfaceInterface **out);

/**
 * # Safety
 * `h` must be null or a handle from `iface_interface_new` not yet freed.
 */
void iface_interface_free(struct IfaceInterface *h);

/**
 * Classify an interface; `restricted` adds Λ and κ.
 *
 * # Safety
 * `h` must be a live interface handle and `out` valid for writes.
 */
enum IfaceStatus iface_classify(const struct IfaceInterface *h,
                                bool restricted,
                                struct IfaceInvariants *out);

/**
 * Parse a library from its JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` valid for writes.
 */
enum IfaceStatus iface_library_from_json(const char *json, struct IfaceLibrary **out);

/**
 * # Safety
 * `h` must be null or a handle from `iface_library_from_json` not yet freed.
 */
void iface_library_free(struct IfaceLibrary *h);

/**
 * Synthesize a plan over the library's components in id order.
 * Pass NaN for `chi`, `lambda` or `kappa` to leave them unset.
 *
 * # Safety
 * `lib` must be a live library handle and `out` valid for writes.
 */
enum IfaceStatus iface_synth(const struct IfaceLibrary *lib,
                             enum IfaceClass target,
                             double chi,
                             double lambda,
                             double kappa,
                             bool restricted,
                             struct IfacePlan **out);

/**
 * # Safety
 * `h` must be null or a handle from `iface_synth` not yet freed.
 */
void iface_plan_free(struct IfacePlan *h);

/**
 * Residual of the plan against its target.
 *
 * # Safety
 * `h` must be a live plan handle and `out` valid for writes.
 */
enum IfaceStatus iface_plan_residual(const struct IfacePlan *h, double *out);

/**
 * Achieved matrix, 16 row-major entries.
 *
 * # Safety
 * `h` must be a live plan handle and `out` valid for 16 doubles.
 */
enum IfaceStatus iface_plan_matrix(const struct IfacePlan *h, double *out);

/**
 * Plan JSON; release with `iface_string_free`.
 *
 * # Safety
 * `h` must be a live plan handle and `out` valid for writes.
 */
enum IfaceStatus iface_plan_to_json(const struct IfacePlan *h, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void iface_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* IFACE_H */
