#ifndef LAGERSTROM_H
#define LAGERSTROM_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LgStatus {
  LG_STATUS_OK = 0,
  LG_STATUS_NULL_POINTER = 1,
  LG_STATUS_DOMAIN = 2,
  LG_STATUS_UNSUPPORTED = 3,
  LG_STATUS_ACCURACY = 4,
  LG_STATUS_INTEGRATION = 5,
  LG_STATUS_BRACKET = 6,
  LG_STATUS_RESOLUTION = 7,
  LG_STATUS_NON_CONVERGENCE = 8,
  LG_STATUS_PRECONDITION = 9,
  LG_STATUS_FIT = 10,
  LG_STATUS_IO = 11,
  LG_STATUS_BUFFER_TOO_SMALL = 12,
  LG_STATUS_PANIC = 13,
} LgStatus;

/**
 * Columns of a shooting profile.
 */
typedef enum LgShootColumn {
  LG_SHOOT_COLUMN_R = 0,
  LG_SHOOT_COLUMN_U = 1,
  LG_SHOOT_COLUMN_DU_DR = 2,
  LG_SHOOT_COLUMN_W = 3,
} LgShootColumn;

/**
 * Columns of an integral-equation profile.
 */
typedef enum LgRescaledColumn {
  LG_RESCALED_COLUMN_RHO = 0,
  LG_RESCALED_COLUMN_U = 1,
  /**
   * The raw iterate (`u − 1` or `G(u) − G(1)`).
   */
  LG_RESCALED_COLUMN_ITERATE = 2,
} LgRescaledColumn;

typedef struct LgModel LgModel;

typedef struct LgRescaledProfile LgRescaledProfile;

typedef struct LgShootProfile LgShootProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null if it succeeded.
 * The pointer stays valid until the next call into this library on the same thread.
 */
const char *lg_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lg_version(void);

/**
 * `E_q(ρ) = ∫_ρ^∞ τ^{−q} e^{−τ} dτ`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum LgStatus lg_exp_integral(double q, double rho, double *out);

/**
 * `∫_ρ^∞ E_q(τ) dτ`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum LgStatus lg_integral_of_e(double q, double rho, double *out);

/**
 * Truncated small-ε series for C in one of the cases (2,0), (3,0), (2,1).
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum LgStatus lg_c_asym(uint32_t n, uint32_t k, double eps, size_t order, double *out);

/**
 * Model with `f(u) = k`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum LgStatus lg_model_new_constant_k(double n, double k, double eps, struct LgModel **out);

/**
 * Model with `f` tabulated at `len` increasing points `u` spanning `[0, 1]`.
 *
 * # Safety
 * `u` and `f` must each point to `len` readable values; `out` must be null or valid for writes.
 */
enum LgStatus lg_model_new_table(double n,
                                 double eps,
                                 const double *u,
                                 const double *f,
                                 size_t len,
                                 struct LgModel **out);

/**
 * # Safety
 * `model` must be null or a handle from `lg_model_new_*` not yet freed.
 */
void lg_model_free(struct LgModel *model);

/**
 * Shoot for `c*` with `|u(∞) − 1| ≤ tol` and return the profile.
 *
 * # Safety
 * `model` must be a live handle; `out` must be null or valid for writes.
 */
enum LgStatus lg_shoot(const struct LgModel *model, double tol, struct LgShootProfile **out);

/**
 * # Safety
 * `profile` must be a live handle; `out` must be null or valid for writes.
 */
enum LgStatus lg_shoot_c_star(const struct LgShootProfile *profile, double *out);

/**
 * Rescaled constant C implied by the shooting solution.
 *
 * # Safety
 * `profile` must be a live handle; `out` must be null or valid for writes.
 */
enum LgStatus lg_shoot_big_c(const struct LgShootProfile *profile, double *out);

/**
 * Number of samples in the profile; 0 for a null handle.
 *
 * # Safety
 * `profile` must be null or a live handle.
 */
size_t lg_shoot_len(const struct LgShootProfile *profile);

/**
 * Copy one column into `buf`, which must hold at least `lg_shoot_len` values.
 *
 * # Safety
 * `profile` must be a live handle and `buf` valid for `len` writes.
 */
enum LgStatus lg_shoot_column(const struct LgShootProfile *profile,
                              enum LgShootColumn column,
                              double *buf,
                              size_t len);

/**
 * # Safety
 * `profile` must be null or a live handle not yet freed.
 */
void lg_shoot_free(struct LgShootProfile *profile);

/**
 * Solve the integral equation for C (n ≥ 2). `out_profile` may be null.
 *
 * # Safety
 * `model` must be a live handle; `out_c` must be valid for writes;
 * `out_profile` must be null or valid for writes.
 */
enum LgStatus lg_solve_c(const struct LgModel *model,
                         double *out_c,
                         struct LgRescaledProfile **out_profile);

/**
 * Number of grid points; 0 for a null handle.
 *
 * # Safety
 * `profile` must be null or a live handle.
 */
size_t lg_rescaled_len(const struct LgRescaledProfile *profile);

/**
 * # Safety
 * `profile` must be a live handle and `buf` valid for `len` writes.
 */
enum LgStatus lg_rescaled_column(const struct LgRescaledProfile *profile,
                                 enum LgRescaledColumn column,
                                 double *buf,
                                 size_t len);

/**
 * # Safety
 * `profile` must be null or a live handle not yet freed.
 */
void lg_rescaled_free(struct LgRescaledProfile *profile);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAGERSTROM_H */
