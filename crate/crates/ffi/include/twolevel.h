/* Copyright 2026 The twolevel Authors
 * SPDX-License-Identifier: Apache-2.0 */

#ifndef TWOLEVEL_H
#define TWOLEVEL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Lab frame for [`tl_unitary_oracle`].
 */
#define TL_FRAME_LAB 0

/**
 * Rotated frame for [`tl_unitary_oracle`].
 */
#define TL_FRAME_ROTATED 1

/**
 * Result codes. Values 1..=15 mirror the library error kinds.
 */
enum TlStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  TL_STATUS_OK = 0,
  TL_STATUS_INVALID_SPEC = 1,
  TL_STATUS_SPEC_PARSE = 2,
  TL_STATUS_INVALID_ARGUMENT = 3,
  TL_STATUS_QUADRATURE_NOT_CONVERGED = 4,
  TL_STATUS_BESSEL_NOT_CONVERGED = 5,
  TL_STATUS_ACAUSAL = 6,
  TL_STATUS_NOT_INTEGER_RESONANT = 7,
  TL_STATUS_GRID_MISMATCH = 8,
  TL_STATUS_SERIES_NOT_CONVERGED = 9,
  TL_STATUS_BUDGET_EXCEEDED = 10,
  TL_STATUS_DISCRETIZATION = 11,
  TL_STATUS_UNITARITY = 12,
  TL_STATUS_STEP_BUDGET = 13,
  TL_STATUS_OUT_OF_BAND = 14,
  TL_STATUS_IO = 15,
  TL_STATUS_NULL_POINTER = 100,
  TL_STATUS_INVALID_UTF8 = 101,
  TL_STATUS_PANIC = 102,
};
#ifndef __cplusplus
typedef int32_t TlStatus;
#endif // __cplusplus

/**
 * Opaque drive specification.
 */
typedef struct TlDrive TlDrive;

/**
 * Opaque kernel: a drive with its consolidated coefficient table.
 */
typedef struct TlKernel TlKernel;

typedef struct TlComplex {
  double re;
  double im;
} TlComplex;

/**
 * Row-major 2×2 complex matrix.
 */
typedef struct TlMat2 {
  struct TlComplex u11;
  struct TlComplex u12;
  struct TlComplex u21;
  struct TlComplex u22;
} TlMat2;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or "" after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *tl_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tl_version(void);

/**
 * Parses a JSON drive spec.
 *
 * # Safety
 * `json` must be NUL-terminated; `out_drive` must be writable.
 */
TlStatus tl_drive_from_json(const char *json, struct TlDrive **out_drive);

/**
 * Looks up a named preset.
 *
 * # Safety
 * `name` must be NUL-terminated; `out_drive` must be writable.
 */
TlStatus tl_drive_preset(const char *name, struct TlDrive **out_drive);

/**
 * Releases a drive. Null is ignored.
 *
 * # Safety
 * `drive` must come from this library and not be used afterwards.
 */
void tl_drive_free(struct TlDrive *drive);

/**
 * Drive period `2π/ω`.
 *
 * # Safety
 * Pointers must be valid.
 */
TlStatus tl_drive_period(const struct TlDrive *drive, double *out_period);

/**
 * Builds the kernel of a drive with the default truncation threshold.
 *
 * # Safety
 * Pointers must be valid.
 */
TlStatus tl_kernel_new(const struct TlDrive *drive, struct TlKernel **out_kernel);

/**
 * Releases a kernel. Null is ignored.
 *
 * # Safety
 * `kernel` must come from this library and not be used afterwards.
 */
void tl_kernel_free(struct TlKernel *kernel);

/**
 * `K(t, s)` for `t ≥ s`.
 *
 * # Safety
 * Pointers must be valid.
 */
TlStatus tl_kernel_at(const struct TlKernel *kernel,
                      double t,
                      double s,
                      struct TlComplex *out_value);

/**
 * Rotated-frame `U(t, s)` from the series engine.
 *
 * # Safety
 * Pointers must be valid.
 */
TlStatus tl_unitary(const struct TlKernel *kernel,
                    double t,
                    double s,
                    double tol,
                    uintptr_t k_max,
                    struct TlMat2 *out_u);

/**
 * `p(t, s) = |U₁₂(t, s)|²` from the series engine, clamped to `[0, 1]`.
 *
 * # Safety
 * Pointers must be valid.
 */
TlStatus tl_transition_probability(const struct TlKernel *kernel,
                                   double t,
                                   double s,
                                   double tol,
                                   uintptr_t k_max,
                                   double *out_p);

/**
 * `U(t, s)` by adaptive time stepping in the given frame
 * (`TL_FRAME_LAB` or `TL_FRAME_ROTATED`).
 *
 * # Safety
 * Pointers must be valid.
 */
TlStatus tl_unitary_oracle(const struct TlDrive *drive,
                           double t,
                           double s,
                           double tol,
                           int32_t frame,
                           struct TlMat2 *out_u);

/**
 * Rotated-frame quasienergies `(ε₊, ε₋)` from the series monodromy.
 *
 * # Safety
 * Pointers must be valid.
 */
TlStatus tl_quasienergies(const struct TlKernel *kernel,
                          double tol,
                          uintptr_t k_max,
                          double *out_plus,
                          double *out_minus);

/**
 * Period-averaged rotated-frame Hamiltonian.
 *
 * # Safety
 * Pointers must be valid.
 */
TlStatus tl_effective_hamiltonian(const struct TlDrive *drive,
                                  uintptr_t n_quad,
                                  struct TlMat2 *out_h);

/**
 * Rotating-wave long-time average of the transition probability.
 *
 * # Safety
 * Pointers must be valid.
 */
TlStatus tl_rwa_average(const struct TlDrive *drive, double *out_avg);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWOLEVEL_H */
