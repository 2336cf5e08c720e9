/* C interface for the spdc toolkit. Generated by cbindgen; do not edit. */

#ifndef SPDC_FFI_H
#define SPDC_FFI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Coherence-envelope shape for interference scans.
 */
typedef enum SpdcEnvelope {
  SPDC_ENVELOPE_GAUSSIAN = 0,
  SPDC_ENVELOPE_SINC_DERIVED = 1,
} SpdcEnvelope;

/**
 * Observation plane selector.
 */
typedef enum SpdcPlane {
  SPDC_PLANE_XY = 0,
  SPDC_PLANE_XZ = 1,
} SpdcPlane;

/**
 * Photon polarization selector.
 */
typedef enum SpdcPol {
  SPDC_POL_H = 0,
  SPDC_POL_V = 1,
} SpdcPol;

/**
 * Status codes returned by every fallible function.
 */
typedef enum SpdcStatus {
  /**
   * Success; out-pointers are valid.
   */
  SPDC_STATUS_OK = 0,
  /**
   * A pointer argument was NULL.
   */
  SPDC_STATUS_NULL_ARGUMENT = 1,
  /**
   * Invalid input (bad enum value, unknown coefficient set, bad counts).
   */
  SPDC_STATUS_INVALID_INPUT = 2,
  /**
   * A solver or reconstruction failed numerically.
   */
  SPDC_STATUS_NUMERICAL = 3,
} SpdcStatus;

/**
 * Opaque handle bundling a crystal, a pump and the last error message.
 */
typedef struct SpdcContext SpdcContext;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create a context for one crystal/pump combination.
 *
 * `set_name` may be NULL to use the default coefficient set. On success
 * writes a handle to `out` and returns OK; on failure leaves `out`
 * untouched. The handle must be released with `spdc_context_free`.
 */
enum SpdcStatus spdc_context_new(double period_um,
                                 double length_mm,
                                 double lambda_p_nm,
                                 const char *set_name,
                                 struct SpdcContext **out);

/**
 * Release a context. NULL is a no-op.
 */
void spdc_context_free(struct SpdcContext *ctx);

/**
 * Message for the most recent error on this context, or an empty string.
 * The pointer is valid until the next fallible call on the same context.
 */
const char *spdc_context_last_error(const struct SpdcContext *ctx);

/**
 * Degenerate collinear phase-matching temperature (degC).
 */
enum SpdcStatus spdc_degenerate_temperature(struct SpdcContext *ctx, double *out_t_c);

/**
 * External emission half-angle (deg) at `lambda_nm`, `t_c` on `plane`.
 */
enum SpdcStatus spdc_emission_angle(struct SpdcContext *ctx,
                                    double lambda_nm,
                                    double t_c,
                                    enum SpdcPol pol,
                                    enum SpdcPlane plane,
                                    double *out_angle_deg);

/**
 * Center wavelengths (nm) of the two polarizations collected at the fixed
 * external mode angle `theta_mode_deg`, at temperature `t_c`.
 */
enum SpdcStatus spdc_center_wavelengths(struct SpdcContext *ctx,
                                        double t_c,
                                        double theta_mode_deg,
                                        double *out_lambda_h_nm,
                                        double *out_lambda_v_nm);

/**
 * Spectral FWHM (nm) of one polarization collected at `theta_mode_deg`.
 */
enum SpdcStatus spdc_bandwidth_fwhm(struct SpdcContext *ctx,
                                    double t_c,
                                    double theta_mode_deg,
                                    enum SpdcPol pol,
                                    double *out_fwhm_nm);

/**
 * Coincidence probability of the interferometric pair state at relative
 * delay `tau_fs`, with analyzing polarizers at `lp_a_deg`/`lp_b_deg`.
 * Context-free: depends only on the arguments.
 */
enum SpdcStatus spdc_hom_probability(double phi_rad,
                                     double lambda_a_nm,
                                     double lambda_b_nm,
                                     double fwhm_nm,
                                     double lp_a_deg,
                                     double lp_b_deg,
                                     double tau_fs,
                                     enum SpdcEnvelope envelope,
                                     double *out_probability);

/**
 * Maximum-likelihood density matrix from 16 coincidence counts in the
 * canonical setting order HH, HV, VH, VV, HD, HR, VD, VR, DH, DV, DD, DR,
 * RH, RV, RD, RR. Writes the row-major real/imaginary parts to
 * `out_rho_re`/`out_rho_im` (each `double[16]`).
 */
enum SpdcStatus spdc_mle_reconstruct(struct SpdcContext *ctx,
                                     const double *counts,
                                     uint64_t seed,
                                     double *out_rho_re,
                                     double *out_rho_im);

/**
 * Wootters concurrence of a density matrix given as row-major
 * real/imaginary `double[16]` arrays.
 */
enum SpdcStatus spdc_concurrence(const double *rho_re,
                                 const double *rho_im,
                                 double *out_concurrence);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPDC_FFI_H */
