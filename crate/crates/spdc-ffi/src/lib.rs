//! C ABI for the spdc toolkit.
//!
//! Conventions:
//! - Handles are opaque pointers created by `spdc_context_new` and released
//!   with `spdc_context_free`.
//! - Every fallible function returns an `SpdcStatus` code; results come back
//!   through out-pointers that are written only on `SPDC_STATUS_OK`.
//! - After a non-OK status, `spdc_context_last_error` returns a
//!   NUL-terminated message valid until the next call on the same context.
//! - Density matrices cross the boundary as two row-major `double[16]`
//!   arrays (real and imaginary parts) in the HH, HV, VH, VV basis.

use std::ffi::{c_char, CStr, CString};

use spdc::dispersion::{CrystalSpec, SetRegistry};
use spdc::error::Error;
use spdc::phasematch::{self, Plane, Pol, PumpSpec};
use spdc::spectrum;
use spdc::tomography::{self, MleOptions, TomographyRecord};
use spdc::twophoton::{self, DensityMatrix, EnvelopeShape};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Copy, Clone, PartialEq, Eq)]
pub enum SpdcStatus {
    /// Success; out-pointers are valid.
    SpdcStatusOk = 0,
    /// A pointer argument was NULL.
    SpdcStatusNullArgument = 1,
    /// Invalid input (bad enum value, unknown coefficient set, bad counts).
    SpdcStatusInvalidInput = 2,
    /// A solver or reconstruction failed numerically.
    SpdcStatusNumerical = 3,
}

/// Photon polarization selector.
#[repr(C)]
#[derive(Copy, Clone, PartialEq, Eq)]
pub enum SpdcPol {
    SpdcPolH = 0,
    SpdcPolV = 1,
}

/// Observation plane selector.
#[repr(C)]
#[derive(Copy, Clone, PartialEq, Eq)]
pub enum SpdcPlane {
    SpdcPlaneXy = 0,
    SpdcPlaneXz = 1,
}

/// Coherence-envelope shape for interference scans.
#[repr(C)]
#[derive(Copy, Clone, PartialEq, Eq)]
pub enum SpdcEnvelope {
    SpdcEnvelopeGaussian = 0,
    SpdcEnvelopeSincDerived = 1,
}

/// Opaque handle bundling a crystal, a pump and the last error message.
pub struct SpdcContext {
    crystal: CrystalSpec,
    pump: PumpSpec,
    last_error: Option<CString>,
}

impl SpdcContext {
    fn set_error(&mut self, err: &Error) -> SpdcStatus {
        let msg = err.to_string();
        self.last_error = CString::new(msg).ok();
        match err {
            Error::Config(_)
            | Error::MalformedInput { .. }
            | Error::UnknownCoefficientSet { .. }
            | Error::Io(_)
            | Error::WavelengthOutOfRange { .. } => SpdcStatus::SpdcStatusInvalidInput,
            _ => SpdcStatus::SpdcStatusNumerical,
        }
    }
}

fn pol_from(pol: SpdcPol) -> Pol {
    match pol {
        SpdcPol::SpdcPolH => Pol::H,
        SpdcPol::SpdcPolV => Pol::V,
    }
}

fn plane_from(plane: SpdcPlane) -> Plane {
    match plane {
        SpdcPlane::SpdcPlaneXy => Plane::Xy,
        SpdcPlane::SpdcPlaneXz => Plane::Xz,
    }
}

/// Create a context for one crystal/pump combination.
///
/// `set_name` may be NULL to use the default coefficient set. On success
/// writes a handle to `out` and returns OK; on failure leaves `out`
/// untouched. The handle must be released with `spdc_context_free`.
#[no_mangle]
pub unsafe extern "C" fn spdc_context_new(
    period_um: f64,
    length_mm: f64,
    lambda_p_nm: f64,
    set_name: *const c_char,
    out: *mut *mut SpdcContext,
) -> SpdcStatus {
    if out.is_null() {
        return SpdcStatus::SpdcStatusNullArgument;
    }
    let registry = SetRegistry::builtin();
    let name = if set_name.is_null() {
        spdc::dispersion::DEFAULT_SET.to_string()
    } else {
        match CStr::from_ptr(set_name).to_str() {
            Ok(s) => s.to_string(),
            Err(_) => return SpdcStatus::SpdcStatusInvalidInput,
        }
    };
    let set = match registry.get(&name) {
        Ok(s) => s.clone(),
        Err(_) => return SpdcStatus::SpdcStatusInvalidInput,
    };
    if !(period_um > 0.0 && length_mm > 0.0 && lambda_p_nm > 0.0) {
        return SpdcStatus::SpdcStatusInvalidInput;
    }
    let ctx = Box::new(SpdcContext {
        crystal: CrystalSpec::new(period_um, length_mm, set),
        pump: PumpSpec::new(lambda_p_nm, 0.2, 1.0),
        last_error: None,
    });
    *out = Box::into_raw(ctx);
    SpdcStatus::SpdcStatusOk
}

/// Release a context. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn spdc_context_free(ctx: *mut SpdcContext) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// Message for the most recent error on this context, or an empty string.
/// The pointer is valid until the next fallible call on the same context.
#[no_mangle]
pub unsafe extern "C" fn spdc_context_last_error(ctx: *const SpdcContext) -> *const c_char {
    static EMPTY: &[u8] = b"\0";
    if ctx.is_null() {
        return EMPTY.as_ptr().cast();
    }
    match &(*ctx).last_error {
        Some(msg) => msg.as_ptr(),
        None => EMPTY.as_ptr().cast(),
    }
}

/// Degenerate collinear phase-matching temperature (degC).
#[no_mangle]
pub unsafe extern "C" fn spdc_degenerate_temperature(
    ctx: *mut SpdcContext,
    out_t_c: *mut f64,
) -> SpdcStatus {
    if ctx.is_null() || out_t_c.is_null() {
        return SpdcStatus::SpdcStatusNullArgument;
    }
    let ctx = &mut *ctx;
    match phasematch::solve_degenerate_collinear_t(&ctx.crystal, &ctx.pump) {
        Ok(t) => {
            *out_t_c = t;
            SpdcStatus::SpdcStatusOk
        }
        Err(e) => ctx.set_error(&e),
    }
}

/// External emission half-angle (deg) at `lambda_nm`, `t_c` on `plane`.
#[no_mangle]
pub unsafe extern "C" fn spdc_emission_angle(
    ctx: *mut SpdcContext,
    lambda_nm: f64,
    t_c: f64,
    pol: SpdcPol,
    plane: SpdcPlane,
    out_angle_deg: *mut f64,
) -> SpdcStatus {
    if ctx.is_null() || out_angle_deg.is_null() {
        return SpdcStatus::SpdcStatusNullArgument;
    }
    let ctx = &mut *ctx;
    match spdc::emission::emission_angle(
        lambda_nm,
        t_c,
        pol_from(pol),
        plane_from(plane),
        &ctx.crystal,
        &ctx.pump,
    ) {
        Ok(a) => {
            *out_angle_deg = a;
            SpdcStatus::SpdcStatusOk
        }
        Err(e) => ctx.set_error(&e),
    }
}

/// Center wavelengths (nm) of the two polarizations collected at the fixed
/// external mode angle `theta_mode_deg`, at temperature `t_c`.
#[no_mangle]
pub unsafe extern "C" fn spdc_center_wavelengths(
    ctx: *mut SpdcContext,
    t_c: f64,
    theta_mode_deg: f64,
    out_lambda_h_nm: *mut f64,
    out_lambda_v_nm: *mut f64,
) -> SpdcStatus {
    if ctx.is_null() || out_lambda_h_nm.is_null() || out_lambda_v_nm.is_null() {
        return SpdcStatus::SpdcStatusNullArgument;
    }
    let ctx = &mut *ctx;
    match spectrum::center_wavelengths(t_c, theta_mode_deg, &ctx.crystal, &ctx.pump) {
        Ok((lh, lv)) => {
            *out_lambda_h_nm = lh;
            *out_lambda_v_nm = lv;
            SpdcStatus::SpdcStatusOk
        }
        Err(e) => ctx.set_error(&e),
    }
}

/// Spectral FWHM (nm) of one polarization collected at `theta_mode_deg`.
#[no_mangle]
pub unsafe extern "C" fn spdc_bandwidth_fwhm(
    ctx: *mut SpdcContext,
    t_c: f64,
    theta_mode_deg: f64,
    pol: SpdcPol,
    out_fwhm_nm: *mut f64,
) -> SpdcStatus {
    if ctx.is_null() || out_fwhm_nm.is_null() {
        return SpdcStatus::SpdcStatusNullArgument;
    }
    let ctx = &mut *ctx;
    match spectrum::bandwidth_fwhm(t_c, theta_mode_deg, pol_from(pol), &ctx.crystal, &ctx.pump) {
        Ok(w) => {
            *out_fwhm_nm = w;
            SpdcStatus::SpdcStatusOk
        }
        Err(e) => ctx.set_error(&e),
    }
}

/// Coincidence probability of the interferometric pair state at relative
/// delay `tau_fs`, with analyzing polarizers at `lp_a_deg`/`lp_b_deg`.
/// Context-free: depends only on the arguments.
#[no_mangle]
pub unsafe extern "C" fn spdc_hom_probability(
    phi_rad: f64,
    lambda_a_nm: f64,
    lambda_b_nm: f64,
    fwhm_nm: f64,
    lp_a_deg: f64,
    lp_b_deg: f64,
    tau_fs: f64,
    envelope: SpdcEnvelope,
    out_probability: *mut f64,
) -> SpdcStatus {
    if out_probability.is_null() {
        return SpdcStatus::SpdcStatusNullArgument;
    }
    if !(lambda_a_nm > 0.0 && lambda_b_nm > 0.0 && fwhm_nm > 0.0) {
        return SpdcStatus::SpdcStatusInvalidInput;
    }
    let shape = match envelope {
        SpdcEnvelope::SpdcEnvelopeGaussian => EnvelopeShape::Gaussian,
        SpdcEnvelope::SpdcEnvelopeSincDerived => EnvelopeShape::SincDerived,
    };
    let state = twophoton::output_state(phi_rad, lambda_a_nm, lambda_b_nm, fwhm_nm, tau_fs);
    *out_probability = twophoton::coincidence_probability(&state, lp_a_deg, lp_b_deg, shape);
    SpdcStatus::SpdcStatusOk
}

fn write_rho(rho: &DensityMatrix, re: *mut f64, im: *mut f64) {
    for i in 0..4 {
        for j in 0..4 {
            unsafe {
                *re.add(i * 4 + j) = rho[(i, j)].re;
                *im.add(i * 4 + j) = rho[(i, j)].im;
            }
        }
    }
}

fn read_rho(re: *const f64, im: *const f64) -> DensityMatrix {
    DensityMatrix::from_fn(|i, j| unsafe {
        num_complex::Complex64::new(*re.add(i * 4 + j), *im.add(i * 4 + j))
    })
}

/// Maximum-likelihood density matrix from 16 coincidence counts in the
/// canonical setting order HH, HV, VH, VV, HD, HR, VD, VR, DH, DV, DD, DR,
/// RH, RV, RD, RR. Writes the row-major real/imaginary parts to
/// `out_rho_re`/`out_rho_im` (each `double[16]`).
#[no_mangle]
pub unsafe extern "C" fn spdc_mle_reconstruct(
    ctx: *mut SpdcContext,
    counts: *const f64,
    seed: u64,
    out_rho_re: *mut f64,
    out_rho_im: *mut f64,
) -> SpdcStatus {
    if ctx.is_null() || counts.is_null() || out_rho_re.is_null() || out_rho_im.is_null() {
        return SpdcStatus::SpdcStatusNullArgument;
    }
    let ctx = &mut *ctx;
    let values: Vec<f64> = (0..16).map(|i| *counts.add(i)).collect();
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return ctx.set_error(&Error::MalformedInput {
            line: 0,
            message: "counts must be finite and non-negative".into(),
        });
    }
    let record = match TomographyRecord::from_counts(&values) {
        Ok(r) => r,
        Err(e) => return ctx.set_error(&e),
    };
    let options = MleOptions {
        seed,
        ..Default::default()
    };
    match tomography::mle_reconstruct(&record, &options) {
        Ok(rho) => {
            write_rho(&rho, out_rho_re, out_rho_im);
            SpdcStatus::SpdcStatusOk
        }
        Err(e) => ctx.set_error(&e),
    }
}

/// Wootters concurrence of a density matrix given as row-major
/// real/imaginary `double[16]` arrays.
#[no_mangle]
pub unsafe extern "C" fn spdc_concurrence(
    rho_re: *const f64,
    rho_im: *const f64,
    out_concurrence: *mut f64,
) -> SpdcStatus {
    if rho_re.is_null() || rho_im.is_null() || out_concurrence.is_null() {
        return SpdcStatus::SpdcStatusNullArgument;
    }
    let rho = read_rho(rho_re, rho_im);
    match tomography::concurrence(&rho) {
        Ok(c) => {
            *out_concurrence = c;
            SpdcStatus::SpdcStatusOk
        }
        Err(_) => SpdcStatus::SpdcStatusInvalidInput,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;
    use std::ptr;

    #[test]
    fn context_round_trip_and_tdc() {
        unsafe {
            let mut ctx: *mut SpdcContext = ptr::null_mut();
            let status = spdc_context_new(10.0, 10.0, 406.2, ptr::null(), &mut ctx);
            assert!(status == SpdcStatus::SpdcStatusOk);
            let mut t = 0.0;
            assert!(spdc_degenerate_temperature(ctx, &mut t) == SpdcStatus::SpdcStatusOk);
            assert!((t - 98.98).abs() < 0.05, "t = {t}");
            spdc_context_free(ctx);
        }
    }

    #[test]
    fn unknown_set_is_invalid_input() {
        unsafe {
            let mut ctx: *mut SpdcContext = ptr::null_mut();
            let name = CString::new("nope").unwrap();
            let status = spdc_context_new(10.0, 10.0, 406.2, name.as_ptr(), &mut ctx);
            assert!(status == SpdcStatus::SpdcStatusInvalidInput);
            assert!(ctx.is_null());
        }
    }

    #[test]
    fn null_arguments_are_rejected() {
        unsafe {
            assert!(
                spdc_degenerate_temperature(ptr::null_mut(), ptr::null_mut())
                    == SpdcStatus::SpdcStatusNullArgument
            );
            assert!(
                spdc_context_new(10.0, 10.0, 406.2, ptr::null(), ptr::null_mut())
                    == SpdcStatus::SpdcStatusNullArgument
            );
        }
    }

    #[test]
    fn error_message_is_recorded() {
        unsafe {
            let mut ctx: *mut SpdcContext = ptr::null_mut();
            spdc_context_new(10.0, 10.0, 406.2, ptr::null(), &mut ctx);
            let mut angle = 0.0;
            // Collinear solution exists at T_dc, so a far-too-hot temperature
            // has no emission ring.
            let status = spdc_emission_angle(
                ctx,
                812.4,
                180.0,
                SpdcPol::SpdcPolH,
                SpdcPlane::SpdcPlaneXy,
                &mut angle,
            );
            assert!(status == SpdcStatus::SpdcStatusNumerical);
            let msg = CStr::from_ptr(spdc_context_last_error(ctx));
            assert!(!msg.to_bytes().is_empty());
            spdc_context_free(ctx);
        }
    }

    #[test]
    fn hom_probability_matches_library() {
        unsafe {
            let mut p = -1.0;
            let status = spdc_hom_probability(
                0.0,
                812.4,
                812.4,
                0.553,
                45.0,
                -45.0,
                0.0,
                SpdcEnvelope::SpdcEnvelopeGaussian,
                &mut p,
            );
            assert!(status == SpdcStatus::SpdcStatusOk);
            assert!(p.abs() < 1e-12, "phi=0 at zero delay must interfere to zero, got {p}");
        }
    }

    #[test]
    fn mle_round_trip_through_abi() {
        unsafe {
            let mut ctx: *mut SpdcContext = ptr::null_mut();
            spdc_context_new(10.0, 10.0, 406.2, ptr::null(), &mut ctx);
            let rho = spdc::twophoton::werner(0.9);
            let record =
                spdc::tomography::simulate_counts(&rho, 100_000.0, spdc::tomography::NoiseModel::None, 1)
                    .unwrap();
            let counts = record.counts();
            let mut re = [0.0; 16];
            let mut im = [0.0; 16];
            let status =
                spdc_mle_reconstruct(ctx, counts.as_ptr(), 1, re.as_mut_ptr(), im.as_mut_ptr());
            assert!(status == SpdcStatus::SpdcStatusOk);
            let mut c = 0.0;
            assert!(spdc_concurrence(re.as_ptr(), im.as_ptr(), &mut c) == SpdcStatus::SpdcStatusOk);
            let expected = spdc::tomography::concurrence(&rho).unwrap();
            assert!((c - expected).abs() < 1e-3, "c = {c}, expected {expected}");
            spdc_context_free(ctx);
        }
    }
}
